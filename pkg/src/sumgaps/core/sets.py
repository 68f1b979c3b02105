"""Ensembles finis d'entiers naturels, sommes d'ensembles et statistiques de paires.

Un `NatSet` est un vecteur de bits (entier Python) sur un intervalle
`Interval` avec décalage : l'élément x occupe le bit `x - universe.lo`.
La somme A + A est calculée par accumulation de OU décalés.
"""

import base64
import binascii
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np
from scipy.signal import fftconvolve

from .errors import PreconditionViolated, SetFormatError

# Au-delà de cette taille d'univers, les comptages passent par la FFT
FFT_THRESHOLD = 4096


@dataclass(frozen=True)
class Interval:
    """Intervalle d'entiers [lo, hi] avec lo >= 1."""

    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.lo < 1 or self.lo > self.hi:
            raise PreconditionViolated(
                f"Intervalle invalide [{self.lo}, {self.hi}] (il faut 1 <= lo <= hi)",
                {"lo": self.lo, "hi": self.hi},
            )

    def size(self) -> int:
        """Nombre d'entiers de l'intervalle."""
        return self.hi - self.lo + 1

    def __contains__(self, x: object) -> bool:
        return isinstance(x, int) and self.lo <= x <= self.hi

    def hull(self, other: "Interval") -> "Interval":
        """Plus petit intervalle contenant les deux."""
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def sum_window(self) -> "Interval":
        """Fenêtre des sommes réalisables [2·lo, 2·hi]."""
        return Interval(2 * self.lo, 2 * self.hi)

    def overlaps(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def _rebase(bits: int, from_lo: int, to_lo: int, width: int) -> int:
    """Réexprime un masque d'origine `from_lo` dans l'origine `to_lo`, tronqué à `width` bits."""
    shift = from_lo - to_lo
    moved = bits << shift if shift >= 0 else bits >> -shift
    return moved & ((1 << width) - 1)


@dataclass(frozen=True, eq=False)
class NatSet:
    """Ensemble fini d'entiers naturels sur un univers borné.

    L'égalité et le hachage portent sur les éléments seuls, indépendamment
    de l'univers déclaré.
    """

    universe: Interval
    bits: int = 0

    def __post_init__(self) -> None:
        if self.bits < 0 or self.bits.bit_length() > self.universe.size():
            raise PreconditionViolated(
                f"Masque hors de l'univers {self.universe}",
                {"bit_length": self.bits.bit_length()},
            )

    # --- Constructeurs ---

    @classmethod
    def from_iterable(cls, universe: Interval, members: Iterable[int]) -> "NatSet":
        """Construit un ensemble à partir d'éléments quelconques de l'univers.

        Raises:
            PreconditionViolated: Si un élément sort de l'univers
        """
        bits = 0
        for x in members:
            if x not in universe:
                raise PreconditionViolated(
                    f"Élément {x} hors de l'univers {universe}", {"element": x}
                )
            bits |= 1 << (x - universe.lo)
        return cls(universe, bits)

    @classmethod
    def interval(cls, lo: int, hi: int) -> "NatSet":
        """L'intervalle [lo, hi] complet, sur lui-même comme univers."""
        universe = Interval(lo, hi)
        return cls(universe, (1 << universe.size()) - 1)

    @classmethod
    def empty(cls, universe: Interval) -> "NatSet":
        return cls(universe, 0)

    @classmethod
    def from_mask(cls, universe: Interval, mask: np.ndarray) -> "NatSet":
        """Construit un ensemble depuis un masque booléen indexé par `x - universe.lo`."""
        if mask.shape != (universe.size(),):
            raise PreconditionViolated(
                f"Masque de taille {mask.shape} incompatible avec {universe}"
            )
        packed = np.packbits(mask.astype(bool), bitorder="little")
        return cls(universe, int.from_bytes(packed.tobytes(), "little"))

    # --- Accès ---

    @cached_property
    def members(self) -> tuple[int, ...]:
        """Éléments en ordre strictement croissant (forme canonique)."""
        out: list[int] = []
        bits = self.bits
        lo = self.universe.lo
        while bits:
            low = bits & -bits
            out.append(lo + low.bit_length() - 1)
            bits ^= low
        return tuple(out)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __contains__(self, x: object) -> bool:
        if not isinstance(x, int) or x not in self.universe:
            return False
        return bool((self.bits >> (x - self.universe.lo)) & 1)

    def __bool__(self) -> bool:
        return self.bits != 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NatSet):
            return NotImplemented
        return self.members == other.members

    def __hash__(self) -> int:
        return hash(self.members)

    def __repr__(self) -> str:
        shown = ", ".join(str(x) for x in self.members[:12])
        more = ", ..." if len(self) > 12 else ""
        return f"NatSet({self.universe}, {{{shown}{more}}})"

    def to_mask(self) -> np.ndarray:
        """Masque booléen de longueur |univers| (indice x - lo)."""
        size = self.universe.size()
        raw = self.bits.to_bytes((size + 7) // 8, "little")
        unpacked = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
        return unpacked[:size].astype(bool)

    def bits_in(self, universe: Interval) -> int:
        """Masque des éléments de l'ensemble qui tombent dans `universe`, dans son origine."""
        return _rebase(self.bits, self.universe.lo, universe.lo, universe.size())

    # --- Algèbre ---

    def restrict(self, universe: Interval) -> "NatSet":
        """Éléments appartenant à `universe`, exprimés sur cet univers."""
        return NatSet(universe, self.bits_in(universe))

    def union(self, other: "NatSet") -> "NatSet":
        universe = self.universe.hull(other.universe)
        return NatSet(universe, self.bits_in(universe) | other.bits_in(universe))

    def intersection(self, other: "NatSet") -> "NatSet":
        return NatSet(self.universe, self.bits & other.bits_in(self.universe))

    def difference(self, other: "NatSet") -> "NatSet":
        return NatSet(self.universe, self.bits & ~other.bits_in(self.universe))

    def issubset(self, other: "NatSet") -> bool:
        if not self:
            return True
        if not self.universe.overlaps(other.universe):
            return False
        return len(self.intersection(other)) == len(self)

    def isdisjoint(self, other: "NatSet") -> bool:
        return not self.intersection(other)

    def complement(self) -> "NatSet":
        """Complément dans l'univers déclaré."""
        full = (1 << self.universe.size()) - 1
        return NatSet(self.universe, full & ~self.bits)

    # --- Sérialisation ---

    def to_json(self) -> dict[str, Any]:
        return {"lo": self.universe.lo, "hi": self.universe.hi, "members": list(self.members)}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "NatSet":
        """Décode {"lo", "hi", "members"} ; les éléments doivent être strictement croissants.

        Raises:
            SetFormatError: Si l'objet est mal formé
        """
        try:
            lo, hi, members = int(data["lo"]), int(data["hi"]), list(data["members"])
        except (KeyError, TypeError, ValueError) as e:
            raise SetFormatError(f"NatSet JSON invalide: {e}") from e
        if any(b <= a for a, b in zip(members, members[1:])):
            raise SetFormatError("Les éléments doivent être strictement croissants")
        try:
            return cls.from_iterable(Interval(lo, hi), members)
        except PreconditionViolated as e:
            raise SetFormatError(str(e)) from e

    def to_compact(self) -> str:
        """Forme texte compacte "lo-hi:base64(vecteur de bits)"."""
        size = self.universe.size()
        raw = self.bits.to_bytes((size + 7) // 8, "little")
        encoded = base64.b64encode(raw).decode("ascii")
        return f"{self.universe.lo}-{self.universe.hi}:{encoded}"

    @classmethod
    def from_compact(cls, text: str) -> "NatSet":
        """Décode la forme "lo-hi:base64".

        Raises:
            SetFormatError: Si le texte est mal formé
        """
        try:
            bounds, encoded = text.split(":", 1)
            lo_text, hi_text = bounds.split("-", 1)
            universe = Interval(int(lo_text), int(hi_text))
            raw = base64.b64decode(encoded.encode("ascii"), validate=True)
            return cls(universe, int.from_bytes(raw, "little"))
        except (ValueError, binascii.Error, PreconditionViolated) as e:
            raise SetFormatError(f"Forme compacte invalide '{text[:40]}': {e}") from e


def sumset(A: NatSet) -> NatSet:
    """A + A = {a + b : a, b ∈ A}, sur l'univers [2·lo, 2·hi]."""
    window = A.universe.sum_window()
    acc = 0
    lo = A.universe.lo
    for a in A.members:
        acc |= A.bits << (a - lo)
    return NatSet(window, acc)


def missing(Y: NatSet, A: NatSet) -> NatSet:
    """Ensemble de déficience Y \\ (A + A)."""
    return Y.difference(sumset(A))


def representation_counts(X: NatSet) -> np.ndarray:
    """Nombre de paires x <= x' de X de somme s, pour s dans la fenêtre [2·lo, 2·hi].

    Returns:
        Tableau int64 de longueur 2|univers| - 1, indicé par s - 2·lo
    """
    indicator = X.to_mask().astype(np.int64)
    if indicator.size > FFT_THRESHOLD:
        ordered = np.rint(fftconvolve(indicator.astype(float), indicator.astype(float)))
        ordered = ordered.astype(np.int64)
    else:
        ordered = np.convolve(indicator, indicator)
    # (x, x) n'est compté qu'une fois dans la convolution ordonnée
    diagonal = np.zeros_like(ordered)
    diagonal[::2] = indicator
    return (ordered + diagonal) // 2


def pair_count(X: NatSet, Y: NatSet) -> int:
    """|S(X, Y)| = |{(x, x') ∈ X×X : x <= x', x + x' ∈ Y}|."""
    if not X or not Y:
        return 0
    window = X.universe.sum_window()
    if not window.overlaps(Y.universe):
        return 0
    counts = representation_counts(X)
    targets = Y.restrict(window).to_mask()
    return int(counts[targets].sum())


def representations(X: NatSet, y: int) -> int:
    """|S(X, {y})| : nombre de paires x <= x' de X avec x + x' = y."""
    count = 0
    for x in X.members:
        if 2 * x > y:
            break
        if (y - x) in X:
            count += 1
    return count


def slice_set(a: int, X: NatSet, Y: NatSet) -> NatSet:
    """S_a(X, Y) = {x ∈ X : a + x ∈ Y}."""
    shifted = _rebase(Y.bits, Y.universe.lo - a, X.universe.lo, X.universe.size())
    return NatSet(X.universe, X.bits & shifted)


def slice_size(a: int, X: NatSet, Y: NatSet) -> int:
    """|S_a(X, Y)| sans construire l'ensemble."""
    shifted = _rebase(Y.bits, Y.universe.lo - a, X.universe.lo, X.universe.size())
    return (X.bits & shifted).bit_count()


def window_complement(X: NatSet, Y: NatSet) -> NatSet:
    """Complément de Y restreint à la fenêtre des sommes réalisables de X."""
    window = X.universe.sum_window()
    return Y.restrict(window).complement()
