"""Conteneurs pour les paires robustes.

`robust_pair_container` extrait d'un ensemble A ⊆ X une empreinte F et un
conteneur Q disjoint de A, Q ne dépendant que de F. `iterated_container`
compose cette procédure sur un intervalle X en faisant croître Z ⊆ X+X
(sommes déjà réalisées par l'empreinte) et Q jusqu'à ce que
|Q| >= d/2 - εd.
"""

import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any

from ..core.errors import (
    InsufficientFingerprintSupply,
    InvariantViolation,
    IterationGuardTripped,
    PreconditionViolated,
)
from ..core.rational import Number, as_fraction, ceil_sqrt
from ..core.sets import Interval, NatSet, slice_set, slice_size, sumset
from ..utils.logger import LogContext, get_logger
from .book import PairBook
from .certificate import ContainerCertificate, check_structure

logger = get_logger("sumgaps.containers.robust")


class RobustCase(Enum):
    """Branche prise par la procédure."""

    SPARSE_B = "SparseB"  # |B| petit : Q vient des tranches S_x
    DENSE_B_SUMSET_HEAVY = "DenseB_SumsetHeavy"  # |B(F,*)| grand : Q = ∅
    DENSE_B_CONTAINER_HEAVY = "DenseB_ContainerHeavy"  # Q vient de B'


def greedy_pick(candidates: Iterable[int], score: Callable[[int], int]) -> int:
    """Élément de score maximal, le plus petit à égalité (candidats croissants)."""
    best, best_score = -1, -1
    for a in candidates:
        s = score(a)
        if s > best_score:
            best, best_score = a, s
    return best


@dataclass
class RobustContainerResult:
    """Sortie de robust_pair_container (et entrées nécessaires au rejeu)."""

    F: NatSet
    Q: NatSet
    case: RobustCase
    R_X: NatSet
    R_Y: NatSet
    book: PairBook
    trace: tuple[int, ...]
    F0: NatSet
    X: NatSet
    Y: NatSet
    beta: Fraction
    steps: int
    short_supply: bool = False
    robust_verified: bool = False

    @property
    def size_condition(self) -> bool:
        """|X| > 16 β⁻³."""
        return len(self.X) * self.beta**3 > 16

    @property
    def guarantees_applicable(self) -> bool:
        return self.robust_verified and self.size_condition and not self.short_supply

    @property
    def sumset_hits(self) -> int:
        """|(F + F) ∩ Y|."""
        return len(self.Y.intersection(sumset(self.F)))

    @property
    def guaranteed_value(self) -> Fraction:
        """β|X|/64."""
        return self.beta * len(self.X) / 64

    def certificate(self) -> ContainerCertificate:
        flags = ("short_supply",) if self.short_supply else ()
        return ContainerCertificate(
            lemma="robust",
            F=self.F,
            Q=self.Q,
            case=self.case.value,
            iterations=1,
            guarantees_applicable=self.guarantees_applicable,
            trace=self.trace,
            flags=flags,
            extra={
                "beta": str(self.beta),
                "steps": self.steps,
                "R_X": list(self.R_X.members),
                "R_Y": list(self.R_Y.members),
                "book": self.book.to_json(),
                "sumset_hits": self.sumset_hits,
            },
        )

    def replay(self, A_prime: NatSet) -> "RobustContainerResult":
        """Relance la procédure sur A' (F ⊆ A' ⊆ A)."""
        return _run_robust(A_prime, self.X, self.Y, self.beta, True, self.robust_verified)


def _frozen(universe: Interval, sizes: dict[int, int], radicand: Fraction) -> NatSet:
    """Éléments dont le compteur c vérifie c >= √radicand."""
    return NatSet.from_iterable(universe, (v for v, c in sizes.items() if c * c >= radicand))


def _run_robust(
    A: NatSet,
    X: NatSet,
    Y: NatSet,
    beta: Fraction,
    allow_short_supply: bool,
    robust_verified: bool,
) -> RobustContainerResult:
    size = len(X)
    steps = ceil_sqrt(Fraction(size) / beta)
    if len(A) < 2 * steps and not allow_short_supply:
        raise InsufficientFingerprintSupply(
            f"|A|={len(A)} < 2⌈√(|X|/β)⌉ = {2 * steps}", available=len(A), required=2 * steps
        )

    freeze = beta * size
    book = PairBook()
    trace: list[int] = []
    picked: set[int] = set()
    R_X = NatSet.empty(X.universe)
    R_Y = NatSet.empty(Y.universe)
    short = False

    # Phase 1 : tranches S_a(X \ R_X, Y \ R_Y)
    for _ in range(steps):
        candidates = [a for a in A.members if a not in picked]
        if not candidates:
            short = True
            break
        X_live, Y_live = X.difference(R_X), Y.difference(R_Y)
        a = greedy_pick(candidates, lambda c: slice_size(c, X_live, Y_live))
        trace.append(a)
        picked.add(a)
        for x in slice_set(a, X_live, Y_live):
            book.add(x, a + x)
        R_X = _frozen(X.universe, book.row_sizes(), freeze)
        R_Y = _frozen(Y.universe, book.column_sizes(), freeze)
    logger.debug(f"Phase 1: {len(trace)} pas, |B|={len(book)}, |R_X|={len(R_X)}, |R_Y|={len(R_Y)}")

    F0 = NatSet.from_iterable(A.universe, trace)
    X_live, Y_live = X.difference(R_X), Y.difference(R_Y)

    if (8 * len(book)) ** 2 < freeze**3:
        case = RobustCase.SPARSE_B
        bar = beta * beta * size
        Q = NatSet.from_iterable(
            X.universe,
            (x for x in X.members if x not in picked and 8 * slice_size(x, X_live, Y_live) >= bar),
        )
    else:
        # Phase 2 : nouvelles lignes B(a,*) \ B(F,*)
        for _ in range(steps):
            candidates = [a for a in A.members if a not in picked]
            if not candidates:
                short = True
                break
            covered = book.rows_union(picked)
            a = greedy_pick(candidates, lambda c: len(book.row(c) - covered))
            trace.append(a)
            picked.add(a)
        covered = book.rows_union(picked)
        if 32 * len(covered) >= freeze:
            case = RobustCase.DENSE_B_SUMSET_HEAVY
            Q = NatSet.empty(X.universe)
        else:
            case = RobustCase.DENSE_B_CONTAINER_HEAVY
            pruned = book.without_columns(covered)
            radicand = beta**3 * size
            Q = NatSet.from_iterable(
                X.universe,
                (x for x, c in pruned.row_sizes().items() if (32 * c) ** 2 >= radicand),
            )

    F = NatSet.from_iterable(A.universe, trace)
    book.check()
    check_structure(A, F, Q)
    return RobustContainerResult(
        F, Q, case, R_X, R_Y, book, tuple(trace), F0, X, Y, beta, steps, short, robust_verified
    )


def robust_pair_container(
    A: NatSet,
    X: NatSet,
    Y: NatSet,
    beta: Number,
    *,
    allow_short_supply: bool = False,
    robust_verified: bool = False,
) -> RobustContainerResult:
    """Procédure en deux phases pour une paire (X, Y) β-robuste.

    Phase 1 : ⌈√(|X|/β)⌉ pas gloutons choisissant a ∈ A \\ F qui maximise
    |S_a(X \\ R_X, Y \\ R_Y)| (le plus petit à égalité), en gelant les lignes
    et colonnes de B qui atteignent √(β|X|). Si |B| < (β|X|)^{3/2}/8, Q
    regroupe les x ∈ X \\ F de tranche >= β²|X|/8. Sinon une seconde phase
    de même longueur maximise |B(a,*) \\ B(F,*)| ; Q = ∅ si
    |B(F,*)| >= β|X|/32, sinon Q regroupe les lignes de B' (B privé des
    colonnes B(F,*)) de taille >= β^{3/2}√|X|/32.

    Args:
        A: Ensemble à encoder (A ⊆ X)
        X: Ensemble de départ
        Y: Ensemble cible
        beta: Paramètre de robustesse β > 0
        allow_short_supply: Arrêter une phase quand A \\ F est vide au lieu de lever
        robust_verified: L'appelant a établi la β-robustesse de (X, Y)

    Returns:
        RobustContainerResult avec F ⊆ A et A ∩ Q = ∅

    Raises:
        PreconditionViolated: Si β <= 0 ou A ⊄ X
        InsufficientFingerprintSupply: Si |A| < 2⌈√(|X|/β)⌉
    """
    b = as_fraction(beta)
    if b <= 0:
        raise PreconditionViolated(f"β={b} doit être > 0", {"beta": str(b)})
    if not A.issubset(X):
        raise PreconditionViolated("A ⊄ X")
    if not X:
        raise PreconditionViolated("X est vide")

    with LogContext(logger, "robust_pair_container", size=len(X), beta=b):
        result = _run_robust(A, X, Y, b, allow_short_supply, robust_verified)
    logger.info(
        f"Conteneur robuste: cas {result.case.value}, |F|={len(result.F)}, |Q|={len(result.Q)}"
    )
    if not result.guarantees_applicable:
        logger.warning(
            f"Garantie |(F+F)∩Y| + |Q| >= β|X|/64 non applicable "
            f"(robustesse vérifiée={robust_verified}, |X|β³>16={result.size_condition})"
        )
    return result


# --- Procédure itérée ---


@dataclass(frozen=True)
class IteratedContainerState:
    """État (F_i, Q_i, Z_i) au début de l'itération i et paramètres dérivés."""

    i: int
    F: NatSet
    Q: NatSet
    Z: NatSet
    alpha: Fraction
    zeta: Fraction
    beta: Fraction
    case: str | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "i": self.i,
            "F": list(self.F.members),
            "Q": list(self.Q.members),
            "Z_size": len(self.Z),
            "alpha": str(self.alpha),
            "zeta": str(self.zeta),
            "beta": str(self.beta),
            "case": self.case,
        }


@dataclass
class IteratedContainerResult:
    F: NatSet
    Q: NatSet
    iterations: int
    states: list[IteratedContainerState]
    target_size: int
    X: Interval
    d: int
    eps: Fraction
    L: Fraction
    flags: list[str] = field(default_factory=list)

    @property
    def T(self) -> Fraction:
        return Fraction(self.X.size(), self.d)

    @property
    def size_condition(self) -> bool:
        """d >= L·T²/ε³."""
        return self.d * self.eps**3 >= self.L * self.T**2

    @property
    def guarantees_applicable(self) -> bool:
        return self.size_condition and "oversized_fingerprint" not in self.flags

    def certificate(self) -> ContainerCertificate:
        return ContainerCertificate(
            lemma="iterated",
            F=self.F,
            Q=self.Q,
            case="Terminated",
            iterations=self.iterations,
            guarantees_applicable=self.guarantees_applicable,
            trace=tuple(self.F.members),
            flags=tuple(self.flags),
            extra={
                "target_size": self.target_size,
                "d": self.d,
                "eps": str(self.eps),
                "L": str(self.L),
                "states": [s.to_json() for s in self.states],
            },
        )

    def replay(self, A_prime: NatSet) -> "IteratedContainerResult":
        return iterated_container(A_prime, self.X, self.d, self.eps, self.L)


def fingerprint_target(size: int, d: int, eps: Fraction, L: Fraction) -> int:
    """⌈L·T·√(d/ε)⌉ = ⌈√(L²T²d/ε)⌉ avec T = size/d."""
    T = Fraction(size, d)
    return ceil_sqrt(L * L * T * T * d / eps)


def iteration_guard(T: Fraction, eps: Fraction) -> int:
    """⌈2^11 ln(2T/ε)⌉ · 4."""
    return math.ceil(2**11 * math.log(2 * T / eps)) * 4


def pad_smallest(A: NatSet, F: NatSet, target: int) -> NatSet:
    """Complète F par les plus petits éléments de A \\ F jusqu'à |F| = target."""
    missing_count = target - len(F)
    if missing_count <= 0:
        return F
    extra = [a for a in A.members if a not in F][:missing_count]
    return NatSet.from_iterable(F.universe, [*F.members, *extra])


def iterated_container(
    A: NatSet, X: Interval, d: int, eps: Number, L: Number
) -> IteratedContainerResult:
    """Itère robust_pair_container sur un intervalle jusqu'à |Q| >= d/2 - εd.

    À chaque itération, α_i = (d/2 - |Q_i|)/d, ζ_i = (2|X| - d - |Z_i|)/d et
    β_i = (α_i + ζ_i)/(12T) ; la procédure robuste est appliquée à
    (X \\ Q_i, (X+X) \\ Z_i), puis F, Z = Z ∪ (F+F) et Q (union disjointe)
    sont mis à jour. F est enfin complété par les plus petits éléments de
    A \\ F jusqu'à ⌈L·T·√(d/ε)⌉.

    Args:
        A: Ensemble à encoder (A ⊆ X)
        X: Intervalle de départ, |X| = T·d avec T >= 1
        d: Nombre de sommes manquantes
        eps: Paramètre 0 < ε < 1/2
        L: Constante de taille de l'empreinte

    Returns:
        IteratedContainerResult

    Raises:
        PreconditionViolated: Paramètres hors domaine, A ⊄ X ou |(X+X) \\ (A+A)| < d
        InsufficientFingerprintSupply: Si |A| < ⌈L·T·√(d/ε)⌉
        IterationGuardTripped: Stagnation ou dépassement de la borne théorique
        InvariantViolation: Si Q_i et Q_i' se rencontrent
    """
    e, ell = as_fraction(eps), as_fraction(L)
    if d < 1 or not 0 < e < Fraction(1, 2) or ell <= 0:
        raise PreconditionViolated(
            f"Paramètres invalides d={d}, ε={e}, L={ell}", {"d": d, "eps": str(e), "L": str(ell)}
        )
    X_set = NatSet.interval(X.lo, X.hi)
    size = X.size()
    if size < d:
        raise PreconditionViolated(f"|X|={size} < d={d} (il faut T >= 1)", {"size": size, "d": d})
    if not A.issubset(X_set):
        raise PreconditionViolated("A ⊄ X")

    sums = X.sum_window()
    window = NatSet.interval(sums.lo, sums.hi)
    deficiency = len(window.difference(sumset(A)))
    if deficiency < d:
        raise PreconditionViolated(
            f"|(X+X) \\ (A+A)| = {deficiency} < d = {d}", {"deficiency": deficiency, "d": d}
        )
    target = fingerprint_target(size, d, e, ell)
    if len(A) < target:
        raise InsufficientFingerprintSupply(
            f"|A|={len(A)} < ⌈L·T·√(d/ε)⌉ = {target}", available=len(A), required=target
        )

    T = Fraction(size, d)
    guard = iteration_guard(T, e)
    stop_at = d * (Fraction(1, 2) - e)
    F = NatSet.empty(A.universe)
    Q = NatSet.empty(X_set.universe)
    Z = NatSet.empty(window.universe)
    states: list[IteratedContainerState] = []

    with LogContext(logger, "iterated_container", size=size, d=d, eps=e, L=ell):
        while len(Q) < stop_at:
            i = len(states)
            if i >= guard:
                raise IterationGuardTripped(
                    f"Plus de {guard} itérations", [s.to_json() for s in states]
                )
            alpha = (Fraction(d, 2) - len(Q)) / d
            zeta = Fraction(2 * size - d - len(Z), d)
            beta = (alpha + zeta) / (12 * T)

            sub = _run_robust(
                A, X_set.difference(Q), window.difference(Z), beta, True, False
            )
            states.append(IteratedContainerState(i, F, Q, Z, alpha, zeta, beta, sub.case.value))
            logger.debug(
                f"Itération {i}: α={float(alpha):.4f} ζ={float(zeta):.4f} β={float(beta):.5f} "
                f"cas={sub.case.value} |F'|={len(sub.F)} |Q'|={len(sub.Q)}"
            )

            if not Q.isdisjoint(sub.Q):
                raise InvariantViolation(
                    "Q_i et Q_i' se rencontrent", {"common": list(Q.intersection(sub.Q).members)}
                )
            before = len(Z) + len(Q)
            F = F.union(sub.F).restrict(A.universe)
            Z = Z.union(sumset(F)).restrict(window.universe)
            Q = Q.union(sub.Q).restrict(X_set.universe)
            if len(Z) + len(Q) == before:
                raise IterationGuardTripped(
                    f"Aucune progression à l'itération {i} (|Z| + |Q| = {before})",
                    [s.to_json() for s in states],
                )

    flags: list[str] = []
    if len(F) > target:
        flags.append("oversized_fingerprint")
        logger.warning(f"Empreinte de taille {len(F)} > cible {target}, non complétée")
    else:
        F = pad_smallest(A, F, target)

    check_structure(A, F, Q)
    result = IteratedContainerResult(F, Q, len(states), states, target, X, d, e, ell, flags)
    if not result.size_condition:
        flags.append("size_condition_failed")
        logger.warning(f"Garantie de taille non applicable : d={d} < L·T²/ε³")
    logger.info(f"Conteneur itéré: {len(states)} itérations, |F|={len(F)}, |Q|={len(Q)}")
    return result
