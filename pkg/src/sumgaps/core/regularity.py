"""Vérifications de structure des paires (X, Y).

Inégalité de Pollard, robustesse (énumération exhaustive, heuristique
adverse et certificat par intervalle), régularité et décomposition dyadique
de la fenêtre médiane. Toutes les comparaisons de seuils sont exactes
(`fractions.Fraction`).
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from ..utils.logger import get_logger
from .errors import BudgetExceeded, PreconditionViolated
from .rational import Number, as_fraction, ceil_fraction, floor_fraction
from .sets import (
    Interval,
    NatSet,
    pair_count,
    representation_counts,
    slice_size,
    window_complement,
)

logger = get_logger("sumgaps.core.regularity")

DEFAULT_ROBUST_CAP = 10**6

# Régularité vérifiée des couches dyadiques j < k (voir dyadic_partition)
DYADIC_KAPPA = Fraction(1, 9)
DYADIC_MIN_M = 11


# --- Pollard ---


@dataclass(frozen=True)
class PollardResult:
    """Résultat d'une vérification de l'inégalité de Pollard."""

    lhs: int
    rhs: Fraction
    holds: bool

    def to_json(self) -> dict[str, Any]:
        return {"lhs": self.lhs, "rhs": str(self.rhs), "holds": self.holds}


def pollard_verify(X: NatSet, Y: NatSet, eps: Number) -> PollardResult:
    """Vérifie |S(X, Ȳ)| >= ε²|X|²/2, Ȳ étant le complément de Y dans la fenêtre de X.

    Args:
        X: Ensemble de départ
        Y: Ensemble de sommes interdites
        eps: Paramètre 0 < ε < 1/2

    Returns:
        Les deux membres et le verdict

    Raises:
        PreconditionViolated: Si ε sort de ]0, 1/2[ ou si |X| < (1/2 + ε)|Y|
    """
    e = as_fraction(eps)
    if not 0 < e < Fraction(1, 2):
        raise PreconditionViolated(f"ε={e} hors de ]0, 1/2[", {"eps": str(e)})
    # |Y| = 0 : le rapport est satisfait quel que soit |X|
    if Y and len(X) < (Fraction(1, 2) + e) * len(Y):
        raise PreconditionViolated(
            f"|X|={len(X)} < (1/2 + ε)|Y| = {(Fraction(1, 2) + e) * len(Y)}",
            {"size_x": len(X), "size_y": len(Y), "eps": str(e)},
        )
    lhs = pair_count(X, window_complement(X, Y)) if X else 0
    rhs = e * e * len(X) ** 2 / 2
    return PollardResult(lhs, rhs, lhs >= rhs)


def pollard_size_condition(size: int, eps: Number) -> bool:
    """Taille à partir de laquelle l'inégalité de Pollard est démontrée pour des entiers.

    La forme entière Σ_s min(t, r(s)) >= t(2|X| - t), avec t entier le plus
    proche de c/2 où c = 4ε|X|/(1 + 2ε), donne au moins
    (c²/4 - 1/4)/2 paires x <= x' de somme hors de Y. Cela dépasse
    ε²|X|²/2 dès que 4ε²|X|²(4 - (1 + 2ε)²) >= (1 + 2ε)². En dessous
    (X = {1}, Y = {2} par exemple) l'inégalité peut échouer.
    """
    e = as_fraction(eps)
    spread = (1 + 2 * e) ** 2
    return 4 * e * e * size * size * (4 - spread) >= spread


def pollard_sumset_check(A: NatSet, B: NatSet, beta: Number) -> PollardResult:
    """Instance de Pollard utilisée dans la preuve du certificat : ε = 2β, |A| >= (1/2 + 2β)|B|."""
    return pollard_verify(A, B, 2 * as_fraction(beta))


# --- Robustesse ---


@dataclass(frozen=True)
class RobustnessResult:
    """Verdict de robustesse d'une paire (X, Y).

    `verdict` vaut "robust" ou "not_robust" en mode exhaustif, "falsified"
    ou "not_falsified" en mode heuristique. Un témoin (R_X, R_Y) accompagne
    tout verdict négatif.
    """

    verdict: str
    mode: str
    beta: Fraction
    removal_size: int
    required: Fraction
    witness: tuple[NatSet, NatSet] | None = None
    witness_count: int | None = None
    checked: int = 0

    @property
    def robust(self) -> bool | None:
        """True/False en mode exhaustif, None si seule l'heuristique a tourné sans réfuter."""
        if self.verdict == "robust":
            return True
        if self.verdict in ("not_robust", "falsified"):
            return False
        return None

    def to_json(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "verdict": self.verdict,
            "mode": self.mode,
            "beta": str(self.beta),
            "removal_size": self.removal_size,
            "required": str(self.required),
            "checked": self.checked,
        }
        if self.witness is not None:
            data["witness"] = {
                "R_X": list(self.witness[0].members),
                "R_Y": list(self.witness[1].members),
                "pair_count": self.witness_count,
            }
        return data


def removal_size(X: NatSet, beta: Number) -> int:
    """Taille maximale ⌊β|X|⌋ des familles retirées."""
    return floor_fraction(as_fraction(beta) * len(X))


def _target_counts(X: NatSet, Y: NatSet) -> tuple[list[int], list[int]]:
    """Éléments de Y dans la fenêtre de X et leur nombre de représentations."""
    if not X or not Y:
        return [], []
    window = X.universe.sum_window()
    if not window.overlaps(Y.universe):
        return [], []
    counts = representation_counts(X)
    targets = Y.restrict(window)
    ys = list(targets.members)
    offsets = np.fromiter((y - window.lo for y in ys), dtype=np.int64, count=len(ys))
    return ys, counts[offsets].tolist()


def _worst_columns(ys: list[int], reps: list[int], k: int) -> tuple[list[int], int]:
    """Les k éléments de Y les plus représentés (plus petits d'abord à égalité) et leur poids."""
    order = sorted(range(len(ys)), key=lambda i: (-reps[i], ys[i]))[:k]
    return sorted(ys[i] for i in order), sum(reps[i] for i in order)


def robust_bruteforce(
    X: NatSet, Y: NatSet, beta: Number, cap: int = DEFAULT_ROBUST_CAP
) -> RobustnessResult:
    """Décide exactement si (X, Y) est β-robuste.

    Le nombre de paires restantes décroît quand on retire davantage
    d'éléments : il suffit d'examiner les familles R_X de taille maximale
    k = min(⌊β|X|⌋, |X|), dans l'ordre lexicographique. Pour R_X fixé, le
    pire R_Y retire les k sommes les plus représentées dans X \\ R_X.

    Args:
        X: Ensemble de départ
        Y: Ensemble cible
        beta: Paramètre β >= 0
        cap: Nombre maximal de familles R_X énumérées

    Returns:
        RobustnessResult en mode "exhaustive"

    Raises:
        BudgetExceeded: Si C(|X|, k) dépasse cap
    """
    b = as_fraction(beta)
    required = b * b * len(X) ** 2
    k = removal_size(X, b)
    empty_x = NatSet.empty(X.universe)
    empty_y = NatSet.empty(Y.universe)

    base = pair_count(X, Y)
    if base < required:
        return RobustnessResult(
            "not_robust", "exhaustive", b, k, required, (empty_x, empty_y), base, 1
        )
    if k == 0:
        return RobustnessResult("robust", "exhaustive", b, k, required, checked=1)

    kx = min(k, len(X))
    ky = min(k, len(Y))
    families = math.comb(len(X), kx)
    if families > cap:
        raise BudgetExceeded(
            f"Énumération de {families} familles R_X au-delà du budget {cap}",
            required=families,
            cap=cap,
        )

    checked = 1
    for removed in itertools.combinations(X.members, kx):
        checked += 1
        rest = X.difference(NatSet.from_iterable(X.universe, removed))
        ys, reps = _target_counts(rest, Y)
        worst_y, weight = _worst_columns(ys, reps, ky)
        count = sum(reps) - weight
        if count < required:
            witness = (
                NatSet.from_iterable(X.universe, removed),
                NatSet.from_iterable(Y.universe, worst_y),
            )
            logger.debug(f"Robustesse réfutée: R_X={removed} R_Y={worst_y} ({count} < {required})")
            return RobustnessResult(
                "not_robust", "exhaustive", b, k, required, witness, count, checked
            )
    return RobustnessResult("robust", "exhaustive", b, k, required, checked=checked)


def robust_adversarial(X: NatSet, Y: NatSet, beta: Number) -> RobustnessResult:
    """Heuristique gloutonne : retire les éléments de plus haut degré de chaque côté.

    Un verdict "falsified" est un certificat de non-robustesse ;
    "not_falsified" ne prouve rien.
    """
    b = as_fraction(beta)
    required = b * b * len(X) ** 2
    k = removal_size(X, b)
    kx = min(k, len(X))
    ky = min(k, len(Y))

    degrees = sorted(X.members, key=lambda x: (-slice_size(x, X, Y), x))
    removed_x = NatSet.from_iterable(X.universe, degrees[:kx])
    rest = X.difference(removed_x)
    ys, reps = _target_counts(rest, Y)
    worst_y, weight = _worst_columns(ys, reps, ky)
    count = sum(reps) - weight
    if count < required:
        witness = (removed_x, NatSet.from_iterable(Y.universe, worst_y))
        return RobustnessResult("falsified", "adversarial", b, k, required, witness, count, 1)
    return RobustnessResult("not_falsified", "adversarial", b, k, required, checked=1)


def robustness(
    X: NatSet, Y: NatSet, beta: Number, cap: int = DEFAULT_ROBUST_CAP
) -> RobustnessResult:
    """Mode exhaustif, repli sur l'heuristique adverse au-delà du budget."""
    try:
        return robust_bruteforce(X, Y, beta, cap)
    except BudgetExceeded as e:
        logger.info(f"Budget de robustesse dépassé ({e.required} > {e.cap}), mode adverse")
        return robust_adversarial(X, Y, beta)


# --- Certificat par intervalle ---


@dataclass(frozen=True)
class RobustnessCertificate:
    """β = (α + ζ)/(12T) certifié pour (X \\ Q, (X+X) \\ Z)."""

    beta: Fraction
    alpha: Fraction
    zeta: Fraction
    T: Fraction
    d: int

    def to_json(self) -> dict[str, Any]:
        return {k: str(v) for k, v in self.__dict__.items()}


def robustness_certificate(T: Number, d: int, alpha: Number, zeta: Number) -> RobustnessCertificate:
    """Construit le certificat de robustesse d'un intervalle.

    Si X est un intervalle de taille Td, Q ⊆ X avec |Q| = d/2 - αd et
    Z ⊆ X+X avec |Z| = 2|X| - d - ζd, alors (X \\ Q, (X+X) \\ Z) est
    β-robuste pour le β renvoyé (voir robustness_hypotheses pour la
    condition entière supplémentaire).

    Raises:
        PreconditionViolated: Si α, ζ, T ou d sortent de leur domaine
    """
    t, a, z = as_fraction(T), as_fraction(alpha), as_fraction(zeta)
    problems = []
    if not 0 < a <= Fraction(1, 2):
        problems.append(f"α={a} hors de ]0, 1/2]")
    if not 0 <= z <= 2 * t:
        problems.append(f"ζ={z} hors de [0, 2T]")
    if t < 1:
        problems.append(f"T={t} < 1")
    if d < 1:
        problems.append(f"d={d} < 1")
    if problems:
        raise PreconditionViolated("; ".join(problems), {"T": str(t), "alpha": str(a), "zeta": str(z), "d": d})
    return RobustnessCertificate((a + z) / (12 * t), a, z, t, d)


@dataclass
class HypothesesReport:
    """Hypothèses du certificat évaluées sur un triplet (X, Q, Z) concret."""

    holds: bool
    alpha: Fraction
    zeta: Fraction
    T: Fraction
    details: list[str] = field(default_factory=list)
    certificate: RobustnessCertificate | None = None


def robustness_hypotheses(X: NatSet, Q: NatSet, Z: NatSet, d: int) -> HypothesesReport:
    """Évalue les hypothèses du certificat sur (X, Q, Z).

    α et ζ sont déduits des tailles : α = (d/2 - |Q|)/d et
    ζ = (2|X| - d - |Z|)/d. En plus des bornes du certificat, on exige
    (2α + ζ)d >= 2 : en dessous, X \\ Q peut être une progression dont
    toutes les sommes tombent dans Z alors que β²|X \\ Q|² > 0.
    """
    if d < 1:
        raise PreconditionViolated(f"d={d} < 1", {"d": d})
    size = len(X)
    T = Fraction(size, d)
    alpha = (Fraction(d, 2) - len(Q)) / d
    zeta = Fraction(2 * size - d - len(Z), d)
    details: list[str] = []

    members = X.members
    if not members or members[-1] - members[0] + 1 != size:
        details.append("X n'est pas un intervalle")
    if not Q.issubset(X):
        details.append("Q ⊄ X")
    if members and not Z.issubset(NatSet.interval(2 * members[0], 2 * members[-1])):
        details.append("Z ⊄ X+X")
    if T < 1:
        details.append(f"T={T} < 1")
    if not 0 < alpha <= Fraction(1, 2):
        details.append(f"α={alpha} hors de ]0, 1/2]")
    if not 0 <= zeta <= 2 * T:
        details.append(f"ζ={zeta} hors de [0, 2T]")
    if (2 * alpha + zeta) * d < 2:
        details.append(f"(2α + ζ)d = {(2 * alpha + zeta) * d} < 2")

    certificate = None
    if not details:
        certificate = robustness_certificate(T, d, alpha, zeta)
    return HypothesesReport(not details, alpha, zeta, T, details, certificate)


# --- Régularité ---


@dataclass(frozen=True)
class RegularityResult:
    """min_ratio vaut None pour Y vide (convention ∞)."""

    holds: bool
    min_ratio: Fraction | None
    argmin: int | None

    def to_json(self) -> dict[str, Any]:
        return {
            "holds": self.holds,
            "min_ratio": None if self.min_ratio is None else str(self.min_ratio),
            "argmin": self.argmin,
        }


def regular_verify(X: NatSet, Y: NatSet, kappa: Number) -> RegularityResult:
    """Vérifie |S(X, {y})| >= κ|X| pour tout y de Y.

    Args:
        X: Ensemble de départ
        Y: Ensemble cible
        kappa: Paramètre κ

    Returns:
        Verdict, rapport minimal et plus petit y qui l'atteint
    """
    k = as_fraction(kappa)
    if not Y:
        return RegularityResult(True, None, None)
    if not X:
        # κ|X| = 0 : tout y a assez de représentations
        return RegularityResult(True, None, None)

    window = X.universe.sum_window()
    counts = representation_counts(X)
    ys = np.array(Y.members, dtype=np.int64)
    inside = (ys >= window.lo) & (ys <= window.hi)
    reps = np.zeros(ys.shape, dtype=np.int64)
    reps[inside] = counts[ys[inside] - window.lo]
    position = int(np.argmin(reps))  # premier minimum = plus petit y
    min_ratio = Fraction(int(reps[position]), len(X))
    return RegularityResult(min_ratio >= k, min_ratio, int(ys[position]))


# --- Décomposition dyadique ---


@dataclass(frozen=True)
class DyadicLayer:
    """Couche j de la décomposition : (X_j, Y_j) et son déficit cible d_j."""

    j: int
    X: NatSet
    Y: NatSet
    d: int
    top: bool = False


def floor_log2(value: Fraction) -> int:
    """⌊log2(value)⌋ exact pour value > 0."""
    t = value.numerator.bit_length() - value.denominator.bit_length()
    while Fraction(2) ** t > value:
        t -= 1
    while Fraction(2) ** (t + 1) <= value:
        t += 1
    return t


def _ranges(universe: Interval, *bounds: tuple[int, int]) -> NatSet:
    """Union de plages entières [a, b] (vides si a > b), tronquées à l'univers."""
    bits = 0
    for a, b in bounds:
        a, b = max(a, universe.lo), min(b, universe.hi)
        if a <= b:
            bits |= ((1 << (b - a + 1)) - 1) << (a - universe.lo)
    return NatSet(universe, bits)


def layer_demand(d: int, j: int) -> int:
    """d_j = max(⌈d/2^{j+2}⌉, ⌈d/(2 log2 d)⌉)."""
    return max(ceil_fraction(Fraction(d, 2 ** (j + 2))), math.ceil(d / (2 * math.log2(d))))


def partition_target(n: int, M: int, p: Number) -> NatSet:
    """Région [M, 2M/p] ∪ [2n - 2M/p, 2n - M] partitionnée par les couches."""
    q = as_fraction(p)
    reach = 2 * M / q
    return _ranges(
        Interval(1, 2 * n),
        (M, floor_fraction(reach)),
        (ceil_fraction(2 * n - reach), 2 * n - M),
    )


def dyadic_partition(n: int, M: int, p: Number, d: int) -> list[DyadicLayer]:
    """Découpe la fenêtre médiane en couches dyadiques régulières.

    Pour j < k : Y_j = [2^j M, 2^{j+1} M) ∪ (2n - 2^{j+1} M, 2n - 2^j M] et
    X_j = [1, 2^{j+1} M] ∪ [n - 2^{j+1} M, n]. Si 2M/p < n, la couche k est
    tronquée à [2^k M, 2M/p] ∪ [2n - 2M/p, 2n - 2^k M] avec
    X_k = [1, M/p] ∪ [n - M/p, n] ; sinon elle fusionne le milieu
    [2^k M, 2n - 2^k M] avec X_k = [1, n].

    Args:
        n: Taille de l'univers [1, n]
        M: Seuil bas de la fenêtre
        p: Probabilité 0 < p <= 1/2
        d: Déficit visé (d >= 4)

    Returns:
        Couches j = 0..k

    Raises:
        PreconditionViolated: Si M >= n, d < 4 ou p hors de ]0, 1/2]
    """
    q = as_fraction(p)
    if M < 1 or M >= n:
        raise PreconditionViolated(f"Il faut 1 <= M < n (M={M}, n={n})", {"M": M, "n": n})
    if d < 4:
        raise PreconditionViolated(f"d={d} < 4 : log d dégénère", {"d": d})
    if not 0 < q <= Fraction(1, 2):
        raise PreconditionViolated(f"p={q} hors de ]0, 1/2]", {"p": str(q)})

    levels = floor_log2(2 / q)
    x_universe = Interval(1, n)
    y_universe = Interval(1, 2 * n)
    truncated = 2 * M / q < n
    if truncated:
        k = levels - 1
    else:
        k = 0
        while 2 ** (k + 2) * M <= n:
            k += 1
        k = max(0, min(k, levels - 1))

    layers = []
    for j in range(k):
        low, high = 2**j * M, 2 ** (j + 1) * M
        Y_j = _ranges(y_universe, (low, high - 1), (2 * n - high + 1, 2 * n - low))
        X_j = _ranges(x_universe, (1, high), (n - high, n))
        layers.append(DyadicLayer(j, X_j, Y_j, layer_demand(d, j)))

    low = 2**k * M
    if truncated:
        reach = 2 * M / q
        Y_k = _ranges(
            y_universe, (low, floor_fraction(reach)), (ceil_fraction(2 * n - reach), 2 * n - low)
        )
        half = floor_fraction(M / q)
        X_k = _ranges(x_universe, (1, half), (n - half, n))
    else:
        Y_k = _ranges(y_universe, (low, 2 * n - low))
        X_k = NatSet.interval(1, n)
    layers.append(DyadicLayer(k, X_k, Y_k, layer_demand(d, k), top=True))

    logger.debug(f"Décomposition dyadique n={n} M={M} p={q}: k={k} ({'tronquée' if truncated else 'fusionnée'})")
    return layers


@dataclass(frozen=True)
class PartitionCheck:
    exact: bool
    disjoint: bool
    covers: bool
    k: int
    k_below_log_d: bool


def verify_partition(layers: list[DyadicLayer], n: int, M: int, p: Number, d: int) -> PartitionCheck:
    """Vérifie que les Y_j sont disjoints et recouvrent exactement la région cible."""
    target = partition_target(n, M, p)
    seen = NatSet.empty(target.universe)
    disjoint = True
    for layer in layers:
        if not seen.isdisjoint(layer.Y):
            disjoint = False
        seen = seen.union(layer.Y)
    covers = seen == target
    k = layers[-1].j
    return PartitionCheck(disjoint and covers, disjoint, covers, k, k < math.log2(d))
