"""Conteneur en trois phases pour les paires régulières."""

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from ..core.errors import BudgetExceeded, InsufficientFingerprintSupply, PreconditionViolated
from ..core.rational import Number, as_fraction, ceil_log2_sqrt, ceil_sqrt
from ..core.regularity import regular_verify
from ..core.sets import NatSet, slice_set, slice_size, sumset
from ..utils.logger import LogContext, get_logger
from .book import PairBook
from .certificate import ContainerCertificate, check_structure
from .robust import greedy_pick

logger = get_logger("sumgaps.containers.regular")

DEFAULT_PHASE1_CAP = 2 * 10**6


class Phase1Mode(Enum):
    """Recherche de F' en phase I."""

    EXACT = "exact"  # ordre canonique (taille, lexicographique), déterministe
    GREEDY = "greedy"  # heuristique, sans garantie


class RegularCase(Enum):
    SPARSE_B = "SparseB"
    DENSE_B = "DenseB"


@dataclass(frozen=True)
class Phase1Result:
    F0: NatSet
    Y0: NatSet
    rounds: tuple[tuple[int, ...], ...]
    mode: Phase1Mode
    examined: int


def _coverage(members: tuple[int, ...], targets: int) -> int:
    """|(F' + F') ∩ Y_0|, `targets` étant le masque absolu de Y_0 (bit y)."""
    base = 0
    for a in members:
        base |= 1 << a
    sums = 0
    for a in members:
        sums |= base << a
    return (sums & targets).bit_count()


def _absolute_bits(Y: NatSet) -> int:
    return Y.bits << Y.universe.lo


def strip_size(x_size: int) -> int:
    """Taille maximale 2⌈√|X|⌉ des ensembles F' de la phase I."""
    return 2 * ceil_sqrt(Fraction(x_size))


def _exact_candidate(
    pool: tuple[int, ...], targets: int, need: Fraction, smax: int, size_cap: int
) -> tuple[tuple[int, ...] | None, int]:
    """Premier F' non vide, dans l'ordre (taille, lexicographique), couvrant au moins `need`."""
    top = min(smax, len(pool))
    # La couverture croît avec F' : si |A| <= smax, A lui-même décide de l'existence
    if len(pool) <= smax and _coverage(pool, targets) < need:
        return None, 1
    if len(pool) > smax:
        space = sum(math.comb(len(pool), s) for s in range(1, top + 1))
        if space > size_cap:
            raise BudgetExceeded(
                f"Espace de recherche de la phase I ({space}) au-delà du budget {size_cap}",
                required=space,
                cap=size_cap,
            )
    examined = 0
    for s in range(1, top + 1):
        for candidate in itertools.combinations(pool, s):
            examined += 1
            if examined > size_cap:
                raise BudgetExceeded(
                    f"Phase I : plus de {size_cap} candidats examinés",
                    required=examined,
                    cap=size_cap,
                )
            if _coverage(candidate, targets) >= need:
                return candidate, examined
    return None, examined


def _greedy_candidate(
    pool: tuple[int, ...], targets: int, need: Fraction, smax: int
) -> tuple[tuple[int, ...] | None, int]:
    """F' construit par ajouts successifs de l'élément qui couvre le plus de nouvelles sommes."""
    chosen: list[int] = []
    examined = 0
    while len(chosen) < min(smax, len(pool)):
        rest = [a for a in pool if a not in chosen]
        examined += len(rest)
        best = greedy_pick(rest, lambda a: _coverage(tuple(chosen) + (a,), targets))
        chosen.append(best)
        if _coverage(tuple(chosen), targets) >= need:
            return tuple(sorted(chosen)), examined
    return None, examined


def phase1_strip(
    A: NatSet,
    Y: NatSet,
    kappa: Number,
    mode: Phase1Mode = Phase1Mode.EXACT,
    size_cap: int = DEFAULT_PHASE1_CAP,
    *,
    x_size: int,
) -> Phase1Result:
    """Retire de Y les sommes des petits F' ⊆ A qui couvrent une fraction κ/16 de Y_0.

    Tant qu'il existe F' ⊆ A, |F'| <= 2⌈√|X|⌉, avec
    |(F' + F') ∩ Y_0| >= κ|Y_0|/16, on prend le premier dans l'ordre
    (taille croissante, puis lexicographique), F_0 := F_0 ∪ F' et
    Y_0 := Y_0 \\ (F_0 + F_0).

    Args:
        A: Ensemble source des F'
        Y: Ensemble cible initial
        kappa: Paramètre de régularité
        mode: EXACT (déterministe) ou GREEDY (sans garantie)
        size_cap: Budget de candidats en mode EXACT
        x_size: |X|, qui fixe la taille maximale des F'

    Returns:
        Phase1Result

    Raises:
        BudgetExceeded: Si la recherche exacte dépasse size_cap
    """
    k = as_fraction(kappa)
    smax = strip_size(x_size)
    pool = A.members
    F0 = NatSet.empty(A.universe)
    Y0 = Y
    rounds: list[tuple[int, ...]] = []
    examined = 0

    while Y0:
        need = k * len(Y0) / 16
        targets = _absolute_bits(Y0)
        if mode is Phase1Mode.EXACT:
            found, cost = _exact_candidate(pool, targets, need, smax, size_cap)
        else:
            found, cost = _greedy_candidate(pool, targets, need, smax)
        examined += cost
        if found is None:
            break
        rounds.append(found)
        F0 = NatSet.from_iterable(A.universe, sorted(set(F0.members) | set(found)))
        Y0 = Y0.difference(sumset(F0))
        logger.debug(f"Phase I, tour {len(rounds)}: F'={found}, |Y_0|={len(Y0)}")

    return Phase1Result(F0, Y0, tuple(rounds), mode, examined)


@dataclass
class RegularContainerResult:
    F: NatSet
    F0: NatSet
    Q: NatSet
    case: RegularCase
    Y0: NatSet
    X0: NatSet
    X_hat: NatSet
    book: PairBook
    phase1: Phase1Result
    trace: tuple[int, ...]
    steps: int
    target_size: int
    X: NatSet
    Y: NatSet
    kappa: Fraction
    d: int
    L: Fraction
    flags: list[str] = field(default_factory=list)
    conditions: dict[str, bool] = field(default_factory=dict)

    @property
    def phase1_mode(self) -> Phase1Mode:
        return self.phase1.mode

    @property
    def guarantees_applicable(self) -> bool:
        return bool(self.conditions) and all(self.conditions.values())

    @property
    def guaranteed_value(self) -> Fraction:
        """κ|X|/64."""
        return self.kappa * len(self.X) / 64

    def certificate(self) -> ContainerCertificate:
        return ContainerCertificate(
            lemma="regular",
            F=self.F,
            Q=self.Q,
            case=self.case.value,
            iterations=len(self.phase1.rounds),
            guarantees_applicable=self.guarantees_applicable,
            trace=self.trace,
            flags=tuple(self.flags),
            extra={
                "phase1_mode": self.phase1.mode.value,
                "F0": list(self.F0.members),
                "Y0_size": len(self.Y0),
                "X_hat": list(self.X_hat.members),
                "target_size": self.target_size,
                "book": self.book.to_json(),
                "conditions": dict(self.conditions),
            },
        )

    def replay(self, A_prime: NatSet, size_cap: int = DEFAULT_PHASE1_CAP) -> "RegularContainerResult":
        return regular_container(
            A_prime, self.X, self.Y, self.kappa, self.d, self.L, self.phase1.mode, size_cap
        )


def regular_target(x_size: int, y_size: int, d: int, L: Fraction) -> int:
    """⌈L · log2(|Y|/d) · √|X|⌉, pour |Y| >= d."""
    return ceil_log2_sqrt(L, Fraction(y_size, d), x_size)


def regular_container(
    A: NatSet,
    X: NatSet,
    Y: NatSet,
    kappa: Number,
    d: int,
    L: Number,
    mode: Phase1Mode = Phase1Mode.EXACT,
    size_cap: int = DEFAULT_PHASE1_CAP,
) -> RegularContainerResult:
    """Procédure en trois phases pour une paire (X, Y) κ-régulière.

    Phase I : phase1_strip, puis X_0 = X \\ F_0. Phase II : ⌈√|X_0|⌉ pas
    gloutons maximisant |S_a(X_0 \\ X̂, Y_0)|, X̂ regroupant les lignes de
    B qui atteignent |Y_0|/√|X_0|. Si |B| < κ√|X_0||Y_0|/4, Q regroupe les
    x ∈ X_0 \\ F de tranche >= κ|Y_0|/4. Sinon la phase III ajoute ⌈√|X_0|⌉
    éléments maximisant |B(a,*) \\ B(F,*)| et Q regroupe les lignes de B'
    de taille >= κ|Y_0|/(16√|X_0|). F_0 ∪ F est enfin complété jusqu'à
    ⌈L·log2(|Y|/d)·√|X|⌉.

    Raises:
        PreconditionViolated: Paramètres hors domaine, A ⊄ X, |Y| < 2d ou |Y \\ (A+A)| < d
        InsufficientFingerprintSupply: Si |A| est sous la taille cible
        BudgetExceeded: Propagée depuis la phase I exacte
    """
    k, ell = as_fraction(kappa), as_fraction(L)
    if not 0 < k <= 1 or ell <= 0 or d < 1:
        raise PreconditionViolated(
            f"Paramètres invalides κ={k}, L={ell}, d={d}", {"kappa": str(k), "L": str(ell), "d": d}
        )
    if not A.issubset(X):
        raise PreconditionViolated("A ⊄ X")
    if len(Y) < 2 * d:
        raise PreconditionViolated(f"|Y|={len(Y)} < 2d={2 * d}", {"size_y": len(Y), "d": d})
    deficiency = len(Y.difference(sumset(A)))
    if deficiency < d:
        raise PreconditionViolated(
            f"|Y \\ (A+A)| = {deficiency} < d = {d}", {"deficiency": deficiency, "d": d}
        )
    target = regular_target(len(X), len(Y), d, ell)
    if len(A) < target:
        raise InsufficientFingerprintSupply(
            f"|A|={len(A)} < ⌈L·log(|Y|/d)·√|X|⌉ = {target}", available=len(A), required=target
        )

    flags: list[str] = []
    with LogContext(logger, "regular_container", size=len(X), kappa=k, d=d, mode=mode.value):
        phase1 = phase1_strip(A, Y, k, mode, size_cap, x_size=len(X))
        F0, Y0 = phase1.F0, phase1.Y0
        X0 = X.difference(F0)
        steps = ceil_sqrt(Fraction(len(X0)))
        used = set(F0.members)
        trace: list[int] = []
        book = PairBook()
        X_hat = NatSet.empty(X.universe)
        y0_sq = len(Y0) ** 2

        # Phase II
        for _ in range(steps):
            candidates = [a for a in A.members if a not in used]
            if not candidates:
                flags.append("short_supply")
                break
            X_live = X0.difference(X_hat)
            a = greedy_pick(candidates, lambda c: slice_size(c, X_live, Y0))
            trace.append(a)
            used.add(a)
            for x in slice_set(a, X_live, Y0):
                book.add(x, a + x)
            X_hat = NatSet.from_iterable(
                X.universe, (x for x, c in book.row_sizes().items() if c * c * len(X0) >= y0_sq)
            )
        logger.debug(f"Phase II: {len(trace)} pas, |B|={len(book)}, |X̂|={len(X_hat)}")

        in_phase2 = set(trace)
        if (4 * len(book)) ** 2 < k * k * len(X0) * y0_sq:
            case = RegularCase.SPARSE_B
            X_live = X0.difference(X_hat)
            Q = NatSet.from_iterable(
                X.universe,
                (
                    x
                    for x in X0.members
                    if x not in in_phase2 and 4 * slice_size(x, X_live, Y0) >= k * len(Y0)
                ),
            )
        else:
            case = RegularCase.DENSE_B
            # Phase III
            for _ in range(steps):
                candidates = [a for a in A.members if a not in used]
                if not candidates:
                    if "short_supply" not in flags:
                        flags.append("short_supply")
                    break
                covered = book.rows_union(trace)
                a = greedy_pick(candidates, lambda c: len(book.row(c) - covered))
                trace.append(a)
                used.add(a)
            covered = book.rows_union(trace)
            if 16 * len(covered) >= k * len(Y0):
                # possible seulement si la phase I n'a pas été exhaustive
                flags.append("phase1_bound_failed")
                Q = NatSet.empty(X.universe)
            else:
                pruned = book.without_columns(covered)
                Q = NatSet.from_iterable(
                    X.universe,
                    (
                        x
                        for x, c in pruned.row_sizes().items()
                        if (16 * c) ** 2 * len(X0) >= k * k * y0_sq
                    ),
                )

    fingerprint = NatSet.from_iterable(A.universe, sorted(set(F0.members) | set(trace)))
    if len(fingerprint) > target:
        flags.append("oversized_fingerprint")
        F = fingerprint
    else:
        extra = [a for a in A.members if a not in fingerprint][: target - len(fingerprint)]
        F = NatSet.from_iterable(A.universe, [*fingerprint.members, *extra])

    book.check()
    check_structure(A, F, Q)
    result = RegularContainerResult(
        F, F0, Q, case, Y0, X0, X_hat, book, phase1, tuple(trace), steps, target,
        X, Y, k, d, ell, flags,
    )
    result.conditions = guarantee_conditions(result, A)
    logger.info(
        f"Conteneur régulier: cas {case.value}, |F|={len(F)}, |F_0|={len(F0)}, |Q|={len(Q)}"
    )
    if not result.guarantees_applicable:
        failed = [name for name, ok in result.conditions.items() if not ok]
        logger.warning(f"Garantie |Q| >= κ|X|/64 non applicable: {', '.join(failed)}")
    return result


def guarantee_conditions(result: RegularContainerResult, A: NatSet) -> dict[str, bool]:
    """Hypothèses vérifiables sous lesquelles |Q| >= κ|X|/64 est démontré.

    Outre les hypothèses d'entrée, la preuve utilise |F_0| <= |X|/2,
    la (3κ/4)-régularité de (X_0, Y_0), ⌈√|X_0|⌉ <= κ|X_0|/8,
    |Y_0| >= √|X_0| et |X| >= L, toutes mesurées ici.
    """
    k, X, Y, d = result.kappa, result.X, result.Y, result.d
    x0 = len(result.X0)
    return {
        "exact_phase1": result.phase1.mode is Phase1Mode.EXACT,
        "full_supply": "short_supply" not in result.flags and "oversized_fingerprint" not in result.flags,
        "regular_input": regular_verify(X, Y, k).holds,
        "d_range": 4 * len(X) <= d * d and 2 * d <= len(Y),
        "deficiency": len(Y.difference(sumset(A))) >= d,
        "strip_small": 2 * x0 >= len(X),
        "regular_residual": regular_verify(result.X0, result.Y0, 3 * k / 4).holds,
        "steps_small": 8 * ceil_sqrt(Fraction(x0)) <= k * x0,
        "rows_capped": len(result.Y0) ** 2 >= x0,
        "x_at_least_L": len(X) >= result.L,
    }
