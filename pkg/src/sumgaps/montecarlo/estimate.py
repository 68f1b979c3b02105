"""Estimation Monte Carlo des probabilités bornées par l'audit.

L'essai t utilise le flux t du générateur à compteur : ses uniformes ne
dépendent que de (graine, t). Les essais sont découpés en plages d'indices
fixes, éventuellement réparties sur plusieurs processus, puis concaténés
dans l'ordre des plages ; le résultat ne dépend donc pas du nombre de
processus.
"""

import math
import multiprocessing
from collections import Counter
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import partial
from typing import Any, TypeVar

import numpy as np
from scipy.stats import beta

from ..audit.bounds import bound_main, truncation_bound
from ..audit.logreal import LogReal
from ..config.schema import AuditConfig
from ..core.errors import BudgetExceeded, PreconditionViolated
from ..core.rational import as_fraction
from ..core.sampling import MAX_SEED, element_uniforms
from ..core.sets import Interval, NatSet, sumset
from ..utils.logger import LogContext, get_logger

logger = get_logger("sumgaps.montecarlo")

Outcome = TypeVar("Outcome")

# Au-delà, l'énumération exhaustive d'un événement ponctuel est refusée
EXHAUSTIVE_MAX_ELEMENTS = 24

# Plages d'essais par processus
CHUNKS_PER_WORKER = 4

# Plus petite borne comparée à un IC empirique
RESOLVABLE_FLOOR = 1e-3


@dataclass(frozen=True)
class TailEstimate:
    """Fréquence empirique avec son intervalle de Clopper-Pearson."""

    events: int
    trials: int
    p_hat: Fraction
    ci_low: float
    ci_high: float
    confidence: float = 0.95
    seed: int = 0
    flags: tuple[str, ...] = ()

    @classmethod
    def from_counts(
        cls,
        events: int,
        trials: int,
        confidence: float = 0.95,
        seed: int = 0,
        flags: Sequence[str] = (),
    ) -> "TailEstimate":
        low, high = clopper_pearson(events, trials, confidence)
        return cls(events, trials, Fraction(events, trials), low, high, confidence, seed, tuple(flags))

    def covers(self, value: float) -> bool:
        """value ∈ [ci_low, ci_high]."""
        return self.ci_low <= value <= self.ci_high

    def to_json(self) -> dict[str, Any]:
        return {
            "events": self.events,
            "trials": self.trials,
            "p_hat": float(self.p_hat),
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "confidence": self.confidence,
            "seed": self.seed,
            "flags": list(self.flags),
        }


def clopper_pearson(events: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Intervalle binomial exact (quantiles de lois bêta).

    Raises:
        PreconditionViolated: Si trials < 1, events ∉ [0, trials] ou confidence ∉ ]0, 1[
    """
    if trials < 1 or not 0 <= events <= trials:
        raise PreconditionViolated(
            "Comptage invalide", {"events": events, "trials": trials}
        )
    if not 0.0 < confidence < 1.0:
        raise PreconditionViolated(f"Confiance {confidence} hors de ]0, 1[")
    alpha = 1.0 - confidence
    p_hat = events / trials
    low = 0.0 if events == 0 else float(beta.ppf(alpha / 2, events, trials - events + 1))
    high = 1.0 if events == trials else float(beta.ppf(1 - alpha / 2, events + 1, trials - events))
    return min(low, p_hat), max(high, p_hat)


# --- Exécution des essais ---


def _run_range(kernel: Callable[[int], Outcome], start: int, stop: int) -> list[Outcome]:
    return [kernel(t) for t in range(start, stop)]


def trial_ranges(trials: int, workers: int) -> list[tuple[int, int]]:
    """Découpage [0, trials) en plages contiguës pour `workers` processus."""
    if workers <= 1:
        return [(0, trials)]
    size = max(1, math.ceil(trials / (workers * CHUNKS_PER_WORKER)))
    return [(start, min(start + size, trials)) for start in range(0, trials, size)]


def run_trials(kernel: Callable[[int], Outcome], trials: int, workers: int = 1) -> list[Outcome]:
    """Applique `kernel` aux indices 0..trials-1, en parallèle si workers > 1.

    Args:
        kernel: Fonction picklable d'un indice d'essai (fonction de module ou partial)
        trials: Nombre d'essais
        workers: Nombre de processus

    Returns:
        Résultats dans l'ordre des indices

    Raises:
        PreconditionViolated: Si trials < 1 ou workers < 1
    """
    if trials < 1:
        raise PreconditionViolated(f"Nombre d'essais {trials} < 1", {"trials": trials})
    if workers < 1:
        raise PreconditionViolated(f"Nombre de processus {workers} < 1", {"workers": workers})
    ranges = trial_ranges(trials, workers)
    if len(ranges) == 1:
        return _run_range(kernel, 0, trials)
    with multiprocessing.Pool(workers) as pool:
        parts = pool.starmap(_run_range, [(kernel, start, stop) for start, stop in ranges])
    return [outcome for part in parts for outcome in part]


def _check_common(p: float, seed: int, trials: int) -> None:
    if not 0.0 <= p <= 1.0:
        raise PreconditionViolated(f"p={p} hors de [0, 1]", {"p": p})
    if not 0 <= seed <= MAX_SEED:
        raise PreconditionViolated(f"Graine {seed} hors de [0, 2^64)", {"seed": seed})
    if trials < 1:
        raise PreconditionViolated(f"Nombre d'essais {trials} < 1", {"trials": trials})


# --- Noyaux (fonctions de module, picklables) ---


def _sample(seed: int, t: int, p: float, hi: int) -> NatSet:
    universe = Interval(1, hi)
    return NatSet.from_mask(universe, element_uniforms(seed, t, hi) < p)


def _uncovered(A: NatSet, window: int) -> int:
    """|[window] \\ (A + A)|."""
    if not A:
        return window
    return window - sumset(A).bits_in(Interval(1, window)).bit_count()


def _deficiency_trial(t: int, *, seed: int, p: float, hi: int, window: int) -> int:
    return _uncovered(_sample(seed, t, p, hi), window)


def _lower_trial(t: int, *, seed: int, p: float, n: int, m: int) -> tuple[bool, bool]:
    """(événement A ∩ [1, ⌈m/2⌉] = ∅, implication vers déficience >= m)."""
    uniforms = element_uniforms(seed, t, n)
    mask = uniforms < p
    event = not bool(mask[: math.ceil(m / 2)].any())
    if not event:
        return False, True
    A = NatSet.from_mask(Interval(1, n), mask)
    return True, _uncovered(A, 2 * n) >= m


def _coupled_trial(t: int, *, seed: int, ps: tuple[float, ...], n: int, m: int) -> tuple[tuple[bool, ...], bool]:
    """Événements déficience >= m pour chaque p croissant, sur les mêmes uniformes.

    Le booléen final signale une violation du couplage : |A| qui décroît,
    A + A qui perd un élément ou une déficience qui augmente quand p croît.
    """
    uniforms = element_uniforms(seed, t, n)
    universe = Interval(1, n)
    window = universe.sum_window()
    events: list[bool] = []
    violated = False
    previous: tuple[int, int, int] | None = None
    for p in ps:
        A = NatSet.from_mask(universe, uniforms < p)
        sums = sumset(A).bits_in(window) if A else 0
        deficiency = 2 * n - sums.bit_count()
        events.append(deficiency >= m)
        if previous is not None:
            size, old_sums, old_deficiency = previous
            if len(A) < size or old_sums & ~sums or deficiency > old_deficiency:
                violated = True
        previous = (len(A), sums, deficiency)
    return tuple(events), violated


def _middle_trial(t: int, *, seed: int, p: float, n: int, lo: int, hi: int) -> bool:
    """[lo, hi] ⊄ A + A."""
    A = _sample(seed, t, p, n)
    target = Interval(lo, hi)
    if not A:
        return True
    return sumset(A).bits_in(target) != (1 << target.size()) - 1


def _element_trial(t: int, *, seed: int, p: float, n: int, x: int) -> bool:
    """x ∉ A + A."""
    hi = min(n, x - 1)
    mask = element_uniforms(seed, t, hi) < p
    a = np.arange(max(1, x - n), x // 2 + 1)
    return not bool((mask[a - 1] & mask[x - a - 1]).any())


# --- Opérations ---


def estimate_tail(
    n: int,
    m: int,
    p: float,
    trials: int,
    seed: int,
    confidence: float = 0.95,
    workers: int = 1,
) -> TailEstimate:
    """Estime Pr(|[2n] \\ (A + A)| >= m) pour A p-aléatoire dans [n].

    Args:
        n: Taille de l'univers [n]
        m: Seuil de déficience (drapeau out_of_range si m > 2n/3)
        p: Probabilité d'inclusion
        trials: Nombre d'essais
        seed: Graine de base
        confidence: Niveau de l'intervalle
        workers: Nombre de processus

    Returns:
        TailEstimate

    Raises:
        PreconditionViolated: Si les paramètres sont hors domaine
    """
    _check_common(p, seed, trials)
    if n < 1 or m < 0:
        raise PreconditionViolated("n >= 1 et m >= 0 requis", {"n": n, "m": m})
    flags = ["out_of_range"] if 3 * m > 2 * n else []
    with LogContext(logger, "estimate_tail", n=n, m=m, p=p, trials=trials):
        kernel = partial(_deficiency_trial, seed=seed, p=p, hi=n, window=2 * n)
        deficiencies = run_trials(kernel, trials, workers)
    events = sum(1 for value in deficiencies if value >= m)
    return TailEstimate.from_counts(events, trials, confidence, seed, flags)


def deficiency_histogram(
    n: int, p: float, trials: int, seed: int, workers: int = 1
) -> dict[int, int]:
    """Distribution empirique de |[2n] \\ (A + A)|, par déficience croissante."""
    _check_common(p, seed, trials)
    if n < 1:
        raise PreconditionViolated(f"n={n} < 1", {"n": n})
    with LogContext(logger, "deficiency_histogram", n=n, p=p, trials=trials):
        kernel = partial(_deficiency_trial, seed=seed, p=p, hi=n, window=2 * n)
        counts = Counter(run_trials(kernel, trials, workers))
    return dict(sorted(counts.items()))


@dataclass(frozen=True)
class LowerBoundCheck:
    """Événement A ∩ [1, ⌈m/2⌉] = ∅ : fréquence, valeur exacte et implication."""

    empirical: TailEstimate
    exact: Fraction
    implies_tail: bool
    violations: int  # Essais réalisant l'événement sans déficience >= m

    @property
    def exact_in_ci(self) -> bool:
        return self.empirical.covers(float(self.exact))

    def to_json(self) -> dict[str, Any]:
        return {
            "empirical": self.empirical.to_json(),
            "exact": float(self.exact),
            "exact_in_ci": self.exact_in_ci,
            "implies_tail": self.implies_tail,
            "violations": self.violations,
        }


def lower_bound_check(
    n: int,
    m: int,
    p: float,
    trials: int,
    seed: int,
    confidence: float = 0.95,
    workers: int = 1,
) -> LowerBoundCheck:
    """Compare la fréquence de A ∩ [1, ⌈m/2⌉] = ∅ à (1 - p)^{⌈m/2⌉}.

    Chaque essai réalisant l'événement doit aussi réaliser
    |[2n] \\ (A + A)| >= m, puisque A + A ⊆ [2⌈m/2⌉ + 2, 2n].

    Raises:
        PreconditionViolated: Si ⌈m/2⌉ > n ou m < 1
    """
    _check_common(p, seed, trials)
    half = math.ceil(m / 2)
    if m < 1 or half > n:
        raise PreconditionViolated(f"⌈m/2⌉={half} hors de [1, n={n}]", {"m": m, "n": n})
    with LogContext(logger, "lower_bound_check", n=n, m=m, p=p, trials=trials):
        kernel = partial(_lower_trial, seed=seed, p=p, n=n, m=m)
        outcomes = run_trials(kernel, trials, workers)
    events = sum(1 for event, _ in outcomes if event)
    violations = sum(1 for _, implied in outcomes if not implied)
    if violations:
        logger.error(f"Implication violée dans {violations} essais (n={n}, m={m}, p={p})")
    exact = (1 - as_fraction(p)) ** half
    return LowerBoundCheck(
        TailEstimate.from_counts(events, trials, confidence, seed), exact, violations == 0, violations
    )


@dataclass(frozen=True)
class ThresholdRow:
    c: float
    p: float
    estimate: TailEstimate

    def to_row(self) -> dict[str, Any]:
        return {"c": self.c, "p": self.p, **self.estimate.to_json()}


@dataclass(frozen=True)
class ThresholdProbe:
    """Queues le long de p = c/√m à n = 2m, sur des essais couplés."""

    m: int
    rows: tuple[ThresholdRow, ...]
    coupling_violations: int

    def to_json(self) -> dict[str, Any]:
        return {
            "m": self.m,
            "n": 2 * self.m,
            "rows": [row.to_row() for row in self.rows],
            "coupling_violations": self.coupling_violations,
        }


def threshold_probe(
    m: int,
    c_values: Sequence[float],
    trials: int,
    seed: int,
    confidence: float = 0.95,
    workers: int = 1,
) -> ThresholdProbe:
    """Estime Pr(|[4m] \\ (A + A)| >= m) pour A ⊆ [2m], p = c/√m.

    Toutes les valeurs de c partagent les uniformes de chaque essai : les
    ensembles sont emboîtés et la déficience ne peut que décroître avec c.

    Raises:
        PreconditionViolated: Si un p = c/√m sort de [0, 1]
    """
    if m < 1:
        raise PreconditionViolated(f"m={m} < 1", {"m": m})
    ps = [c / math.sqrt(m) for c in c_values]
    for c, p in zip(c_values, ps, strict=True):
        if not 0.0 <= p <= 1.0:
            raise PreconditionViolated(f"p = c/√m = {p} hors de [0, 1] pour c={c}", {"c": c})
    _check_common(0.0, seed, trials)
    order = sorted(range(len(ps)), key=lambda i: ps[i])
    ascending = tuple(ps[i] for i in order)
    with LogContext(logger, "threshold_probe", m=m, points=len(ps), trials=trials):
        kernel = partial(_coupled_trial, seed=seed, ps=ascending, n=2 * m, m=m)
        outcomes = run_trials(kernel, trials, workers) if ps else []
    counts = [0] * len(ps)
    violations = 0
    for events, violated in outcomes:
        violations += violated
        for rank, event in enumerate(events):
            counts[order[rank]] += event
    if violations:
        logger.error(f"Couplage violé dans {violations} essais (m={m})")
    rows = tuple(
        ThresholdRow(c, p, TailEstimate.from_counts(k, trials, confidence, seed))
        for c, p, k in zip(c_values, ps, counts, strict=True)
    )
    return ThresholdProbe(m, rows, violations)


@dataclass(frozen=True)
class MiddleCoverage:
    """Événement (2M/p, 2n - 2M/p) ⊄ A + A et sa borne fermée."""

    empirical: TailEstimate
    bound: LogReal
    vacuous: bool
    interval: tuple[int, int] | None

    @property
    def dominated(self) -> bool:
        """Borne >= intervalle de confiance supérieur."""
        return self.empirical.ci_high <= self.bound.value()

    @property
    def violated(self) -> bool:
        """Borne sous l'intervalle de confiance entier."""
        return self.empirical.ci_low > self.bound.value()

    def to_json(self) -> dict[str, Any]:
        return {
            "empirical": self.empirical.to_json(),
            "bound": self.bound.value(),
            "log_bound": self.bound.to_json()["log"],
            "vacuous": self.vacuous,
            "interval": list(self.interval) if self.interval else None,
            "dominated": self.dominated,
            "violated": self.violated,
        }


def middle_bound(M: float, p: float) -> LogReal:
    """min(1, 8 p^{-2} (1 - p²)^{M/(2p)})."""
    value = LogReal.of(8.0 / p**2) * LogReal.complement_power(p * p, M / (2 * p))
    return value.minimum(LogReal.one())


def middle_coverage(
    n: int,
    M: int,
    p: float,
    trials: int,
    seed: int,
    confidence: float = 0.95,
    workers: int = 1,
) -> MiddleCoverage:
    """Estime Pr((2M/p, 2n - 2M/p) ⊄ A + A) pour A p-aléatoire dans [n].

    Si 2M/p >= n l'intervalle est vide : fréquence 0 par convention,
    drapeau "vacuous", aucun essai n'est lancé.

    Raises:
        PreconditionViolated: Si p ∉ ]0, 1] ou M < 1
    """
    _check_common(p, seed, trials)
    if p <= 0 or M < 1 or n < 1:
        raise PreconditionViolated("p > 0, M >= 1 et n >= 1 requis", {"p": p, "M": M, "n": n})
    edge = Fraction(2 * M) / as_fraction(p)
    lo = math.floor(edge) + 1
    hi = math.ceil(2 * n - edge) - 1
    bound = middle_bound(M, p)
    if edge >= n or lo > hi:
        empirical = TailEstimate.from_counts(0, trials, confidence, seed, ("vacuous",))
        return MiddleCoverage(empirical, bound, True, None)
    with LogContext(logger, "middle_coverage", n=n, M=M, p=p, trials=trials):
        kernel = partial(_middle_trial, seed=seed, p=p, n=n, lo=lo, hi=hi)
        events = sum(run_trials(kernel, trials, workers))
    return MiddleCoverage(
        TailEstimate.from_counts(events, trials, confidence, seed), bound, False, (lo, hi)
    )


def miss_probability(x: int, n: int, p: float | Fraction) -> Fraction:
    """Pr(x ∉ A + A) exacte : produit sur les paires {a, x - a} ⊆ [n].

    (1 - p²) par paire a < x - a, (1 - p) pour le terme a = x/2.
    """
    q = as_fraction(p)
    lo = max(1, x - n)
    pairs = max(0, (x - 1) // 2 - lo + 1)
    value = (1 - q * q) ** pairs
    if x % 2 == 0 and x // 2 <= n:
        value *= 1 - q
    return value


def exhaustive_miss_probability(
    x: int, n: int, p: float | Fraction, max_elements: int = EXHAUSTIVE_MAX_ELEMENTS
) -> Fraction:
    """Pr(x ∉ A + A) par énumération des 2^k issues des éléments utiles.

    Les éléments utiles sont ceux de [max(1, x - n), min(n, x - 1)] ; chaque
    issue est pondérée exactement par p^{|issue|} (1 - p)^{k - |issue|}.

    Raises:
        PreconditionViolated: Si x ∉ [2, 2n]
        BudgetExceeded: Si k > max_elements
    """
    if not 2 <= x <= 2 * n:
        raise PreconditionViolated(f"x={x} hors de [2, 2n]", {"x": x, "n": n})
    lo, hi = max(1, x - n), min(n, x - 1)
    k = hi - lo + 1
    if k > max_elements:
        raise BudgetExceeded(f"{k} éléments à énumérer", required=k, cap=max_elements)
    codes = np.arange(1 << k, dtype=np.uint32)

    def bit(element: int) -> np.ndarray:
        return ((codes >> np.uint32(element - lo)) & np.uint32(1)).astype(bool)

    hit = np.zeros(codes.size, dtype=bool)
    for a in range(lo, x // 2 + 1):
        hit |= bit(a) & bit(x - a)
    weight = np.zeros(codes.size, dtype=np.int64)
    for element in range(lo, hi + 1):
        weight += bit(element)
    per_size = np.bincount(weight[~hit], minlength=k + 1)
    q = as_fraction(p)
    return sum(
        (int(count) * q**size * (1 - q) ** (k - size) for size, count in enumerate(per_size)),
        Fraction(0),
    )


@dataclass(frozen=True)
class SingleElementTail:
    """Pr(x ∉ A + A) : fréquence, valeur exacte et majorant (1-p)^{p(x-1)/4}."""

    x: int
    empirical: TailEstimate
    exact: Fraction
    closed_bound: LogReal
    bound_valid: bool  # Toutes les paires {a, x - a}, a <= x/2, sont dans [n]

    def to_json(self) -> dict[str, Any]:
        return {
            "x": self.x,
            "empirical": self.empirical.to_json(),
            "exact": float(self.exact),
            "bound": self.closed_bound.value(),
            "bound_valid": self.bound_valid,
        }


def single_element_tail(
    x: int,
    n: int,
    p: float,
    trials: int,
    seed: int,
    confidence: float = 0.95,
    workers: int = 1,
) -> SingleElementTail:
    """Estime Pr(x ∉ A + A) et le compare au produit exact.

    Raises:
        PreconditionViolated: Si x ∉ [2, 2n]
    """
    _check_common(p, seed, trials)
    if n < 1 or not 2 <= x <= 2 * n:
        raise PreconditionViolated(f"x={x} hors de [2, 2n]", {"x": x, "n": n})
    with LogContext(logger, "single_element_tail", x=x, n=n, p=p, trials=trials):
        kernel = partial(_element_trial, seed=seed, p=p, n=n, x=x)
        events = sum(run_trials(kernel, trials, workers))
    return SingleElementTail(
        x,
        TailEstimate.from_counts(events, trials, confidence, seed),
        miss_probability(x, n, p),
        LogReal.complement_power(p, p * (x - 1) / 4),
        x - 1 <= n,
    )


@dataclass(frozen=True)
class InfiniteTail:
    """Réduction de A ⊆ ℕ à [2n] avec n = ⌈2m/p⌉.

    La déficience dans [2n] ne dépend que de A ∩ [2n - 1] ; les éléments
    manquants au-delà de 2n sont couverts par `truncation`.
    """

    m: int
    p: float
    n: int
    estimate: TailEstimate
    truncation: LogReal
    bound: LogReal
    hypotheses_hold: bool

    @property
    def upper(self) -> float:
        """Majorant de confiance de Pr(|ℕ \\ (A + A)| >= m)."""
        return min(1.0, self.estimate.ci_high + self.truncation.value())

    def to_json(self) -> dict[str, Any]:
        return {
            "m": self.m,
            "p": self.p,
            "n": self.n,
            "estimate": self.estimate.to_json(),
            "truncation": self.truncation.value(),
            "upper": self.upper,
            "bound": self.bound.value(),
            "hypotheses_hold": self.hypotheses_hold,
        }


def infinite_tail(
    m: int,
    p: float,
    eps: float,
    trials: int,
    seed: int,
    confidence: float = 0.95,
    workers: int = 1,
    config: AuditConfig | None = None,
) -> InfiniteTail:
    """Estime Pr(|ℕ \\ (A + A)| >= m) pour A p-aléatoire dans ℕ.

    Raises:
        PreconditionViolated: Si p ∉ ]0, 1[, m < 1 ou eps <= 0
    """
    _check_common(p, seed, trials)
    if not 0.0 < p < 1.0 or m < 1:
        raise PreconditionViolated("0 < p < 1 et m >= 1 requis", {"p": p, "m": m})
    n = math.ceil(2 * m / p)
    main = bound_main(m, p, eps, config)
    with LogContext(logger, "infinite_tail", m=m, p=p, n=n, trials=trials):
        kernel = partial(_deficiency_trial, seed=seed, p=p, hi=2 * n - 1, window=2 * n)
        events = sum(1 for value in run_trials(kernel, trials, workers) if value >= m)
    return InfiniteTail(
        m,
        p,
        n,
        TailEstimate.from_counts(events, trials, confidence, seed),
        truncation_bound(n, p),
        main.value,
        main.hypotheses_hold,
    )


def resolvable(bound: LogReal, trials: int, confidence: float = 0.95) -> bool:
    """Vrai si la borne dépasse RESOLVABLE_FLOOR et l'IC haut d'un comptage nul.

    Sous ce seuil, même zéro événement ne peut pas contredire la borne.
    """
    floor = max(RESOLVABLE_FLOOR, clopper_pearson(0, trials, confidence)[1])
    return bound.value() >= floor

