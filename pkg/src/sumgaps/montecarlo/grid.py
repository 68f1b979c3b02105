"""Grilles d'expériences : une ligne CSV par cellule (n, m, p, ε)."""

import itertools
import math
from collections.abc import Iterator
from dataclasses import dataclass, field
from typing import Any

from ..audit.bounds import bound_main
from ..audit.logreal import LogReal
from ..config.schema import AuditConfig
from ..core.errors import PreconditionViolated
from ..utils.logger import LogContext, get_logger
from .estimate import (
    LowerBoundCheck,
    MiddleCoverage,
    SingleElementTail,
    TailEstimate,
    ThresholdProbe,
    estimate_tail,
    lower_bound_check,
    middle_coverage,
    resolvable,
    single_element_tail,
    threshold_probe,
)

logger = get_logger("sumgaps.montecarlo.grid")

GRID_COLUMNS = (
    "n", "m", "p", "eps", "trials", "events", "p_hat", "ci_low", "ci_high", "bound", "flag",
)


@dataclass(frozen=True)
class ExperimentGrid:
    """Produit cartésien des valeurs de n, m, p et ε.

    Les tables optionnelles (c pour le seuil, M pour le milieu, x pour un
    élément isolé) réutilisent les valeurs de n et p de la grille.
    """

    n_values: tuple[int, ...] = ()
    m_values: tuple[int, ...] = ()
    p_values: tuple[float, ...] = ()
    eps_values: tuple[float, ...] = ()
    trials: int = 10_000
    seed: int = 20240611
    c_values: tuple[float, ...] = ()
    M_values: tuple[int, ...] = ()
    x_values: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise PreconditionViolated(f"trials={self.trials} < 1", {"trials": self.trials})
        if not 0 <= self.seed < 2**64:
            raise PreconditionViolated(f"Graine {self.seed} hors de [0, 2^64)")
        for name in ("n_values", "m_values", "M_values", "x_values"):
            if any(v < 1 for v in getattr(self, name)):
                raise PreconditionViolated(f"{name} doit contenir des entiers >= 1")
        if any(not 0.0 <= p <= 1.0 for p in self.p_values):
            raise PreconditionViolated("p_values doit être dans [0, 1]")
        if any(e <= 0 for e in self.eps_values):
            raise PreconditionViolated("eps_values doit être strictement positif")
        if any(c < 0 for c in self.c_values):
            raise PreconditionViolated("c_values doit être positif")

    @classmethod
    def from_dict(cls, data: dict[str, Any], trials: int | None = None, seed: int | None = None) -> "ExperimentGrid":
        """Construit une grille depuis un objet JSON/YAML.

        Clés : n, m, p, eps (listes), trials, seed et optionnellement c, M, x.
        Les arguments explicites remplacent trials et seed du fichier.

        Raises:
            PreconditionViolated: Si une valeur est invalide
        """

        def values(key: str, cast: type) -> tuple[Any, ...]:
            raw = data.get(key, [])
            if not isinstance(raw, list):
                raw = [raw]
            try:
                return tuple(cast(v) for v in raw)
            except (TypeError, ValueError) as e:
                raise PreconditionViolated(f"Valeurs invalides pour '{key}': {e}") from e

        return cls(
            n_values=values("n", int),
            m_values=values("m", int),
            p_values=values("p", float),
            eps_values=values("eps", float),
            trials=trials if trials is not None else int(data.get("trials", 10_000)),
            seed=seed if seed is not None else int(data.get("seed", 20240611)),
            c_values=values("c", float),
            M_values=values("M", int),
            x_values=values("x", int),
        )

    def cells(self) -> Iterator[tuple[int, int, float, float]]:
        return itertools.product(self.n_values, self.m_values, self.p_values, self.eps_values)

    def __len__(self) -> int:
        return len(self.n_values) * len(self.m_values) * len(self.p_values) * len(self.eps_values)

    def to_json(self) -> dict[str, Any]:
        return {
            "n": list(self.n_values),
            "m": list(self.m_values),
            "p": list(self.p_values),
            "eps": list(self.eps_values),
            "trials": self.trials,
            "seed": self.seed,
            "c": list(self.c_values),
            "M": list(self.M_values),
            "x": list(self.x_values),
        }


@dataclass(frozen=True)
class GridRow:
    """Estimation d'une cellule, borne principale et drapeaux."""

    n: int
    m: int
    p: float
    eps: float
    estimate: TailEstimate
    bound: LogReal | None
    hypotheses_hold: bool
    flags: tuple[str, ...]

    def to_row(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "m": self.m,
            "p": self.p,
            "eps": self.eps,
            "trials": self.estimate.trials,
            "events": self.estimate.events,
            "p_hat": float(self.estimate.p_hat),
            "ci_low": self.estimate.ci_low,
            "ci_high": self.estimate.ci_high,
            "bound": "" if self.bound is None else self.bound.to_str(),
            "flag": ";".join(self.flags),
        }


def _cell_flags(
    n: int,
    m: int,
    p: float,
    estimate: TailEstimate,
    bound: LogReal | None,
    hold: bool,
    trials: int,
    confidence: float = 0.95,
) -> tuple[str, ...]:
    """Drapeaux d'une cellule.

    bound_violated : hypothèses tenues et soit l'IC bas dépasse la borne,
    soit la borne est départageable et l'IC haut la dépasse.
    """
    flags = list(estimate.flags)
    if (p <= 0 or p > 0.5) and "out_of_range" not in flags:
        flags.append("out_of_range")
    if bound is None:
        flags.append("no_bound")
        return tuple(flags)
    if not hold:
        flags.append("below_threshold")
    ok = resolvable(bound, trials, confidence)
    if not ok:
        flags.append("unresolvable")
    exceeds = estimate.ci_high > bound.value()
    if exceeds:
        flags.append("exceeds_bound")
    if hold and (estimate.ci_low > bound.value() or (ok and exceeds)):
        flags.append("bound_violated")
    return tuple(flags)


def run_grid(
    grid: ExperimentGrid,
    config: AuditConfig | None = None,
    confidence: float = 0.95,
    workers: int = 1,
) -> list[GridRow]:
    """Estime la queue de déficience sur chaque cellule et la compare à bound_main.

    Toutes les cellules partagent la graine de base : deux cellules de
    même n ne diffèrent que par p, sur les mêmes uniformes.
    """
    rows: list[GridRow] = []
    with LogContext(logger, "run_grid", cells=len(grid), trials=grid.trials):
        for n, m, p, eps in grid.cells():
            estimate = estimate_tail(n, m, p, grid.trials, grid.seed, confidence, workers)
            bound: LogReal | None = None
            hold = False
            if 0.0 < p < 1.0:
                report = bound_main(m, p, eps, config)
                bound, hold = report.value, report.hypotheses_hold
            flags = _cell_flags(n, m, p, estimate, bound, hold, grid.trials, confidence)
            rows.append(GridRow(n, m, p, eps, estimate, bound, hold, flags))
            logger.debug(f"Cellule n={n} m={m} p={p} eps={eps}: {estimate.events}/{grid.trials}")
    return rows


@dataclass
class SuiteReport:
    """Toutes les tables d'une grille, avec les violations à tolérance nulle."""

    rows: list[GridRow] = field(default_factory=list)
    lower: list[tuple[int, int, float, LowerBoundCheck]] = field(default_factory=list)
    threshold: list[ThresholdProbe] = field(default_factory=list)
    middle: list[tuple[int, int, float, MiddleCoverage]] = field(default_factory=list)
    element: list[tuple[int, float, SingleElementTail]] = field(default_factory=list)

    @property
    def violations(self) -> list[str]:
        """Implications par essai, couplages et bound_main violés (tolérance nulle)."""
        found = [
            f"bound_main n={row.n} m={row.m} p={row.p} eps={row.eps}: "
            f"IC [{row.estimate.ci_low:.3g}, {row.estimate.ci_high:.3g}]"
            for row in self.rows
            if "bound_violated" in row.flags
        ]
        found += [
            f"lower_bound_check n={n} m={m} p={p}: {check.violations} essais"
            for n, m, p, check in self.lower
            if not check.implies_tail
        ]
        found += [
            f"threshold_probe m={probe.m}: {probe.coupling_violations} essais"
            for probe in self.threshold
            if probe.coupling_violations
        ]
        return found

    def to_json(self) -> dict[str, Any]:
        return {
            "rows": [row.to_row() for row in self.rows],
            "lower": [
                {"n": n, "m": m, "p": p, **check.to_json()} for n, m, p, check in self.lower
            ],
            "threshold": [probe.to_json() for probe in self.threshold],
            "middle": [
                {"n": n, "M": M, "p": p, **coverage.to_json()} for n, M, p, coverage in self.middle
            ],
            "element": [{"n": n, "p": p, **tail.to_json()} for n, p, tail in self.element],
            "violations": self.violations,
        }


def run_suite(
    grid: ExperimentGrid,
    config: AuditConfig | None = None,
    confidence: float = 0.95,
    workers: int = 1,
) -> SuiteReport:
    """run_grid plus les tables complémentaires que la grille demande.

    - contrôle du minorant exact pour chaque (n, m, p) avec ⌈m/2⌉ <= n ;
    - seuil p = c/√m pour chaque m si des valeurs de c sont données ;
    - couverture du milieu pour chaque (n, M, p > 0) ;
    - élément isolé pour chaque (x, n, p) avec x <= 2n.
    """
    trials, seed = grid.trials, grid.seed
    report = SuiteReport(rows=run_grid(grid, config, confidence, workers))
    for n, m, p in itertools.product(grid.n_values, grid.m_values, grid.p_values):
        if math.ceil(m / 2) <= n:
            check = lower_bound_check(n, m, p, trials, seed, confidence, workers)
            report.lower.append((n, m, p, check))
    if grid.c_values:
        for m in grid.m_values:
            if all(c / math.sqrt(m) <= 1.0 for c in grid.c_values):
                report.threshold.append(
                    threshold_probe(m, grid.c_values, trials, seed, confidence, workers)
                )
    for n, M, p in itertools.product(grid.n_values, grid.M_values, grid.p_values):
        if p > 0:
            report.middle.append((n, M, p, middle_coverage(n, M, p, trials, seed, confidence, workers)))
    for x, n, p in itertools.product(grid.x_values, grid.n_values, grid.p_values):
        if 2 <= x <= 2 * n:
            report.element.append((n, p, single_element_tail(x, n, p, trials, seed, confidence, workers)))
    for violation in report.violations:
        logger.error(f"Invariant violé: {violation}")
    return report


def histogram_rows(histogram: dict[int, int]) -> list[dict[str, int]]:
    return [{"deficiency": d, "count": c} for d, c in histogram.items()]

