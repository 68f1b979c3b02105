"""Évaluation des bornes fermées, termes d'union et inégalités élémentaires.

Toutes les valeurs sont des `LogReal`. Les logarithmes des plages de
validité (« C log(1/ε)/√(ε³m) ≤ p ») sont en base 2, comme la taille des
empreintes des conteneurs.
"""

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import lru_cache
from typing import Any

import numpy as np
from scipy.stats import binom

from ..config.schema import AuditConfig
from ..core.errors import PreconditionViolated
from ..core.regularity import DYADIC_KAPPA
from ..utils.logger import get_logger
from .logreal import LogReal

logger = get_logger("sumgaps.audit")

# Tolérance des comparaisons flottantes sur les inégalités prouvées
TOLERANCE = 1e-12

# Rapport de la série géométrique définissant L
SERIES_RATIO = math.sqrt(1.0 - 2.0**-11)


@dataclass(frozen=True)
class BoundReport:
    """Valeur d'une borne avec l'état de ses hypothèses."""

    id: str
    inputs: dict[str, float]
    value: LogReal
    hypotheses_hold: bool
    details: tuple[str, ...] = ()
    claim_holds: bool | None = None  # Pour les chaînes d'inégalités auditées

    def to_json(self) -> dict[str, Any]:
        data = {
            "id": self.id,
            "inputs": self.inputs,
            "log_value": self.value.to_json()["log"],
            "value": self.value.to_str(),
            "hypotheses_hold": self.hypotheses_hold,
            "details": list(self.details),
        }
        if self.claim_holds is not None:
            data["claim_holds"] = self.claim_holds
        return data


@dataclass(frozen=True)
class UnionTermReport:
    """Terme d'union (e|X|p/s)^s (1-p)^r avec ses vérifications de grille."""

    report: BoundReport
    leq_one: bool
    monotone_on_grid: bool
    grid: tuple[float, ...]
    family_empty: bool

    @property
    def value(self) -> LogReal:
        return self.report.value

    def to_json(self) -> dict[str, Any]:
        return {
            **self.report.to_json(),
            "leq_one": self.leq_one,
            "monotone_on_grid": self.monotone_on_grid,
            "grid": {
                "points": len(self.grid),
                "lo": self.grid[0] if self.grid else None,
                "hi": self.grid[-1] if self.grid else None,
            },
            "family_empty": self.family_empty,
        }


@dataclass(frozen=True)
class InequalityCheck:
    """Vérification ponctuelle d'une inégalité sur une grille dense."""

    id: str
    worst_margin: float
    holds: bool
    points: int
    domain: str

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "worst_margin": self.worst_margin,
            "holds": self.holds,
            "points": self.points,
            "domain": self.domain,
        }


@dataclass(frozen=True)
class ConstantSearch:
    """Plus petite constante C d'une grille pour laquelle le terme d'union passe."""

    kind: str
    C: float | None
    candidates: tuple[float, ...]
    details: tuple[str, ...] = ()

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "C": self.C,
            "candidates": list(self.candidates),
            "details": list(self.details),
        }


def _config(config: AuditConfig | None) -> AuditConfig:
    return config if config is not None else AuditConfig()


def _require_probability(p: float) -> None:
    if not 0.0 < p < 1.0:
        raise PreconditionViolated(f"p={p} hors de ]0, 1[", {"p": p})


# --- Plages de validité ---


def main_lower(m: float, eps: float, C: float) -> float:
    """C log(1/ε)/√(ε³m)."""
    return C * math.log2(1.0 / eps) / math.sqrt(eps**3 * m)


def many_lower(d: float, T: float, eps: float, C: float) -> float:
    """C T log(T/ε)/√(ε³d)."""
    return C * T * math.log2(T / eps) / math.sqrt(eps**3 * d)


def regular_lower(size_x: float, size_y: float, d: float, C: float) -> float:
    """C log(|Y|/d)/√|X|."""
    return C * math.log2(size_y / d) / math.sqrt(size_x)


def few_lower(M: float, d: float, K: float) -> float:
    """max{K log K/√M, K² log² d/d}."""
    return max(K * math.log2(K) / math.sqrt(M), K**2 * math.log2(d) ** 2 / d)


def _range_details(lower: float, p: float) -> tuple[bool, list[str]]:
    details = [f"p_min={lower:.6g}"]
    if lower > 0.5:
        details.append("empty_range")
    if p < lower:
        details.append("p_below_range")
    if p > 0.5:
        details.append("p_above_half")
    return lower <= p <= 0.5, details


# --- Bornes principales ---


def bound_main(m: float, p: float, eps: float, config: AuditConfig | None = None) -> BoundReport:
    """(1 - p)^{m/2 - εm}, borne de la queue de déficience.

    Args:
        m: Nombre d'éléments manquants
        p: Probabilité d'inclusion
        eps: Perte ε > 0 dans l'exposant
        config: Constantes d'audit (C)

    Returns:
        BoundReport, hypotheses_hold reflétant la plage de p au C configuré

    Raises:
        PreconditionViolated: Si p ∉ ]0, 1[, eps <= 0 ou m <= 0
    """
    cfg = _config(config)
    _require_probability(p)
    if eps <= 0 or m <= 0:
        raise PreconditionViolated("m et eps doivent être positifs", {"m": m, "eps": eps})
    value = LogReal.complement_power(p, m / 2 - eps * m)
    hold, details = _range_details(main_lower(m, eps, cfg.C), p)
    return BoundReport("bound_main", {"m": m, "p": p, "eps": eps, "C": cfg.C}, value, hold, tuple(details))


def bound_many(
    d: float, T: float, eps: float, p: float, config: AuditConfig | None = None
) -> BoundReport:
    """(1 - p)^{d/2 - 2εd}, borne « beaucoup d'éléments manquants » sur [a, a + Td).

    Raises:
        PreconditionViolated: Si p ∉ ]0, 1[ ou d, T, eps non positifs
    """
    cfg = _config(config)
    _require_probability(p)
    if d <= 0 or T <= 0 or eps <= 0:
        raise PreconditionViolated(
            "d, T et eps doivent être positifs", {"d": d, "T": T, "eps": eps}
        )
    value = LogReal.complement_power(p, d / 2 - 2 * eps * d)
    hold, details = _range_details(many_lower(d, T, eps, cfg.C), p)
    return BoundReport(
        "bound_many", {"d": d, "T": T, "eps": eps, "p": p, "C": cfg.C}, value, hold, tuple(details)
    )


def bound_few(
    M: float, p: float, d: float | None = None, config: AuditConfig | None = None
) -> BoundReport:
    """(1 - p)^{M/2^11}, borne « peu d'éléments manquants au milieu ».

    Args:
        M: Longueur des intervalles d'extrémité
        p: Probabilité d'inclusion
        d: Nombre d'éléments manquants (par défaut M/K)
        config: Constantes d'audit (K)

    Raises:
        PreconditionViolated: Si p ∉ ]0, 1[ ou M, d non positifs
    """
    cfg = _config(config)
    _require_probability(p)
    d_value = M / cfg.K if d is None else d
    if M <= 0 or d_value <= 0:
        raise PreconditionViolated("M et d doivent être positifs", {"M": M, "d": d_value})
    value = LogReal.complement_power(p, M / 2**11)
    hold, details = _range_details(few_lower(M, d_value, cfg.K), p)
    return BoundReport(
        "bound_few", {"M": M, "p": p, "d": d_value, "K": cfg.K}, value, hold, tuple(details)
    )


def lower_event(m: int, p: float) -> LogReal:
    """(1 - p)^{⌈m/2⌉}, probabilité exacte de A ∩ [1, ⌈m/2⌉] = ∅."""
    return LogReal.complement_power(p, math.ceil(m / 2))


def sandwich(m: int, p: float, eps: float, config: AuditConfig | None = None) -> tuple[LogReal, LogReal, bool]:
    """Minorant exact et borne principale ; le booléen vaut minorant <= borne."""
    lower = lower_event(m, p)
    upper = bound_main(m, p, eps, config).value
    return lower, upper, lower.log <= upper.log + TOLERANCE * max(1.0, abs(upper.log))


# --- Termes d'union ---


def _union_value(size: float, s: float, p: float, slack: float) -> LogReal:
    """(e · size · p / s)^s (1 - p)^slack."""
    if p <= 0:
        return LogReal.zero()
    first = s * (1.0 + math.log(size * p) - math.log(s))
    return LogReal(first) * LogReal.complement_power(p, slack)


@dataclass(frozen=True)
class _UnionTerm:
    """Terme d'union à paramètres fixés, fonction de p."""

    size: float
    s: float
    slack: float

    def __call__(self, p: float) -> LogReal:
        return _union_value(self.size, self.s, p, self.slack)


def _many_term(d: float, T: float, eps: float, L: float) -> _UnionTerm:
    return _UnionTerm(T * d, L * T * math.sqrt(d / eps), eps * d / 2)


def _regular_term(size_x: float, size_y: float, d: float, kappa: float, L: float) -> _UnionTerm:
    return _UnionTerm(
        size_x, L * math.log2(size_y / d) * math.sqrt(size_x), 9 * kappa * size_x / 1600
    )


def _scan(term: _UnionTerm, lo: float, points: int) -> tuple[bool, float, tuple[float, ...]]:
    """Monotonie et maximum (log) du terme sur une grille de [lo, 1/2]."""
    if lo > 0.5:
        return True, -math.inf, ()
    grid = np.linspace(max(lo, 1e-12), 0.5, points)
    values = [term(float(q)).log for q in grid]
    monotone = all(
        b <= a + TOLERANCE * max(1.0, abs(a)) for a, b in zip(values, values[1:], strict=False)
    )
    return monotone, max(values), tuple(float(q) for q in grid)


def _union_report(
    report_id: str,
    inputs: dict[str, float],
    term: _UnionTerm,
    p: float,
    lower: float,
    points: int,
) -> UnionTermReport:
    value = term(p)
    hold, details = _range_details(lower, p)
    monotone, _, grid = _scan(term, lower, points)
    family_empty = term.s > term.size
    if family_empty:
        details.append("family_empty")
    report = BoundReport(report_id, inputs, value, hold, tuple(details))
    return UnionTermReport(report, value.log <= TOLERANCE, monotone, grid, family_empty)


def union_term_many(
    d: float,
    T: float,
    eps: float,
    p: float,
    L: float | None = None,
    config: AuditConfig | None = None,
) -> UnionTermReport:
    """Terme (eTdp/(LT√(d/ε)))^{LT√(d/ε)} (1 - p)^{εd/2} de l'argument d'union.

    La monotonie est vérifiée sur une grille de `monotone_points` valeurs de
    p couvrant [C T log(T/ε)/√(ε³d), 1/2] ; une plage vide est signalée et
    rend la vérification vide.

    Raises:
        PreconditionViolated: Si une entrée n'est pas strictement positive
    """
    cfg = _config(config)
    if min(d, T, eps, p) <= 0:
        raise PreconditionViolated("Entrées non positives", {"d": d, "T": T, "eps": eps, "p": p})
    L_value = cfg.resolved_L() if L is None else L
    return _union_report(
        "union_term_many",
        {"d": d, "T": T, "eps": eps, "p": p, "L": L_value, "C": cfg.C},
        _many_term(d, T, eps, L_value),
        p,
        many_lower(d, T, eps, cfg.C),
        cfg.monotone_points,
    )


def union_term_regular(
    size_x: float,
    size_y: float,
    d: float,
    kappa: float,
    p: float,
    L: float | None = None,
    config: AuditConfig | None = None,
) -> UnionTermReport:
    """Terme (e|X|p/s)^s (1 - p)^{9κ|X|/1600} avec s = L log(|Y|/d) √|X|.

    `leq_one` est la condition finale de l'argument : la marge 9/1600
    laisse la place de sommer les deux termes sous (1 - p)^{κ|X|/100}.

    Raises:
        PreconditionViolated: Si une entrée n'est pas positive ou si |Y| <= d
    """
    cfg = _config(config)
    if min(size_x, size_y, d, kappa, p) <= 0:
        raise PreconditionViolated(
            "Entrées non positives",
            {"size_x": size_x, "size_y": size_y, "d": d, "kappa": kappa, "p": p},
        )
    if size_y <= d:
        raise PreconditionViolated("|Y| doit dépasser d", {"size_y": size_y, "d": d})
    L_value = cfg.resolved_L() if L is None else L
    return _union_report(
        "union_term_regular",
        {"size_x": size_x, "size_y": size_y, "d": d, "kappa": kappa, "p": p, "L": L_value, "C": cfg.C},
        _regular_term(size_x, size_y, d, kappa, L_value),
        p,
        regular_lower(size_x, size_y, d, cfg.C),
        cfg.monotone_points,
    )


def smallest_constant(
    kind: str,
    params: dict[str, float],
    C_grid: Sequence[float],
    L: float | None = None,
    config: AuditConfig | None = None,
) -> ConstantSearch:
    """Plus petit C de la grille pour lequel le terme d'union est <= 1 et
    décroissant sur sa plage [p_min(C), 1/2], supposée non vide.

    Args:
        kind: "many" (params d, T, eps) ou "regular" (params size_x, size_y, d, kappa)
        params: Paramètres du terme hors p
        C_grid: Constantes candidates
        L: Constante des conteneurs (par défaut celle de la config)
        config: Configuration de base (grille de monotonie)

    Returns:
        ConstantSearch avec C = None si aucun candidat ne passe avant que la
        plage ne devienne vide

    Raises:
        PreconditionViolated: Si kind est inconnu
    """
    cfg = _config(config)
    L_value = cfg.resolved_L() if L is None else L
    if kind == "many":
        term = _many_term(params["d"], params["T"], params["eps"], L_value)

        def lower(C: float) -> float:
            return many_lower(params["d"], params["T"], params["eps"], C)

    elif kind == "regular":
        term = _regular_term(
            params["size_x"], params["size_y"], params["d"], params["kappa"], L_value
        )

        def lower(C: float) -> float:
            return regular_lower(params["size_x"], params["size_y"], params["d"], C)

    else:
        raise PreconditionViolated(f"Type de terme inconnu '{kind}'", {"kind": kind})

    details: list[str] = []
    candidates = tuple(sorted(C_grid))
    for C in candidates:
        lo = lower(C)
        if lo > 0.5:
            details.append(f"C={C:g}: empty_range")
            break
        monotone, worst, _ = _scan(term, lo, cfg.monotone_points)
        if monotone and worst <= TOLERANCE:
            return ConstantSearch(kind, C, candidates, tuple(details))
        details.append(f"C={C:g}: monotone={monotone}, max_log={worst:.4g}")
    return ConstantSearch(kind, None, candidates, tuple(details))


# --- Inégalités élémentaires ---


def elementary_inequalities(
    points: int = 10_000, aux_grid: Sequence[float] | None = None
) -> list[InequalityCheck]:
    """Vérifie chaque inégalité élémentaire des preuves sur une grille dense.

    Args:
        points: Nombre de valeurs de p par grille
        aux_grid: Rapports |X|/d (>= 3/2) pour la chaîne de Chernoff

    Returns:
        Une vérification par inégalité, avec la pire marge (>= 0 si elle tient)
    """
    ratios = np.asarray(aux_grid if aux_grid is not None else np.linspace(1.5, 4.0, 11), dtype=float)
    if np.any(ratios < 1.5):
        raise PreconditionViolated("Les rapports |X|/d doivent être >= 3/2")
    unit = np.linspace(0.0, 1.0, points)
    half = np.linspace(0.0, 0.5, points)
    checks: list[InequalityCheck] = []

    def record(check_id: str, margins: np.ndarray, domain: str) -> None:
        worst = float(np.min(margins))
        checks.append(InequalityCheck(check_id, worst, worst >= -TOLERANCE, int(margins.size), domain))

    with np.errstate(divide="ignore", invalid="ignore"):
        log_q = np.log1p(-unit)  # -inf en p = 1

        # 1 - p² <= (1 - p)^{p/2}
        rhs = np.where(unit < 1.0, np.exp(0.5 * unit * log_q), 0.0)
        record("one_minus_p_squared", rhs - (1.0 - unit**2), "0 <= p <= 1")

        # p²/4 <= 1 - (1 - p)^{p/4}
        rhs = np.where(unit < 1.0, -np.expm1(0.25 * unit * log_q), 1.0)
        record("quarter_p_squared", rhs - unit**2 / 4.0, "0 <= p <= 1")

    # 100^{1/100} e^{-99/100} <= e^{-94/100}, en exposant par unité de |X|p
    chernoff_base = math.log(100.0) / 100.0 - 0.99
    record("hundredth_base", np.array([-0.94 - chernoff_base]), "constante")

    # e^{-0.94 |X| p} <= (1 - p)^d pour |X| >= 3d/2, p <= 1/2 (par unité de d)
    margins = np.log1p(-half)[:, None] + 0.94 * ratios[None, :] * half[:, None]
    record("chernoff_to_complement", margins.ravel(), "0 <= p <= 1/2, |X|/d >= 3/2")

    # e^{-|X|p/8} < (1 - p)^{|X|/16} (par unité de |X|)
    record("eighth_to_sixteenth", np.log1p(-half) / 16.0 + half / 8.0, "0 <= p <= 1/2")

    # Queues binomiales exactes contre les deux formes de Chernoff
    sizes = np.array([10, 100, 1_000, 10_000])
    probs = np.linspace(0.0, 0.5, max(2, points // len(sizes)))
    N, P = np.meshgrid(sizes, probs)
    mean = N * P
    with np.errstate(divide="ignore"):
        tail = binom.logcdf(np.floor(mean / 100.0), N, P)
        record("binomial_hundredth", chernoff_base * mean - tail, "Bin(|X|, p), p <= 1/2")
        tail = binom.logcdf(np.floor(mean / 2.0), N, P)
        record("binomial_half", -mean / 8.0 - tail, "Bin(|X|, p), p <= 1/2")

    # Pr(E_x) exact <= (1 - p)^{p(x-1)/4}
    xs = np.arange(2, 202)
    X, P = np.meshgrid(xs, np.linspace(0.0, 0.999, max(2, points // xs.size)))
    pairs = (X - 1) // 2
    exact = pairs * np.log1p(-(P**2)) + np.where(X % 2 == 0, np.log1p(-P), 0.0)
    record("single_element_chain", P * (X - 1) / 4.0 * np.log1p(-P) - exact, "x >= 2, 0 <= p < 1")

    failed = [c.id for c in checks if not c.holds]
    if failed:
        logger.warning(f"Inégalités élémentaires en échec: {', '.join(failed)}")
    return checks


# --- Constante L ---


@lru_cache(maxsize=1)
def _series() -> tuple[float, float]:
    """Somme directe de 8 Σ_{k>=1} r^{k} jusqu'à un reste < 1e-9, et forme close 8r/(1-r)."""
    r = SERIES_RATIO
    terms: list[float] = []
    term = r
    while 8.0 * term / (1.0 - r) >= 1e-9:
        terms.append(term)
        term *= r
    direct = 8.0 * math.fsum(terms)
    return direct, 8.0 * r / (1.0 - r)


def L_default() -> int:
    """⌈8 Σ_{k>=1} (1 - 2^{-11})^{k/2}⌉, sommée numériquement."""
    direct, _ = _series()
    return math.ceil(direct)


def L_series_check() -> tuple[float, float, float]:
    """(somme directe, forme close, écart relatif)."""
    direct, closed = _series()
    return direct, closed, abs(direct - closed) / closed


# --- Décomposition de la preuve principale ---


def end_pair_bound(d1: float, d2: float, m: float, p: float, eps: float) -> LogReal:
    """(1-p)^{d1/2 - εm/8} (1-p)^{d2/2 - εm/8} pour un couple (d1, d2) des intervalles d'extrémité."""
    _require_probability(p)
    return LogReal.complement_power(p, d1 / 2 - eps * m / 8) * LogReal.complement_power(
        p, d2 / 2 - eps * m / 8
    )


def truncation_bound(n: int, p: float) -> LogReal:
    """Σ_{x>2n} (1-p)^{p(x-1)/4} = (1-p)^{np/2} / (1 - (1-p)^{p/4})."""
    _require_probability(p)
    numerator = LogReal.complement_power(p, n * p / 2)
    denominator = LogReal.of(-math.expm1(p / 4 * math.log1p(-p)))
    return numerator / denominator


def single_element_bound(x: int, p: float) -> LogReal:
    """(1-p)^{p(x-1)/4}, majorant de Pr(x ∉ A + A)."""
    return LogReal.complement_power(p, p * (x - 1) / 4)


def decomposition_audit(
    n: int, m: int, p: float, eps: float, config: AuditConfig | None = None
) -> BoundReport:
    """Chaîne (1-p)^m + m (1-p)^{m/2 - εm/2} <= (1-p)^{m/2 - εm}.

    Avec M = (2^11 + K0/2) m : si M >= n le cas « tout l'intervalle » est
    directement la borne principale ; sinon la déficience se répartit entre
    les deux extrémités (d1 + d2 = m - εm/2) ou le milieu (εm/2).
    Le rapport indique quel terme domine.
    """
    cfg = _config(config)
    main = bound_main(m, p, eps, cfg)
    M = (2**11 + cfg.K0 / 2) * m
    inputs = {"n": n, "m": m, "p": p, "eps": eps, "C": cfg.C, "K0": cfg.K0}
    details = list(main.details)
    if M >= n:
        details.append("whole_interval")
        return BoundReport("decomposition", inputs, main.value, main.hypotheses_hold, tuple(details), True)
    middle = LogReal.complement_power(p, m)
    ends = LogReal.complement_power(p, m / 2 - eps * m / 2).scale(m)
    lhs = middle + ends
    holds = lhs.log <= main.value.log + TOLERANCE * max(1.0, abs(main.value.log))
    details.append("split")
    details.append("dominant=middle" if middle.log >= ends.log else "dominant=ends")
    details.append(f"rhs={main.value.to_str()}")
    if not holds:
        logger.debug(f"Chaîne de décomposition en échec: n={n}, m={m}, p={p}, eps={eps}")
    return BoundReport("decomposition", inputs, lhs, main.hypotheses_hold, tuple(details), holds)


AUDIT_COLUMNS = (
    "n", "m", "p", "eps", "log_bound", "bound", "lower", "sandwich", "hypotheses_hold",
    "decomposition_holds",
)


@dataclass(frozen=True)
class AuditRow:
    """Résultat d'audit d'une cellule (n, m, p, ε)."""

    n: int
    m: int
    p: float
    eps: float
    main: BoundReport
    lower: LogReal
    sandwich_holds: bool
    decomposition: BoundReport

    def to_row(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "m": self.m,
            "p": self.p,
            "eps": self.eps,
            "log_bound": self.main.value.log,
            "bound": self.main.value.to_str(),
            "lower": self.lower.to_str(),
            "sandwich": self.sandwich_holds,
            "hypotheses_hold": self.main.hypotheses_hold,
            "decomposition_holds": self.decomposition.claim_holds,
        }


def audit_grid(
    cells: Iterable[tuple[int, int, float, float]], config: AuditConfig | None = None
) -> list[AuditRow]:
    """bound_main, sandwich et décomposition pour chaque cellule (n, m, p, ε)."""
    cfg = _config(config)
    rows: list[AuditRow] = []
    for n, m, p, eps in cells:
        lower, _, ok = sandwich(m, p, eps, cfg)
        rows.append(
            AuditRow(n, m, p, eps, bound_main(m, p, eps, cfg), lower, ok, decomposition_audit(n, m, p, eps, cfg))
        )
    logger.info(f"Audit de {len(rows)} cellules")
    return rows


# --- Familles de conteneurs par cellule ---

CONSTANT_GRID = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0)


@dataclass(frozen=True)
class FamilyAudit:
    """Bornes des familles de conteneurs pour une cellule (n, m, p, ε).

    X = [1, n] : d = m, T = n/m (au moins 1), |Y| = 2n - 1 et κ = DYADIC_KAPPA
    pour le terme régulier, M = n pour la borne des petits déficits.
    """

    n: int
    m: int
    p: float
    eps: float
    many: BoundReport
    many_union: UnionTermReport
    regular_union: UnionTermReport | None
    few: BoundReport
    constant: ConstantSearch

    def to_json(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "m": self.m,
            "p": self.p,
            "eps": self.eps,
            "many": self.many.to_json(),
            "many_union": self.many_union.to_json(),
            "regular_union": None if self.regular_union is None else self.regular_union.to_json(),
            "few": self.few.to_json(),
            "smallest_C": self.constant.to_json(),
        }


def audit_families(
    cells: Iterable[tuple[int, int, float, float]],
    config: AuditConfig | None = None,
    C_grid: Sequence[float] = CONSTANT_GRID,
) -> list[FamilyAudit]:
    """bound_many, termes d'union, bound_few et plus petit C pour chaque cellule."""
    cfg = _config(config)
    kappa = float(DYADIC_KAPPA)
    searches: dict[tuple[int, float, float], ConstantSearch] = {}
    audits: list[FamilyAudit] = []
    for n, m, p, eps in cells:
        T = max(n / m, 1.0)
        size_y = 2 * n - 1
        regular = union_term_regular(n, size_y, m, kappa, p, config=cfg) if size_y > m else None
        key = (m, T, eps)
        if key not in searches:
            searches[key] = smallest_constant("many", {"d": m, "T": T, "eps": eps}, C_grid, config=cfg)
        audits.append(
            FamilyAudit(
                n,
                m,
                p,
                eps,
                bound_many(m, T, eps, p, cfg),
                union_term_many(m, T, eps, p, config=cfg),
                regular,
                bound_few(n, p, config=cfg),
                searches[key],
            )
        )
    logger.debug(f"Familles auditées : {len(audits)} cellules, {len(searches)} recherches de C")
    return audits
