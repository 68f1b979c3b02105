"""Suite d'invariants à tolérance nulle, rejouée par `sumgaps selftest`.

Chaque vérification renvoie un CheckResult. Un échec signale une propriété
démontrée (ou structurelle) prise en défaut ; un avertissement signale un
écart statistique ou une affirmation d'audit qui ne tient pas aux constantes
configurées, sans faire échouer la suite.
"""

import math
from collections.abc import Callable
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Any

import numpy as np
from rich.console import Console
from rich.table import Table

from ..audit.bounds import L_series_check, elementary_inequalities, union_term_many
from ..config.schema import AuditConfig
from ..containers.regular import Phase1Mode, regular_container
from ..containers.robust import iterated_container, robust_pair_container
from ..core.errors import (
    BudgetExceeded,
    InsufficientFingerprintSupply,
    InvariantViolation,
    IterationGuardTripped,
    PreconditionViolated,
)
from ..core.rational import ceil_sqrt
from ..core.regularity import (
    DYADIC_KAPPA,
    dyadic_partition,
    pollard_size_condition,
    pollard_verify,
    regular_verify,
    robust_bruteforce,
    robustness,
    robustness_hypotheses,
    verify_partition,
)
from ..core.sets import Interval, NatSet, representation_counts
from ..montecarlo.estimate import (
    RESOLVABLE_FLOOR,
    exhaustive_miss_probability,
    lower_bound_check,
    miss_probability,
    single_element_tail,
    threshold_probe,
)
from ..utils.logger import get_logger
from ..montecarlo.grid import ExperimentGrid, run_grid
from .instances import sample_instance, sub_superset, window_instance

logger = get_logger("sumgaps.cli.selftest")

ANCHOR_CELLS = ((500, 60, 0.05), (500, 40, 0.1), (1000, 100, 0.05))
THRESHOLD_M = 400
THRESHOLD_C = (0.1, 0.5, 1.0, 2.0, 4.0, 8.0)
POLLARD_EPS = (Fraction(1, 10), Fraction(1, 5), Fraction(2, 5))
DYADIC_CASES = ((2000, 11, 0.05, 64), (4096, 16, 0.1, 256), (1500, 12, 0.25, 32), (200, 50, 0.5, 16))
ELEMENT_CELLS = ((40, 30, 0.2), (101, 60, 0.15), (300, 200, 0.1))
# 24 cellules ; à C = 1, 14 vérifient les hypothèses de bound_main
DOMINANCE_GRID = ((200, 400), (64, 100, 144), (0.45, 0.5), (0.4, 0.45))
GUARANTEE_ROOTS = (20, 22, 24)
ROBUST_CAP = 10**4
PHASE1_CAP = 2 * 10**5


@dataclass(frozen=True)
class Scale:
    """Tailles d'une exécution de la suite."""

    anchor_trials: int
    threshold_trials: int
    container_instances: int
    replays: int
    pollard_instances: int
    certificate_instances: int
    element_trials: int
    union_cells: int
    dominance_trials: int = 1_000


QUICK = Scale(2_000, 1_000, 20, 5, 200, 50, 2_000, 20, 1_000)
FULL = Scale(100_000, 10_000, 500, 5, 200, 50, 100_000, 20, 10_000)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    warnings: list[str] = field(default_factory=list)


# --- Simulation ---


def check_lower_anchor(scale: Scale, seed: int, workers: int = 1) -> CheckResult:
    """Implication événement ⇒ déficience >= m, et fréquence contre (1-p)^{⌈m/2⌉}."""
    warnings: list[str] = []
    violations = 0
    for n, m, p in ANCHOR_CELLS:
        check = lower_bound_check(n, m, p, scale.anchor_trials, seed, workers=workers)
        violations += check.violations
        if not check.exact_in_ci:
            warnings.append(
                f"(n={n}, m={m}, p={p}): {float(check.empirical.p_hat):.4f} hors de "
                f"[{check.empirical.ci_low:.4f}, {check.empirical.ci_high:.4f}] "
                f"(exact {float(check.exact):.4f})"
            )
    return CheckResult(
        "Minorant exact",
        violations == 0,
        f"{len(ANCHOR_CELLS)} cellules × {scale.anchor_trials} essais, {violations} implication(s) violée(s)",
        warnings,
    )


def check_threshold(scale: Scale, seed: int, workers: int = 1) -> CheckResult:
    probe = threshold_probe(THRESHOLD_M, THRESHOLD_C, scale.threshold_trials, seed, workers=workers)
    first, last = probe.rows[0].estimate, probe.rows[-1].estimate
    low_ok = first.p_hat >= Fraction(99, 100)
    high_ok = last.p_hat <= Fraction(1, 100)
    return CheckResult(
        "Seuil p = c/√m",
        probe.coupling_violations == 0 and low_ok and high_ok,
        f"m={THRESHOLD_M}: p̂(c=0.1)={float(first.p_hat):.4f}, p̂(c=8)={float(last.p_hat):.4f}, "
        f"{probe.coupling_violations} violation(s) du couplage",
    )


def check_single_element(scale: Scale, seed: int, workers: int = 1) -> CheckResult:
    """Produit exact = énumération exhaustive pour x <= 24, puis trois cellules simulées."""
    mismatches = []
    compared = 0
    p = Fraction(1, 3)
    for x in range(2, 25):
        for n in sorted({x // 2 + 1, x - 1, x}):
            if n < 1 or x > 2 * n:
                continue
            compared += 1
            if miss_probability(x, n, p) != exhaustive_miss_probability(x, n, p):
                mismatches.append(f"x={x}, n={n}")
    warnings = []
    for x, n, q in ELEMENT_CELLS:
        tail = single_element_tail(x, n, q, scale.element_trials, seed, workers=workers)
        if not tail.empirical.covers(float(tail.exact)):
            warnings.append(f"x={x}, n={n}, p={q}: exact {float(tail.exact):.4g} hors IC")
    return CheckResult(
        "Élément isolé",
        not mismatches,
        f"{compared} comparaisons exactes, écarts: {', '.join(mismatches) or 'aucun'}",
        warnings,
    )


def check_tail_dominance(
    scale: Scale, seed: int, workers: int = 1, config: AuditConfig | None = None
) -> CheckResult:
    """IC haut contre bound_main sur DOMINANCE_GRID.

    Seules les cellules où les hypothèses tiennent et où la borne est
    départageable peuvent échouer. Les autres sont comptées et rapportées.
    """
    cfg = config or AuditConfig()
    n_values, m_values, p_values, eps_values = DOMINANCE_GRID
    grid = ExperimentGrid(n_values, m_values, p_values, eps_values, scale.dominance_trials, seed)
    rows = run_grid(grid, cfg, workers=workers)
    resolved = [row for row in rows if "unresolvable" not in row.flags]
    holding = [row for row in resolved if row.hypotheses_hold]
    violated = [row for row in rows if "bound_violated" in row.flags]
    warnings = [
        f"(n={row.n}, m={row.m}, p={row.p}, ε={row.eps}): IC haut {row.estimate.ci_high:.4g} "
        f"> borne {row.bound.value():.4g}, hypothèses non vérifiées"
        for row in rows
        if "exceeds_bound" in row.flags and not row.hypotheses_hold and row.bound is not None
    ][:5]
    if not holding:
        warnings.append(
            f"critère vide : aucune cellule départageable ne vérifie p >= p_min à C={cfg.C:g}"
        )
    return CheckResult(
        "Queue contre bound_main",
        not violated,
        f"{len(rows)} cellules × {grid.trials} essais, {len(resolved)} départageables "
        f"(borne >= {RESOLVABLE_FLOOR:g} et >= IC d'un comptage nul), "
        f"{len(holding)} sous hypothèses, {len(violated)} violée(s)",
        warnings,
    )


# --- Conteneurs ---


@dataclass
class _Tally:
    runs: int = 0
    skipped: int = 0
    replays: int = 0
    mismatches: int = 0
    structural: list[str] = field(default_factory=list)
    guaranteed: int = 0
    guarantee_failures: int = 0

    def summary(self) -> str:
        return (
            f"{self.runs} instances ({self.skipped} hors préconditions), {self.replays} rejeux, "
            f"{self.mismatches} divergence(s), {len(self.structural)} violation(s) structurelle(s)"
        )


def _replay_all(
    tally: _Tally,
    A: NatSet,
    F: NatSet,
    Q: NatSet,
    replay: Callable[[NatSet], Any],
    rng: np.random.Generator,
    count: int,
) -> None:
    for _ in range(count):
        tally.replays += 1
        A_prime = sub_superset(A, F, rng)
        try:
            again = replay(A_prime)
            if (again.F, again.Q) != (F, Q):
                tally.mismatches += 1
        except (
            InvariantViolation,
            InsufficientFingerprintSupply,
            IterationGuardTripped,
            PreconditionViolated,
            BudgetExceeded,
        ) as e:
            logger.error(f"Rejeu en échec sur A'={list(A_prime.members)}: {e}")
            tally.mismatches += 1


def robust_suite(scale: Scale, seed: int) -> _Tally:
    rng = np.random.default_rng(seed)
    tally = _Tally()
    for _ in range(scale.container_instances):
        n = int(rng.integers(8, 25))
        inst = sample_instance(n, float(rng.uniform(0.2, 0.6)), int(rng.integers(0, 2**32)))
        beta = Fraction(int(rng.integers(1, 9)), 32)
        verified = robustness(inst.X, inst.Y, beta, ROBUST_CAP).robust is True
        try:
            result = robust_pair_container(
                inst.A, inst.X, inst.Y, beta, allow_short_supply=True, robust_verified=verified
            )
        except InvariantViolation as e:
            tally.structural.append(str(e))
            continue
        tally.runs += 1
        cap = ceil_sqrt(beta * len(inst.X))
        if result.book.max_row() > cap or result.book.max_column() > cap:
            tally.structural.append(f"n={n}: ligne/colonne gelée au-delà de {cap}")
        if len(result.F) != len(result.trace) or len(result.F) > 2 * result.steps:
            tally.structural.append(f"n={n}: |F|={len(result.F)} incohérent avec la trace")
        if result.guarantees_applicable:
            tally.guaranteed += 1
            if result.sumset_hits + len(result.Q) < result.guaranteed_value:
                tally.guarantee_failures += 1
        _replay_all(tally, inst.A, result.F, result.Q, result.replay, rng, scale.replays)
    return tally


def iterated_suite(scale: Scale, seed: int) -> _Tally:
    rng = np.random.default_rng(seed + 1)
    tally = _Tally()
    eps, L = Fraction(1, 4), Fraction(1, 8)
    for _ in range(scale.container_instances):
        n = int(rng.integers(16, 41))
        inst = sample_instance(n, float(rng.uniform(0.25, 0.5)), int(rng.integers(0, 2**32)))
        top = min(n, len(inst.Y))
        if top < 1:
            tally.skipped += 1
            continue
        d = int(rng.integers(1, top + 1))
        try:
            result = iterated_container(inst.A, Interval(1, n), d, eps, L)
        except (InsufficientFingerprintSupply, IterationGuardTripped, PreconditionViolated):
            tally.skipped += 1
            continue
        except InvariantViolation as e:
            tally.structural.append(str(e))
            continue
        tally.runs += 1
        if "oversized_fingerprint" not in result.flags and len(result.F) != result.target_size:
            tally.structural.append(f"n={n}: |F|={len(result.F)} ≠ {result.target_size}")
        _replay_all(tally, inst.A, result.F, result.Q, result.replay, rng, scale.replays)
    return tally


def regular_suite(scale: Scale, seed: int) -> _Tally:
    rng = np.random.default_rng(seed + 2)
    tally = _Tally()
    kappa, L = Fraction(1, 4), Fraction(1, 8)
    for _ in range(scale.container_instances):
        n = int(rng.integers(10, 29))
        inst = sample_instance(n, float(rng.uniform(0.15, 0.4)), int(rng.integers(0, 2**32)))
        Y = NatSet.interval(2, 2 * n)
        top = min(len(inst.Y), len(Y) // 2)
        if top < 1:
            tally.skipped += 1
            continue
        d = int(rng.integers(1, top + 1))
        try:
            result = regular_container(inst.A, inst.X, Y, kappa, d, L, Phase1Mode.EXACT, PHASE1_CAP)
        except (InsufficientFingerprintSupply, BudgetExceeded, PreconditionViolated):
            tally.skipped += 1
            continue
        except InvariantViolation as e:
            tally.structural.append(str(e))
            continue
        tally.runs += 1
        if result.book.max_column() > result.steps:
            tally.structural.append(f"n={n}: colonne de taille {result.book.max_column()} > {result.steps}")
        if "oversized_fingerprint" not in result.flags and len(result.F) != result.target_size:
            tally.structural.append(f"n={n}: |F|={len(result.F)} ≠ {result.target_size}")
        if result.guarantees_applicable:
            tally.guaranteed += 1
            if len(result.Q) < result.guaranteed_value:
                tally.guarantee_failures += 1
        replay = partial(result.replay, size_cap=PHASE1_CAP)
        _replay_all(tally, inst.A, result.F, result.Q, replay, rng, scale.replays)
    return tally


def regular_guarantee_suite(scale: Scale, seed: int) -> _Tally:
    """Fenêtres X = [1, n], Y = [n+1-w, n+w] où toutes les conditions de garantie tiennent.

    κ = 2/5, L = 2, d = w : une condition non vérifiée est une erreur
    structurelle, et |Q| < κ|X|/64 une garantie violée.
    """
    rng = np.random.default_rng(seed + 5)
    tally = _Tally()
    kappa, L = Fraction(2, 5), Fraction(2)
    for i in range(scale.container_instances):
        root = GUARANTEE_ROOTS[i % len(GUARANTEE_ROOTS)]
        n = root * root
        width = int(rng.integers(2 * root, n // 5 + 1))
        inst = window_instance(root, width, rng)
        try:
            result = regular_container(
                inst.A, inst.X, inst.Y, kappa, width, L, Phase1Mode.EXACT, PHASE1_CAP
            )
        except InvariantViolation as e:
            tally.structural.append(str(e))
            continue
        tally.runs += 1
        failed = [name for name, ok in result.conditions.items() if not ok]
        if failed:
            tally.structural.append(f"n={n}, w={width}: conditions {', '.join(failed)}")
        if result.guarantees_applicable:
            tally.guaranteed += 1
            if len(result.Q) < result.guaranteed_value:
                tally.guarantee_failures += 1
        replay = partial(result.replay, size_cap=PHASE1_CAP)
        _replay_all(tally, inst.A, result.F, result.Q, replay, rng, scale.replays)
    return tally


def check_containers(scale: Scale, seed: int) -> list[CheckResult]:
    results = []
    for name, suite in (
        ("Conteneur robuste", robust_suite),
        ("Conteneur itéré", iterated_suite),
        ("Conteneur régulier", regular_suite),
        ("Garantie régulière", regular_guarantee_suite),
    ):
        tally = suite(scale, seed)
        warnings = [f"structure: {s}" for s in tally.structural[:5]]
        if tally.runs == 0:
            warnings.append("aucune instance dans les préconditions")
        if suite is not iterated_suite:
            warnings.append(f"garantie de taille applicable sur {tally.guaranteed} instance(s)")
        results.append(
            CheckResult(
                name,
                tally.mismatches == 0 and not tally.structural and tally.guarantee_failures == 0,
                tally.summary() + f", {tally.guarantee_failures} garantie(s) violée(s)",
                warnings,
            )
        )
    return results


# --- Régularité ---


def _worst_targets(X: NatSet, size: int) -> list[int]:
    """Les `size` sommes les plus représentées dans X (adversaire de Pollard)."""
    counts = representation_counts(X)
    base = 2 * X.universe.lo
    order = sorted(range(counts.size), key=lambda i: (-int(counts[i]), i))[:size]
    return [base + i for i in order]


def check_pollard(scale: Scale, seed: int) -> CheckResult:
    rng = np.random.default_rng(seed + 3)
    universe = Interval(1, 40)
    window = universe.sum_window()
    failures = []
    checked = 0
    while checked < scale.pollard_instances:
        eps = POLLARD_EPS[checked % len(POLLARD_EPS)]
        size = int(rng.integers(4, 41))
        if not pollard_size_condition(size, eps):
            continue
        X = NatSet.from_iterable(universe, rng.choice(np.arange(1, 41), size, replace=False).tolist())
        room = min(math.floor(size / (Fraction(1, 2) + eps)), window.size())
        y_size = int(rng.integers(0, room + 1))
        if checked % 2:
            members = _worst_targets(X, y_size)
        else:
            members = rng.choice(np.arange(window.lo, window.hi + 1), y_size, replace=False).tolist()
        Y = NatSet.from_iterable(window, members)
        checked += 1
        result = pollard_verify(X, Y, eps)
        if not result.holds:
            failures.append(f"|X|={size}, |Y|={y_size}, ε={eps}: {result.lhs} < {result.rhs}")
    return CheckResult(
        "Inégalité de Pollard",
        not failures,
        f"{checked} instances (|X| <= 40), {len(failures)} échec(s)",
        failures[:5],
    )


def check_dyadic() -> CheckResult:
    problems = []
    for n, M, p, d in DYADIC_CASES:
        layers = dyadic_partition(n, M, p, d)
        check = verify_partition(layers, n, M, p, d)
        if not check.exact:
            problems.append(f"(n={n}, M={M}, p={p}): partition inexacte")
        for layer in layers[:-1]:
            if not regular_verify(layer.X, layer.Y, DYADIC_KAPPA).holds:
                problems.append(f"(n={n}, M={M}, p={p}) couche {layer.j} non {DYADIC_KAPPA}-régulière")
    return CheckResult(
        "Décomposition dyadique",
        not problems,
        f"{len(DYADIC_CASES)} cas, {len(problems)} problème(s)",
        problems[:5],
    )


def check_certificates(scale: Scale, seed: int) -> CheckResult:
    """β certifié contre la robustesse exhaustive, |X| <= 12."""
    rng = np.random.default_rng(seed + 4)
    contradictions = []
    certified = attempts = 0
    while certified < scale.certificate_instances and attempts < 50 * scale.certificate_instances:
        attempts += 1
        s = int(rng.integers(4, 13))
        X = NatSet.interval(1, s)
        window = NatSet.interval(2, 2 * s)
        d = int(rng.integers(2, s + 1))
        q = int(rng.integers(0, math.ceil(d / 2)))
        z = int(rng.integers(0, 2 * s - d + 1))
        Q = NatSet.from_iterable(X.universe, rng.choice(X.members, q, replace=False).tolist())
        Z = NatSet.from_iterable(window.universe, rng.choice(window.members, z, replace=False).tolist())
        report = robustness_hypotheses(X, Q, Z, d)
        if not report.holds or report.certificate is None:
            continue
        certified += 1
        beta = report.certificate.beta
        verdict = robust_bruteforce(X.difference(Q), window.difference(Z), beta)
        if verdict.robust is not True:
            contradictions.append(f"|X|={s}, d={d}, |Q|={q}, |Z|={z}, β={beta}")
    return CheckResult(
        "Certificat de robustesse",
        not contradictions and certified > 0,
        f"{certified} instances certifiées, {len(contradictions)} contradiction(s)",
        contradictions[:5],
    )


# --- Audits analytiques ---


def check_inequalities() -> CheckResult:
    checks = elementary_inequalities()
    failed = [c.id for c in checks if not c.holds]
    return CheckResult(
        "Inégalités élémentaires",
        not failed,
        f"{len(checks)} inégalités, échecs: {', '.join(failed) or 'aucun'}",
    )


def check_union_terms(scale: Scale, config: AuditConfig | None = None) -> CheckResult:
    """Terme d'union : décroissant et <= 1 sur sa plage ; un écart est un avertissement."""
    cfg = config or AuditConfig()
    cells = [(10.0**k, T) for k in range(3, 13) for T in (1.0, 4.0)][: scale.union_cells]
    eps = 0.25
    empty = 0
    warnings = []
    for d, T in cells:
        report = union_term_many(d, T, eps, 0.5, config=cfg)
        if "empty_range" in report.report.details:
            empty += 1
            continue
        lowest = union_term_many(d, T, eps, min(0.5, report.grid[0]), config=cfg)
        if not (report.monotone_on_grid and lowest.leq_one):
            warnings.append(
                f"d={d:.0e}, T={T:g}: monotone={report.monotone_on_grid}, <=1={lowest.leq_one}"
            )
    return CheckResult(
        "Termes d'union (C configuré)",
        True,
        f"{len(cells)} cellules, {empty} à plage vide, {len(warnings)} écart(s)",
        warnings[:5],
    )


def check_L_default() -> CheckResult:
    direct, closed, error = L_series_check()
    return CheckResult(
        "Constante L",
        error < 1e-6,
        f"somme directe {direct:.6f}, forme close {closed:.6f}, écart relatif {error:.2e}",
    )


def run_selftest(
    full: bool = False,
    seed: int = 20240611,
    workers: int = 1,
    console: Console | None = None,
    config: AuditConfig | None = None,
) -> list[CheckResult]:
    """Exécute la suite et affiche un rapport.

    Args:
        full: Tailles des critères d'acceptation (sinon tailles réduites)
        seed: Graine de base de toutes les vérifications
        workers: Processus pour les simulations
        console: Console rich (stdout par défaut)
        config: Constantes d'audit (C de bound_main et des termes d'union)

    Returns:
        Les résultats, dans l'ordre d'exécution
    """
    out = console or Console()
    scale = FULL if full else QUICK
    out.print(f"\n[bold cyan]🔍 Selftest sumgaps ({'complet' if full else 'rapide'})[/bold cyan]\n")

    steps: list[tuple[str, Callable[[], list[CheckResult]]]] = [
        ("Minorant exact", lambda: [check_lower_anchor(scale, seed, workers)]),
        ("Seuil", lambda: [check_threshold(scale, seed, workers)]),
        ("Queue contre bound_main", lambda: [check_tail_dominance(scale, seed, workers, config)]),
        ("Conteneurs", lambda: check_containers(scale, seed)),
        ("Pollard", lambda: [check_pollard(scale, seed)]),
        ("Dyadique", lambda: [check_dyadic()]),
        ("Certificats", lambda: [check_certificates(scale, seed)]),
        ("Inégalités", lambda: [check_inequalities()]),
        ("Termes d'union", lambda: [check_union_terms(scale, config)]),
        ("Élément isolé", lambda: [check_single_element(scale, seed, workers)]),
        ("Constante L", lambda: [check_L_default()]),
    ]
    results: list[CheckResult] = []
    for i, (label, step) in enumerate(steps, 1):
        out.print(f"[yellow]{i}. {label}...[/yellow]")
        for result in step():
            mark = "✓" if result.passed else "✗"
            out.print(f"   {mark} {result.name}: {result.detail}")
            for warning in result.warnings:
                out.print(f"   ⚠ {warning}")
            results.append(result)

    table = Table(title="Résumé")
    table.add_column("Vérification")
    table.add_column("Statut")
    table.add_column("Avertissements", justify="right")
    for result in results:
        status = "[green]OK[/green]" if result.passed else "[red]ÉCHEC[/red]"
        table.add_row(result.name, status, str(len(result.warnings)))
    out.print()
    out.print(table)
    if all(r.passed for r in results):
        out.print("\n[bold green]✅ Tous les invariants tiennent[/bold green]\n")
    else:
        out.print("\n[bold red]❌ Invariant(s) violé(s)[/bold red]\n")
    return results
