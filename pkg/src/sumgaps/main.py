"""Point d'entrée principal de sumgaps."""

import functools
import os
from collections.abc import Callable
from fractions import Fraction
from pathlib import Path
from typing import Any

import click
import numpy as np
import yaml

from . import __version__
from .audit.bounds import (
    AUDIT_COLUMNS,
    L_series_check,
    audit_families,
    audit_grid,
    bound_main,
    elementary_inequalities,
    lower_event,
)
from .cli.instances import missing_sums, sample_instance, sub_superset
from .cli.manifest import RunManifest
from .cli.outputs import Instance, load_instance, read_csv, write_csv, write_json
from .cli.plots import Curve, EmpiricalPoint, write_svg
from .cli.selftest import run_selftest
from .config.loader import load_config, save_config
from .config.schema import LOG_LEVELS, Config
from .containers.regular import Phase1Mode, regular_container
from .containers.robust import iterated_container, robust_pair_container
from .core.errors import PreconditionViolated, SumgapsError
from .core.rational import as_fraction
from .core.regularity import (
    DYADIC_KAPPA,
    DYADIC_MIN_M,
    dyadic_partition,
    pollard_size_condition,
    pollard_verify,
    regular_verify,
    robustness,
    verify_partition,
)
from .core.sets import Interval, NatSet, sumset
from .montecarlo.estimate import deficiency_histogram, infinite_tail
from .montecarlo.grid import GRID_COLUMNS, ExperimentGrid, histogram_rows, run_suite
from .utils.logger import get_logger, setup_logger

logger = get_logger("sumgaps.main")

HISTOGRAM_COLUMNS = ("n", "p", "deficiency", "count")
FORMATS = ("csv", "json")
PLOT_P_POINTS = 60
PLOT_MAX_CURVES = 6


def initialize_workspace(force: bool = False) -> None:
    """Initialise l'environnement sumgaps dans le répertoire courant.

    Args:
        force: Si True, écrase config.yaml existant (réinitialisation complète)
    """
    workspace_dir = Path.cwd() / ".sumgaps"
    config_file = workspace_dir / "config.yaml"

    if not workspace_dir.exists():
        workspace_dir.mkdir(parents=True, exist_ok=True)
        click.echo(f"✓ Répertoire créé: {workspace_dir}")
    else:
        click.echo(f"✓ Répertoire existant: {workspace_dir}")

    if config_file.exists() and not force:
        click.echo(f"✓ Configuration existante: {config_file}")
        click.echo("  (Utilisez --force pour réinitialiser)")
        return

    if config_file.exists():
        click.echo(f"⚠  Réinitialisation forcée de {config_file}")
    save_config(Config(), config_file)
    click.echo(f"✓ Configuration {'réinitialisée' if force else 'créée'}: {config_file}")
    click.echo(f"\n📝 Éditez {config_file} pour changer les constantes et les graines")


# --- Plomberie commune ---


def _settings(ctx: click.Context) -> Config:
    """Charge la configuration et configure le journal."""
    cfg = load_config(ctx.obj.get("config_path"))
    level = ctx.obj.get("log_level") or cfg.logging.level
    setup_logger("sumgaps", level, Path(cfg.logging.file) if cfg.logging.file else None)
    return cfg


def _workers(value: int | None, cfg: Config) -> int:
    """--workers 0 = un processus par cœur."""
    workers = cfg.simulation.workers if value is None else value
    return (os.cpu_count() or 1) if workers == 0 else workers


def _formats(value: str | None) -> tuple[str, ...]:
    return FORMATS if value is None else (value,)


def _fraction(name: str, value: str) -> Fraction:
    try:
        return as_fraction(value)
    except (ValueError, ZeroDivisionError) as e:
        raise PreconditionViolated(f"--{name} invalide: {value}") from e


def _finish(
    out: Path, command: str, parameters: dict[str, Any], seed: int | None, cfg: Config, paths: list[Path]
) -> None:
    manifest = RunManifest.create(command, parameters, seed, cfg).with_outputs(paths)
    manifest.write(out)
    for path in paths:
        click.echo(f"✓ {path}")


def exit_codes(func: Callable[..., int]) -> Callable[..., None]:
    """Traduit le résultat d'une commande en code de sortie.

    0 exécution propre, 1 propriété violée, 2 entrée invalide.
    """

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> None:
        ctx = click.get_current_context()
        try:
            code = func(*args, **kwargs)
        except SumgapsError as e:
            logger.error(f"{type(e).__name__}: {e}")
            click.echo(f"Erreur: {e}", err=True)
            ctx.exit(2 if e.is_usage_error else 1)
        except (ValueError, FileNotFoundError) as e:
            click.echo(f"Erreur: {e}", err=True)
            ctx.exit(2)
        ctx.exit(code)

    return wrapper


def _grid_data(path: Path | None) -> dict[str, Any]:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise PreconditionViolated(f"Grille illisible {path}: {e}") from e
    if not isinstance(data, dict):
        raise PreconditionViolated(f"{path} doit contenir un objet")
    return data


def _build_grid(
    path: Path | None,
    inline: dict[str, tuple[Any, ...]],
    trials: int | None,
    seed: int | None,
    cfg: Config,
) -> ExperimentGrid:
    """Grille du fichier, complétée ou remplacée par les listes passées en option."""
    data = _grid_data(path)
    for key, values in inline.items():
        if values:
            data[key] = list(values)
    return ExperimentGrid.from_dict(
        data,
        trials=trials if trials is not None else int(data.get("trials", cfg.simulation.trials)),
        seed=seed if seed is not None else int(data.get("seed", cfg.simulation.seed)),
    )


def _grid_options(func: Callable[..., Any]) -> Callable[..., Any]:
    for name, kind, text in reversed(
        (
            ("--n", int, "Tailles d'univers n"),
            ("--m", int, "Seuils de déficience m"),
            ("--p", float, "Probabilités p"),
            ("--eps", float, "Valeurs de ε"),
        )
    ):
        func = click.option(name, name.lstrip("-") + "_values", type=kind, multiple=True, help=text)(func)
    return func


# --- Groupe principal ---


@click.group()
@click.option(
    "--config",
    "-c",
    "config_path",
    type=click.Path(exists=True, path_type=Path),
    help="Chemin vers le fichier de configuration",
)
@click.option(
    "--log-level",
    type=click.Choice(LOG_LEVELS, case_sensitive=False),
    help="Niveau du journal (remplace la configuration)",
)
@click.version_option(__version__, prog_name="sumgaps")
@click.pass_context
def cli(ctx: click.Context, config_path: Path | None, log_level: str | None) -> None:
    """sumgaps - éléments manquants dans les sommes d'ensembles aléatoires.

    Exemples:

        sumgaps simulate --n 500 --m 60 --p 0.05 --eps 0.25
        sumgaps container --instance instances/blocks24.json --lemma regular --d 7 --L 1/8
        sumgaps verify --check dyadic --n 2000 --M 11 --p 0.05 --d 64
        sumgaps audit --grid instances/grid.yaml --simulate-csv results/simulate.csv
        sumgaps selftest --full
    """
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path
    ctx.obj["log_level"] = log_level


@cli.command()
@click.option("--grid", "grid_path", type=click.Path(exists=True, path_type=Path), help="Grille JSON/YAML")
@_grid_options
@click.option("--c", "c_values", type=float, multiple=True, help="Constantes c du seuil p = c/√m")
@click.option("--M", "M_values", type=int, multiple=True, help="Seuils M de la fenêtre médiane")
@click.option("--x", "x_values", type=int, multiple=True, help="Éléments x isolés")
@click.option("--histogram", is_flag=True, help="Écrit la distribution de la déficience")
@click.option("--infinite", is_flag=True, help="Ajoute la réduction de ℕ à [2n] (n = ⌈2m/p⌉)")
@click.option("--seed", type=int, help="Graine de base")
@click.option("--trials", type=int, help="Nombre d'essais par cellule")
@click.option("--workers", type=int, help="Processus (0 = un par cœur)")
@click.option("--confidence", type=float, help="Niveau des intervalles")
@click.option("--out", type=click.Path(path_type=Path), default=Path("results"), show_default=True)
@click.option("--format", "fmt", type=click.Choice(FORMATS), help="Format unique (défaut: les deux)")
@click.pass_context
@exit_codes
def simulate(
    ctx: click.Context,
    grid_path: Path | None,
    n_values: tuple[int, ...],
    m_values: tuple[int, ...],
    p_values: tuple[float, ...],
    eps_values: tuple[float, ...],
    c_values: tuple[float, ...],
    M_values: tuple[int, ...],
    x_values: tuple[int, ...],
    histogram: bool,
    infinite: bool,
    seed: int | None,
    trials: int | None,
    workers: int | None,
    confidence: float | None,
    out: Path,
    fmt: str | None,
) -> int:
    """Estime les queues de déficience sur une grille (n, m, p, ε)."""
    cfg = _settings(ctx)
    inline = {"n": n_values, "m": m_values, "p": p_values, "eps": eps_values,
              "c": c_values, "M": M_values, "x": x_values}
    grid = _build_grid(grid_path, inline, trials, seed, cfg)
    level = cfg.simulation.confidence if confidence is None else confidence
    procs = _workers(workers, cfg)

    report = run_suite(grid, cfg.audit, level, procs)
    data: dict[str, Any] = {"grid": grid.to_json(), **report.to_json()}
    if infinite:
        data["infinite"] = [
            infinite_tail(m, p, eps, grid.trials, grid.seed, level, procs, cfg.audit).to_json()
            for m in grid.m_values
            for p in grid.p_values
            for eps in grid.eps_values
            if 0.0 < p < 1.0
        ]

    formats = _formats(fmt)
    paths: list[Path] = []
    if "csv" in formats:
        paths.append(write_csv(out / "simulate.csv", GRID_COLUMNS, (row.to_row() for row in report.rows)))
    if "json" in formats:
        paths.append(write_json(out / "simulate.json", data))
    if histogram:
        rows = [
            {"n": n, "p": p, **row}
            for n in grid.n_values
            for p in grid.p_values
            for row in histogram_rows(deficiency_histogram(n, p, grid.trials, grid.seed, procs))
        ]
        paths.append(write_csv(out / "histogram.csv", HISTOGRAM_COLUMNS, rows))

    parameters = {**grid.to_json(), "confidence": level, "histogram": histogram, "infinite": infinite}
    _finish(out, "simulate", parameters, grid.seed, cfg, paths)
    for violation in report.violations:
        click.echo(f"✗ {violation}", err=True)
    return 1 if report.violations else 0


def _interval_of(X: NatSet) -> Interval:
    members = X.members
    if not members or members[-1] - members[0] + 1 != len(members):
        raise PreconditionViolated("La procédure itérée demande un intervalle X")
    return Interval(members[0], members[-1])


def _spot_replays(
    inst: Instance, F: NatSet, Q: NatSet, replay: Callable[[NatSet], Any], count: int, seed: int
) -> int:
    """Nombre de rejeux sur A' = F ∪ S dont (F, Q) diffère."""
    rng = np.random.default_rng(seed)
    mismatches = 0
    for _ in range(count):
        try:
            again = replay(sub_superset(inst.A, F, rng))
        except SumgapsError as e:
            logger.warning(f"Rejeu interrompu: {e}")
            mismatches += 1
            continue
        if (again.F, again.Q) != (F, Q):
            mismatches += 1
    return mismatches


@cli.command()
@click.option("--instance", "instance_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--lemma", type=click.Choice(("robust", "iterated", "regular")), required=True)
@click.option("--beta", default="1/8", show_default=True, help="β (procédure robuste)")
@click.option("--d", "d", type=int, help="Déficit visé (défaut: déduit de l'instance)")
@click.option("--eps", default="1/4", show_default=True, help="ε (procédure itérée)")
@click.option("--kappa", default="1/4", show_default=True, help="κ (procédure régulière)")
@click.option("--L", "L", help="Constante de taille de l'empreinte (défaut: configuration)")
@click.option("--phase1", type=click.Choice([m.value for m in Phase1Mode]), help="Recherche de la phase I")
@click.option("--allow-short-supply", is_flag=True, help="Tolère |A| sous 2⌈√(|X|/β)⌉")
@click.option("--replays", type=int, default=5, show_default=True, help="Rejeux de contrôle")
@click.option("--seed", type=int, help="Graine des rejeux")
@click.option("--out", type=click.Path(path_type=Path), default=Path("results"), show_default=True)
@click.pass_context
@exit_codes
def container(
    ctx: click.Context,
    instance_path: Path,
    lemma: str,
    beta: str,
    d: int | None,
    eps: str,
    kappa: str,
    L: str | None,
    phase1: str | None,
    allow_short_supply: bool,
    replays: int,
    seed: int | None,
    out: Path,
) -> int:
    """Construit un certificat (F, Q) et le rejoue sur des A' intermédiaires."""
    cfg = _settings(ctx)
    inst = load_instance(instance_path)
    base_seed = cfg.simulation.seed if seed is None else seed
    ell = _fraction("L", L) if L is not None else as_fraction(cfg.audit.resolved_L())
    parameters: dict[str, Any] = {"instance": str(instance_path), "lemma": lemma, "replays": replays}

    if lemma == "robust":
        b = _fraction("beta", beta)
        verified = robustness(inst.X, inst.Y, b, cfg.containers.robust_cap).robust is True
        result: Any = robust_pair_container(
            inst.A, inst.X, inst.Y, b, allow_short_supply=allow_short_supply, robust_verified=verified
        )
        replay: Callable[[NatSet], Any] = result.replay
        parameters.update(beta=str(b), robust_verified=verified, allow_short_supply=allow_short_supply)
    elif lemma == "iterated":
        X = _interval_of(inst.X)
        missing_count = len(missing_sums(inst.A, NatSet.interval(X.lo, X.hi)))
        target = d if d is not None else min(X.size(), missing_count)
        e = _fraction("eps", eps)
        result = iterated_container(inst.A, X, target, e, ell)
        replay = result.replay
        parameters.update(d=target, eps=str(e), L=str(ell))
    else:
        k = _fraction("kappa", kappa)
        target = d if d is not None else min(len(inst.Y.difference(sumset(inst.A))), len(inst.Y) // 2)
        mode = Phase1Mode(phase1 or cfg.containers.phase1_mode)
        cap = cfg.containers.phase1_size_cap
        result = regular_container(inst.A, inst.X, inst.Y, k, target, ell, mode, cap)
        replay = functools.partial(result.replay, size_cap=cap)
        parameters.update(d=target, kappa=str(k), L=str(ell), phase1=mode.value)

    mismatches = _spot_replays(inst, result.F, result.Q, replay, replays, base_seed)
    data = result.certificate().to_json()
    data["replay"] = {"count": replays, "mismatches": mismatches}
    path = write_json(out / "container.json", data)
    _finish(out, "container", parameters, base_seed, cfg, [path])
    click.echo(f"Cas {data['case']}: |F|={len(result.F)}, |Q|={len(result.Q)}")
    if mismatches:
        click.echo(f"✗ {mismatches} rejeu(x) divergent(s)", err=True)
    return 1 if mismatches else 0


def _verify_dyadic(n: int | None, M: int | None, p: float | None, d: int | None) -> tuple[dict[str, Any], bool]:
    if None in (n, M, p, d):
        raise PreconditionViolated("--n, --M, --p et --d sont requis pour --check dyadic")
    assert n is not None and M is not None and p is not None and d is not None
    layers = dyadic_partition(n, M, p, d)
    check = verify_partition(layers, n, M, p, d)
    checked = M >= DYADIC_MIN_M
    summary = []
    regular = True
    for layer in layers:
        entry: dict[str, Any] = {
            "j": layer.j, "size_x": len(layer.X), "size_y": len(layer.Y), "d": layer.d, "top": layer.top,
        }
        if checked and not layer.top:
            res = regular_verify(layer.X, layer.Y, DYADIC_KAPPA)
            entry["regularity"] = res.to_json()
            regular = regular and res.holds
        summary.append(entry)
    holds = check.exact and regular
    data = {
        "check": "dyadic",
        "instance": {"n": n, "M": M, "p": p, "d": d},
        "holds": holds,
        "exact": check.exact,
        "disjoint": check.disjoint,
        "covers": check.covers,
        "k": check.k,
        "k_below_log_d": check.k_below_log_d,
        "kappa": str(DYADIC_KAPPA),
        "regularity_checked": checked,
        "layers": summary,
    }
    return data, holds


@cli.command()
@click.option(
    "--check", "check", type=click.Choice(("pollard", "robust", "regular", "dyadic")), required=True
)
@click.option("--instance", "instance_path", type=click.Path(exists=True, path_type=Path))
@click.option("--eps", default="1/4", show_default=True, help="ε (Pollard)")
@click.option("--beta", default="1/8", show_default=True, help="β (robustesse)")
@click.option("--kappa", default="1/4", show_default=True, help="κ (régularité)")
@click.option("--n", "n", type=int, help="n (dyadique)")
@click.option("--M", "M", type=int, help="M (dyadique)")
@click.option("--p", "p", type=float, help="p (dyadique)")
@click.option("--d", "d", type=int, help="d (dyadique)")
@click.option("--out", type=click.Path(path_type=Path), default=Path("results"), show_default=True)
@click.pass_context
@exit_codes
def verify(
    ctx: click.Context,
    check: str,
    instance_path: Path | None,
    eps: str,
    beta: str,
    kappa: str,
    n: int | None,
    M: int | None,
    p: float | None,
    d: int | None,
    out: Path,
) -> int:
    """Vérifie Pollard, la robustesse, la régularité ou la décomposition dyadique."""
    cfg = _settings(ctx)
    violated = False
    if check == "dyadic":
        data, holds = _verify_dyadic(n, M, p, d)
        violated = not holds
        parameters: dict[str, Any] = {"check": check, **data["instance"]}
    else:
        if instance_path is None:
            raise PreconditionViolated(f"--instance est requis pour --check {check}")
        inst = load_instance(instance_path)
        parameters = {"check": check, "instance": str(instance_path)}
        data = {"check": check, "instance": inst.params}
        if check == "pollard":
            e = _fraction("eps", eps)
            res = pollard_verify(inst.X, inst.Y, e)
            proven = pollard_size_condition(len(inst.X), e)
            data.update(holds=res.holds, lhs=res.lhs, rhs=str(res.rhs), size_condition=proven)
            violated = proven and not res.holds
            parameters["eps"] = str(e)
        elif check == "robust":
            b = _fraction("beta", beta)
            robust = robustness(inst.X, inst.Y, b, cfg.containers.robust_cap)
            data.update(
                holds=robust.robust,
                lhs=robust.witness_count,
                rhs=str(robust.required),
                **robust.to_json(),
            )
            parameters["beta"] = str(b)
        else:
            k = _fraction("kappa", kappa)
            regular = regular_verify(inst.X, inst.Y, k)
            data.update(
                holds=regular.holds,
                lhs=None if regular.min_ratio is None else str(regular.min_ratio),
                rhs=str(k),
                argmin=regular.argmin,
            )
            parameters["kappa"] = str(k)
    path = write_json(out / "verify.json", data)
    _finish(out, "verify", parameters, None, cfg, [path])
    click.echo(f"{'✓' if data['holds'] else '✗'} {check}: holds={data['holds']}")
    return 1 if violated else 0


def _audit_plot(
    out: Path, cells: list[tuple[int, int, float, float]], simulate_csv: Path | None
) -> Path | None:
    """Courbes de bound_main et du minorant, points empiriques d'un CSV de simulate."""
    pairs = sorted({(m, eps) for _, m, _, eps in cells})[:PLOT_MAX_CURVES]
    if not pairs:
        return None
    ps = np.linspace(0.005, 0.5, PLOT_P_POINTS)
    curves = [
        Curve(f"borne m={m}, ε={eps:g}", [(float(p), bound_main(m, float(p), eps).value) for p in ps])
        for m, eps in pairs
    ]
    curves += [
        Curve(f"minorant m={m}", [(float(p), lower_event(m, float(p))) for p in ps], dashed=True)
        for m in sorted({m for m, _ in pairs})
    ]
    points = []
    if simulate_csv is not None:
        for row in read_csv(simulate_csv):
            points.append(
                EmpiricalPoint(
                    f"n={row['n']}, m={row['m']}",
                    float(row["p"]),
                    float(row["p_hat"]),
                    float(row["ci_low"]),
                    float(row["ci_high"]),
                )
            )
    return write_svg(out / "audit.svg", curves, points, "Queue de déficience : bornes et estimations")


@cli.command()
@click.option("--grid", "grid_path", type=click.Path(exists=True, path_type=Path), help="Grille JSON/YAML")
@_grid_options
@click.option("--simulate-csv", type=click.Path(exists=True, path_type=Path), help="Points empiriques")
@click.option("--points", type=int, help="Densité des grilles d'inégalités")
@click.option("--out", type=click.Path(path_type=Path), default=Path("results"), show_default=True)
@click.option("--format", "fmt", type=click.Choice(FORMATS), help="Format unique (défaut: les deux)")
@click.pass_context
@exit_codes
def audit(
    ctx: click.Context,
    grid_path: Path | None,
    n_values: tuple[int, ...],
    m_values: tuple[int, ...],
    p_values: tuple[float, ...],
    eps_values: tuple[float, ...],
    simulate_csv: Path | None,
    points: int | None,
    out: Path,
    fmt: str | None,
) -> int:
    """Audite les chaînes de bornes sur une grille et les inégalités élémentaires."""
    cfg = _settings(ctx)
    inline = {"n": n_values, "m": m_values, "p": p_values, "eps": eps_values}
    grid = _build_grid(grid_path, inline, None, None, cfg)
    cells = list(grid.cells())
    density = cfg.audit.grid_points if points is None else points

    rows = audit_grid(cells, cfg.audit)
    families = audit_families(cells, cfg.audit)
    inequalities = elementary_inequalities(density)
    direct, closed, error = L_series_check()
    failed = [c.id for c in inequalities if not c.holds]
    broken = [row for row in rows if not row.sandwich_holds]

    formats = _formats(fmt)
    paths: list[Path] = []
    if "csv" in formats:
        paths.append(write_csv(out / "audit.csv", AUDIT_COLUMNS, (row.to_row() for row in rows)))
    if "json" in formats:
        data = {
            "cells": [
                {"main": row.main.to_json(), "decomposition": row.decomposition.to_json(), **row.to_row()}
                for row in rows
            ],
            "families": [family.to_json() for family in families],
            "inequalities": [c.to_json() for c in inequalities],
            "L": {"direct": direct, "closed": closed, "relative_error": error},
        }
        paths.append(write_json(out / "audit.json", data))
    plot = _audit_plot(out, cells, simulate_csv)
    if plot is not None:
        paths.append(plot)

    parameters = {**grid.to_json(), "points": density, "simulate_csv": str(simulate_csv) if simulate_csv else None}
    _finish(out, "audit", parameters, None, cfg, paths)
    for check_id in failed:
        click.echo(f"✗ inégalité {check_id}", err=True)
    for row in broken:
        click.echo(f"✗ encadrement n={row.n} m={row.m} p={row.p}", err=True)
    return 1 if failed or broken else 0


@cli.command()
@click.option("--n", "n", type=int, required=True, help="X = [1, n]")
@click.option("--p", "p", type=float, required=True, help="Probabilité d'inclusion")
@click.option("--seed", type=int, help="Graine de l'échantillon")
@click.option("--stream", type=int, default=0, show_default=True, help="Flux du générateur")
@click.option("--out", type=click.Path(path_type=Path), default=Path("results"), show_default=True)
@click.pass_context
@exit_codes
def instance(ctx: click.Context, n: int, p: float, seed: int | None, stream: int, out: Path) -> int:
    """Génère une instance (A, X, Y) : Y = sommes manquantes de A."""
    cfg = _settings(ctx)
    base_seed = cfg.simulation.seed if seed is None else seed
    if n < 1:
        raise PreconditionViolated(f"n={n} < 1", {"n": n})
    inst = sample_instance(n, p, base_seed, stream)
    path = write_json(out / "instance.json", inst.to_json())
    _finish(out, "instance", {"n": n, "p": p, "stream": stream}, base_seed, cfg, [path])
    click.echo(f"|A|={len(inst.A)}, |Y|={len(inst.Y)}")
    return 0


@cli.command()
@click.option("--full", is_flag=True, help="Tailles des critères d'acceptation (plus long)")
@click.option("--seed", type=int, help="Graine de base")
@click.option("--workers", type=int, help="Processus (0 = un par cœur)")
@click.pass_context
@exit_codes
def selftest(ctx: click.Context, full: bool, seed: int | None, workers: int | None) -> int:
    """Rejoue la suite d'invariants à tolérance nulle."""
    cfg = _settings(ctx)
    results = run_selftest(
        full=full,
        seed=cfg.simulation.seed if seed is None else seed,
        workers=_workers(workers, cfg),
        config=cfg.audit,
    )
    return 0 if all(r.passed for r in results) else 1


@cli.group()
def config() -> None:
    """Gestion de la configuration."""
    pass


@config.command("init")
@click.option("--force", is_flag=True, help="Force la réinitialisation même si déjà initialisé")
def config_init(force: bool) -> None:
    """Initialise l'environnement sumgaps dans le répertoire courant."""
    initialize_workspace(force=force)


@config.command("show")
@click.pass_context
def config_show(ctx: click.Context) -> None:
    """Affiche la configuration actuelle."""
    try:
        cfg = load_config(ctx.obj.get("config_path"))
    except (ValueError, FileNotFoundError) as e:
        click.echo(f"Erreur: {e}", err=True)
        ctx.exit(2)

    click.echo("\n=== Configuration sumgaps ===\n")
    click.echo("--- Simulation ---")
    click.echo(f"Essais: {cfg.simulation.trials}")
    click.echo(f"Niveau de confiance: {cfg.simulation.confidence}")
    click.echo(f"Graine: {cfg.simulation.seed}")
    click.echo(f"Processus: {cfg.simulation.workers}")

    click.echo("\n--- Audit ---")
    click.echo(f"C: {cfg.audit.C}")
    click.echo(f"L: {cfg.audit.L if cfg.audit.L is not None else f'{cfg.audit.resolved_L():g} (série)'}")
    click.echo(f"K0: {cfg.audit.K0}, K: {cfg.audit.K}")
    click.echo(f"Points de grille: {cfg.audit.grid_points} (monotonie: {cfg.audit.monotone_points})")

    click.echo("\n--- Conteneurs ---")
    click.echo(f"Budget de robustesse: {cfg.containers.robust_cap}")
    click.echo(f"Budget de la phase I: {cfg.containers.phase1_size_cap} ({cfg.containers.phase1_mode})")

    click.echo("\n--- Journal ---")
    click.echo(f"Niveau: {cfg.logging.level}")
    click.echo(f"Fichier: {cfg.logging.file or 'aucun'}")
    click.echo()


if __name__ == "__main__":
    cli()
