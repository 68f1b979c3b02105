"""Tests de la ligne de commande (codes de sortie, fichiers produits)."""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from sumgaps import __version__
from sumgaps.audit.bounds import BoundReport
from sumgaps.audit.logreal import LogReal
from sumgaps.cli.instances import missing_sums
from sumgaps.cli.outputs import Instance, load_instance, read_csv, write_json
from sumgaps.core.sets import NatSet
from sumgaps.main import cli
from sumgaps.montecarlo.grid import GRID_COLUMNS


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


def _write(path: Path, inst: Instance) -> str:
    write_json(path, inst.to_json())
    return str(path)


def _read(path: Path) -> dict:
    return json.loads(path.read_text(encoding="utf-8"))


def test_version(runner, workspace):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_instance_command(runner, workspace):
    result = runner.invoke(cli, ["instance", "--n", "30", "--p", "0.3", "--seed", "5", "--out", "out"])
    assert result.exit_code == 0, result.output
    inst = load_instance(workspace / "out" / "instance.json")
    assert inst.X == NatSet.interval(1, 30)
    assert inst.Y == missing_sums(inst.A, inst.X)
    manifest = _read(workspace / "out" / "manifest.json")
    assert manifest["command"] == "instance"
    assert manifest["seed"] == 5
    assert manifest["outputs"] == ["instance.json"]


def test_verify_pollard(runner, workspace):
    X = NatSet.interval(1, 10)
    path = _write(workspace / "pollard.json", Instance(NatSet.empty(X.universe), X, X, {}))
    result = runner.invoke(cli, ["verify", "--check", "pollard", "--instance", path, "--eps", "2/5"])
    assert result.exit_code == 0, result.output
    data = _read(workspace / "results" / "verify.json")
    assert data["holds"] is True
    assert data["lhs"] == 30
    assert data["rhs"] == "8"
    assert data["size_condition"] is True


def test_verify_regular(runner, workspace, blocks_instance):
    path = _write(workspace / "blocks.json", blocks_instance)
    result = runner.invoke(cli, ["verify", "--check", "regular", "--instance", path, "--kappa", "1/100"])
    assert result.exit_code == 0, result.output
    assert "holds" in _read(workspace / "results" / "verify.json")


def test_verify_dyadic(runner, workspace):
    args = ["verify", "--check", "dyadic", "--n", "2000", "--M", "11", "--p", "0.05", "--d", "64"]
    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.output
    data = _read(workspace / "results" / "verify.json")
    assert data["exact"] and data["holds"]
    assert data["regularity_checked"] is True
    assert data["layers"][-1]["top"] is True


def test_usage_errors_exit_2(runner, workspace):
    assert runner.invoke(cli, ["verify", "--check", "dyadic", "--n", "100"]).exit_code == 2
    assert runner.invoke(cli, ["verify", "--check", "pollard"]).exit_code == 2
    broken = workspace / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    result = runner.invoke(cli, ["container", "--instance", str(broken), "--lemma", "robust"])
    assert result.exit_code == 2
    result = runner.invoke(cli, ["instance", "--n", "10", "--p", "2.0"])
    assert result.exit_code == 2


def test_container_robust(runner, workspace, single_element_instance):
    path = _write(workspace / "single.json", single_element_instance)
    result = runner.invoke(
        cli, ["container", "--instance", path, "--lemma", "robust", "--allow-short-supply"]
    )
    assert result.exit_code == 0, result.output
    data = _read(workspace / "results" / "container.json")
    assert data["lemma"] == "robust"
    assert data["case"] == "DenseB_ContainerHeavy"
    assert data["Q"] == list(range(2, 25))
    assert data["replay"] == {"count": 5, "mismatches": 0}


def test_container_short_supply_is_usage_error(runner, workspace, single_element_instance):
    path = _write(workspace / "single.json", single_element_instance)
    result = runner.invoke(cli, ["container", "--instance", path, "--lemma", "robust"])
    assert result.exit_code == 2


def test_container_iterated(runner, workspace, single_element_instance):
    path = _write(workspace / "single.json", single_element_instance)
    args = ["container", "--instance", path, "--lemma", "iterated", "--d", "8", "--L", "1/100"]
    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.output
    data = _read(workspace / "results" / "container.json")
    assert data["iterations"] == 2
    assert data["guarantees_applicable"] is True


def test_container_regular(runner, workspace, blocks_instance):
    path = _write(workspace / "blocks.json", blocks_instance)
    args = ["container", "--instance", path, "--lemma", "regular", "--d", "7", "--L", "1/8", "--out", "reg"]
    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.output
    data = _read(workspace / "reg" / "container.json")
    assert data["lemma"] == "regular"
    assert data["phase1_mode"] == "exact"
    assert data["replay"]["mismatches"] == 0
    assert not set(data["Q"]) & set(blocks_instance.A.members)


def test_simulate_outputs_are_reproducible(runner, workspace):
    args = [
        "simulate", "--n", "40", "--m", "6", "--p", "0.1", "--eps", "0.25",
        "--trials", "20", "--seed", "3", "--histogram",
    ]
    first = runner.invoke(cli, [*args, "--out", "one"])
    second = runner.invoke(cli, [*args, "--out", "two"])
    assert first.exit_code == 0, first.output
    assert second.exit_code == 0, second.output
    one, two = workspace / "one", workspace / "two"
    for name in ("simulate.csv", "simulate.json", "histogram.csv", "manifest.json"):
        assert (one / name).exists()
    assert (one / "simulate.csv").read_bytes() == (two / "simulate.csv").read_bytes()
    assert (one / "histogram.csv").read_bytes() == (two / "histogram.csv").read_bytes()
    rows = read_csv(one / "simulate.csv")
    assert tuple(rows[0]) == GRID_COLUMNS
    assert rows[0]["trials"] == "20"


def test_simulate_single_format(runner, workspace):
    args = ["simulate", "--n", "30", "--m", "4", "--p", "0.2", "--eps", "0.25", "--trials", "10",
            "--format", "json", "--out", "js"]
    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.output
    assert (workspace / "js" / "simulate.json").exists()
    assert not (workspace / "js" / "simulate.csv").exists()


def test_audit_command(runner, workspace):
    simulate = ["simulate", "--n", "1000", "--m", "40", "--p", "0.1", "--eps", "0.25", "--trials", "10"]
    assert runner.invoke(cli, simulate).exit_code == 0
    args = [
        "audit", "--n", "1000", "--m", "40", "--p", "0.1", "--eps", "0.25",
        "--points", "200", "--simulate-csv", "results/simulate.csv", "--out", "aud",
    ]
    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.output
    out = workspace / "aud"
    assert read_csv(out / "audit.csv")[0]["sandwich"] == "true"
    data = _read(out / "audit.json")
    assert all(check["holds"] for check in data["inequalities"])
    assert len(data["families"]) == 1
    assert data["L"]["relative_error"] < 1e-6
    assert (out / "audit.svg").read_text(encoding="utf-8").startswith("<svg")


def test_config_init_and_show(runner, workspace):
    result = runner.invoke(cli, ["config", "init"])
    assert result.exit_code == 0
    assert (workspace / ".sumgaps" / "config.yaml").exists()
    again = runner.invoke(cli, ["config", "init"])
    assert "--force" in again.output
    shown = runner.invoke(cli, ["config", "show"])
    assert shown.exit_code == 0
    assert "Configuration sumgaps" in shown.output
    assert "32756" in shown.output


def test_simulate_exits_one_on_violated_main_bound(runner, workspace, monkeypatch):
    def tiny(m, p, eps, config=None):
        return BoundReport("bound_main", {}, LogReal.of(1e-6), True)

    monkeypatch.setattr("sumgaps.montecarlo.grid.bound_main", tiny)
    args = ["simulate", "--n", "40", "--m", "6", "--p", "0.1", "--eps", "0.25", "--trials", "50"]
    result = runner.invoke(cli, args)
    assert result.exit_code == 1
    data = _read(workspace / "results" / "simulate.json")
    assert data["violations"][0].startswith("bound_main n=40")
