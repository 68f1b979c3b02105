"""Tests du chargement et de la validation de la configuration."""

import logging
from pathlib import Path

import pytest
import yaml

from sumgaps.cli.manifest import RunManifest
from sumgaps.config.loader import config_hash, get_config_path, load_config, save_config
from sumgaps.config.schema import Config, validate_config


def test_defaults(workspace):
    config = load_config()
    assert config.simulation.trials == 10_000
    assert config.simulation.seed == 20240611
    assert config.audit.C == 16.0
    assert config.audit.L is None
    assert config.audit.K == config.audit.K0 == 8192.0
    assert config.containers.phase1_mode == "exact"
    assert config.logging.level == "INFO"


@pytest.mark.parametrize(
    "data",
    [
        {"simulation": {"trials": 0}},
        {"simulation": {"confidence": 1.5}},
        {"simulation": {"seed": -1}},
        {"simulation": {"workers": True}},
        {"audit": {"C": -2}},
        {"audit": {"monotone_points": 1}},
        {"containers": {"phase1_mode": "random"}},
        {"logging": {"level": "LOUD"}},
        {"audit": [1, 2]},
    ],
)
def test_invalid_values(data):
    with pytest.raises(ValueError):
        validate_config(data)


def test_K_defaults_to_K0():
    config = validate_config({"audit": {"K0": 100}})
    assert config.audit.K == 100.0
    assert validate_config({"logging": {"level": "debug"}}).logging.level == "DEBUG"


def test_env_overrides(workspace, monkeypatch, caplog):
    monkeypatch.setenv("SUMGAPS_SEED", "7")
    monkeypatch.setenv("SUMGAPS_TRIALS", "123")
    monkeypatch.setenv("SUMGAPS_WORKERS", "abc")
    monkeypatch.setenv("SUMGAPS_LOG_LEVEL", "warning")
    with caplog.at_level(logging.WARNING, logger="sumgaps.config"):
        config = load_config()
    assert "SUMGAPS_WORKERS='abc' ignorée" in caplog.text
    assert config.simulation.seed == 7
    assert config.simulation.trials == 123
    assert config.simulation.workers == 1
    assert config.logging.level == "WARNING"


def test_workspace_config_found_from_subdirectory(workspace, monkeypatch):
    path = workspace / ".sumgaps" / "config.yaml"
    path.parent.mkdir()
    path.write_text(yaml.safe_dump({"simulation": {"trials": 42}}), encoding="utf-8")
    nested = workspace / "a" / "b"
    nested.mkdir(parents=True)
    monkeypatch.chdir(nested)
    assert get_config_path() == path.resolve()
    assert load_config().simulation.trials == 42


def test_explicit_path(workspace):
    with pytest.raises(FileNotFoundError):
        load_config(workspace / "absent.yaml")
    broken = workspace / "broken.yaml"
    broken.write_text("simulation: [", encoding="utf-8")
    with pytest.raises(ValueError):
        load_config(broken)
    scalar = workspace / "scalar.yaml"
    scalar.write_text("42\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_config(scalar)


def test_save_and_reload(workspace):
    config = Config()
    config.audit.C = 4.0
    config.simulation.trials = 500
    path = save_config(config, workspace / "saved" / "config.yaml")
    assert path.exists()
    assert path.read_text(encoding="utf-8").startswith("# Configuration sumgaps")
    reloaded = load_config(path)
    assert reloaded == config
    assert config_hash(reloaded) == config_hash(config)


def test_config_hash_tracks_values():
    base = Config()
    changed = Config()
    changed.audit.C = 8.0
    assert config_hash(base) == config_hash(Config())
    assert config_hash(base) != config_hash(changed)
    assert len(config_hash(base)) == 64


def test_manifest_round_trip(tmp_path: Path):
    manifest = RunManifest.create("verify", {"check": "pollard"}, 5, Config())
    path = manifest.with_outputs([tmp_path / "verify.json"]).write(tmp_path)
    loaded = RunManifest.read(path)
    assert loaded.outputs == ("verify.json",)
    assert loaded.same_run(manifest)
    other = RunManifest.create("verify", {"check": "dyadic"}, 5, Config())
    assert not loaded.same_run(other)


def test_invalid_seed_is_reported(workspace, monkeypatch, caplog):
    monkeypatch.setenv("SUMGAPS_SEED", "12a")
    with caplog.at_level(logging.WARNING, logger="sumgaps.config"):
        config = load_config()
    assert config.simulation.seed == 20240611
    warnings = [r for r in caplog.records if r.name == "sumgaps.config"]
    assert len(warnings) == 1 and warnings[0].levelno == logging.WARNING
    assert "SUMGAPS_SEED='12a'" in warnings[0].getMessage()
