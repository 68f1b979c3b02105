"""Fixtures partagées : générateurs à graine fixe et espace de travail isolé."""

from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest

from sumgaps.cli.outputs import Instance
from sumgaps.core.sets import Interval, NatSet


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def random_natset(rng: np.random.Generator) -> Callable[[int, int, float], NatSet]:
    """Fabrique de sous-ensembles aléatoires de [lo, hi] (densité donnée)."""

    def make(lo: int, hi: int, density: float) -> NatSet:
        universe = Interval(lo, hi)
        return NatSet.from_mask(universe, rng.random(universe.size()) < density)

    return make


@pytest.fixture
def workspace(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    """Répertoire courant et HOME isolés : aucune configuration utilisateur n'est lue."""
    home = tmp_path / "home"
    home.mkdir()
    monkeypatch.setenv("HOME", str(home))
    for variable in (
        "SUMGAPS_SEED",
        "SUMGAPS_TRIALS",
        "SUMGAPS_WORKERS",
        "SUMGAPS_CONFIDENCE",
        "SUMGAPS_LOG_LEVEL",
    ):
        monkeypatch.delenv(variable, raising=False)
    work = tmp_path / "work"
    work.mkdir()
    monkeypatch.chdir(work)
    return work


@pytest.fixture
def single_element_instance() -> Instance:
    """A = {1} dans [1, 24], Y = sommes manquantes de A."""
    X = NatSet.interval(1, 24)
    A = NatSet.from_iterable(X.universe, [1])
    Y = NatSet.interval(2, 48).difference(NatSet.from_iterable(Interval(2, 48), [2]))
    return Instance(A, X, Y, {"name": "single"})


@pytest.fixture
def blocks_instance() -> Instance:
    """A = [1, 6] ∪ [19, 24] : sommes manquantes [13, 19] ∪ [31, 37]."""
    X = NatSet.interval(1, 24)
    A = NatSet.from_iterable(X.universe, [*range(1, 7), *range(19, 25)])
    Y = NatSet.from_iterable(Interval(2, 48), [*range(13, 20), *range(31, 38)])
    return Instance(A, X, Y, {"name": "blocks"})
