"""Tests du conteneur en trois phases (paires régulières)."""

from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from sumgaps.cli.instances import sub_superset, window_instance
from sumgaps.containers.regular import (
    Phase1Mode,
    RegularCase,
    guarantee_conditions,
    phase1_strip,
    regular_container,
    regular_target,
    strip_size,
)
from sumgaps.core.errors import BudgetExceeded, InsufficientFingerprintSupply, PreconditionViolated
from sumgaps.core.rational import ceil_log2_sqrt, exact_log2
from sumgaps.core.sets import Interval, NatSet, sumset


@pytest.mark.parametrize("mode", [Phase1Mode.EXACT, Phase1Mode.GREEDY])
def test_phase1_strips_covered_targets(mode):
    A = NatSet.from_iterable(Interval(1, 4), [1, 2])
    Y = NatSet.from_iterable(Interval(2, 8), [2, 3, 4])
    result = phase1_strip(A, Y, 1, mode, x_size=4)
    assert result.F0.members == (1, 2)
    assert not result.Y0
    assert result.rounds == ((1,), (2,))
    assert result.mode is mode


def test_phase1_stops_when_nothing_covers():
    A = NatSet.from_iterable(Interval(1, 10), [1])
    Y = NatSet.from_iterable(Interval(2, 20), [15, 16, 17])
    result = phase1_strip(A, Y, Fraction(1, 4), x_size=10)
    assert not result.F0
    assert result.Y0 == Y
    assert result.rounds == ()


def test_phase1_exact_budget():
    A = NatSet.interval(1, 30)
    Y = NatSet.from_iterable(Interval(2, 60), [59])
    with pytest.raises(BudgetExceeded) as excinfo:
        phase1_strip(A, Y, Fraction(1, 4), Phase1Mode.EXACT, 1000, x_size=9)
    assert excinfo.value.cap == 1000
    assert excinfo.value.required > 1000


def test_strip_size_and_target():
    assert strip_size(24) == 10
    assert strip_size(25) == 10
    assert regular_target(24, 14, 7, Fraction(1, 8)) == 1
    assert regular_target(100, 64, 4, Fraction(1, 2)) == 20


def test_regular_preconditions(blocks_instance):
    inst = blocks_instance
    with pytest.raises(PreconditionViolated):
        regular_container(inst.A, inst.X, inst.Y, Fraction(1, 4), 8, Fraction(1, 8))
    with pytest.raises(PreconditionViolated):
        regular_container(inst.A, inst.X, inst.Y, 0, 7, Fraction(1, 8))
    covered = NatSet.from_iterable(Interval(2, 48), [2, 3, 4, 5])
    with pytest.raises(PreconditionViolated):
        regular_container(inst.A, inst.X, covered, Fraction(1, 4), 2, Fraction(1, 8))
    with pytest.raises(InsufficientFingerprintSupply):
        regular_container(inst.A, inst.X, inst.Y, Fraction(1, 4), 7, 20)


def test_regular_structure(blocks_instance):
    inst = blocks_instance
    result = regular_container(inst.A, inst.X, inst.Y, Fraction(1, 4), 7, Fraction(1, 8))
    assert result.F.issubset(inst.A)
    assert inst.A.isdisjoint(result.Q)
    assert result.F0.issubset(result.F)
    assert result.X0 == inst.X.difference(result.F0)
    assert result.Y0.isdisjoint(sumset(result.F0))
    assert result.case in (RegularCase.SPARSE_B, RegularCase.DENSE_B)
    assert result.phase1_mode is Phase1Mode.EXACT
    assert set(result.conditions) >= {"exact_phase1", "regular_input", "deficiency"}
    assert result.conditions["deficiency"]
    cert = result.certificate().to_json()
    assert cert["lemma"] == "regular"
    assert cert["phase1_mode"] == "exact"
    assert cert["F0"] == list(result.F0.members)
    assert cert["iterations"] == len(result.phase1.rounds)


def test_regular_replay_is_deterministic(blocks_instance, rng):
    inst = blocks_instance
    result = regular_container(inst.A, inst.X, inst.Y, Fraction(1, 4), 7, Fraction(1, 8))
    for _ in range(5):
        again = result.replay(sub_superset(inst.A, result.F, rng))
        assert again.F == result.F
        assert again.Q == result.Q


def test_greedy_phase1_is_flagged(blocks_instance):
    inst = blocks_instance
    result = regular_container(
        inst.A, inst.X, inst.Y, Fraction(1, 4), 7, Fraction(1, 8), Phase1Mode.GREEDY
    )
    assert result.phase1_mode is Phase1Mode.GREEDY
    assert result.conditions["exact_phase1"] is False
    assert not result.guarantees_applicable
    assert inst.A.isdisjoint(result.Q)


def test_target_is_exact_ceiling():
    # 2 · log2(3) · 10 = 31.699...
    assert regular_target(100, 3, 1, Fraction(2)) == 32
    # log2(100/7) · √30 = 3.8365... · 5.4772... = 21.013...
    assert regular_target(30, 100, 7, Fraction(1)) == 22
    # Puissance de 2 : 3 · 2 · 4 = 24 exactement
    assert regular_target(16, 32, 8, Fraction(3)) == 24
    assert exact_log2(Fraction(8)) == 3
    assert exact_log2(Fraction(1)) == 0
    assert exact_log2(Fraction(3)) is None
    assert exact_log2(Fraction(1, 2)) is None
    assert ceil_log2_sqrt(Fraction(1, 2), Fraction(4), 17) == 5  # √17 ≈ 4.123
    assert ceil_log2_sqrt(Fraction(5), Fraction(1), 100) == 0
    with pytest.raises(ValueError):
        ceil_log2_sqrt(Fraction(1), Fraction(1, 2), 4)


def test_size_guarantee_on_window_pair():
    # Chaque y de [361, 440] a au moins 180 représentations, et 180/400 >= 2/5
    X = NatSet.interval(1, 400)
    Y = NatSet.from_iterable(Interval(2, 800), range(361, 441))
    A = NatSet.from_iterable(X.universe, range(1, 41))
    result = regular_container(A, X, Y, Fraction(2, 5), 40, Fraction(2))
    assert result.target_size == 40
    assert not result.F0 and result.Y0 == Y
    assert result.conditions["x_at_least_L"]
    assert not guarantee_conditions(replace(result, L=Fraction(401)), A)["x_at_least_L"]
    assert all(result.conditions.values()), result.conditions
    assert result.guarantees_applicable
    assert result.guaranteed_value == Fraction(5, 2)
    assert len(result.Q) >= result.guaranteed_value
    assert result.F == A


@pytest.mark.parametrize("root", [20, 22, 24])
def test_window_instances_meet_guarantee(root):
    rng = np.random.default_rng(root)
    n = root * root
    for width in (2 * root, n // 5):
        inst = window_instance(root, width, rng)
        assert len(inst.A) == 2 * root and len(inst.Y) == 2 * width
        result = regular_container(inst.A, inst.X, inst.Y, Fraction(2, 5), width, Fraction(2))
        assert result.guarantees_applicable, result.conditions
        assert len(result.Q) >= result.guaranteed_value


def test_window_instance_domain():
    rng = np.random.default_rng(0)
    with pytest.raises(PreconditionViolated):
        window_instance(19, 38, rng)
    with pytest.raises(PreconditionViolated):
        window_instance(20, 39, rng)
    with pytest.raises(PreconditionViolated):
        window_instance(20, 81, rng)
