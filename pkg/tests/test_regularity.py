"""Tests de Pollard, de la robustesse, de la régularité et de la décomposition dyadique."""

import math
from fractions import Fraction

import numpy as np
import pytest

from sumgaps.core.errors import BudgetExceeded, PreconditionViolated
from sumgaps.core.regularity import (
    DYADIC_KAPPA,
    dyadic_partition,
    floor_log2,
    layer_demand,
    pollard_size_condition,
    pollard_sumset_check,
    pollard_verify,
    regular_verify,
    robust_adversarial,
    robust_bruteforce,
    robustness,
    robustness_certificate,
    robustness_hypotheses,
    verify_partition,
)
from sumgaps.core.sets import Interval, NatSet, pair_count


def test_pollard_interval_example():
    X = NatSet.interval(1, 10)
    result = pollard_verify(X, X, Fraction(2, 5))
    assert result.lhs == 30
    assert result.rhs == 8
    assert result.holds
    assert result.to_json() == {"lhs": 30, "rhs": "8", "holds": True}


def test_pollard_precondition():
    with pytest.raises(PreconditionViolated):
        pollard_verify(NatSet.interval(1, 5), NatSet.interval(1, 10), Fraction(2, 5))
    with pytest.raises(PreconditionViolated):
        pollard_verify(NatSet.interval(1, 5), NatSet.interval(1, 2), Fraction(1, 2))


def test_pollard_empty_target_holds():
    result = pollard_verify(NatSet.interval(1, 3), NatSet.empty(Interval(2, 6)), 0.25)
    assert result.holds


def test_pollard_can_fail_below_size_condition():
    X = NatSet.interval(1, 1)
    Y = NatSet.interval(2, 2)
    assert not pollard_size_condition(1, Fraction(2, 5))
    assert not pollard_verify(X, Y, Fraction(2, 5)).holds


def test_pollard_holds_on_random_instances(rng):
    checked = 0
    for _ in range(150):
        size = int(rng.integers(4, 41))
        eps = Fraction(int(rng.integers(1, 5)), 10)
        if not pollard_size_condition(size, eps):
            continue
        X = NatSet.from_iterable(Interval(1, 40), rng.choice(np.arange(1, 41), size, replace=False).tolist())
        limit = math.floor(size / (Fraction(1, 2) + eps))
        count = int(rng.integers(0, limit + 1))
        Y = NatSet.from_iterable(Interval(2, 80), rng.choice(np.arange(2, 81), count, replace=False).tolist())
        assert pollard_verify(X, Y, eps).holds
        checked += 1
    assert checked > 100


def test_pollard_sumset_check_doubles_beta():
    X = NatSet.interval(1, 10)
    assert pollard_sumset_check(X, X, Fraction(1, 5)) == pollard_verify(X, X, Fraction(2, 5))


def test_full_window_is_robust():
    X = NatSet.interval(1, 10)
    result = robust_bruteforce(X, NatSet.interval(2, 20), Fraction(1, 10))
    assert result.robust is True
    assert result.mode == "exhaustive"


def test_single_target_is_not_robust():
    X = NatSet.interval(1, 10)
    Y = NatSet.interval(2, 2)
    result = robust_bruteforce(X, Y, Fraction(1, 10))
    assert result.robust is False
    R_X, R_Y = result.witness
    remaining = pair_count(X.difference(R_X), Y.difference(R_Y))
    assert remaining < result.required
    assert result.to_json()["witness"]["R_Y"] == [2]


def test_small_beta_needs_no_removal():
    result = robust_bruteforce(NatSet.interval(1, 10), NatSet.interval(2, 20), Fraction(1, 20))
    assert result.removal_size == 0
    assert result.robust is True
    assert result.checked == 1


def test_budget_falls_back_to_adversarial():
    X = NatSet.interval(1, 30)
    Y = NatSet.interval(2, 60)
    with pytest.raises(BudgetExceeded):
        robust_bruteforce(X, Y, Fraction(1, 5), cap=10)
    result = robustness(X, Y, Fraction(1, 5), cap=10)
    assert result.mode == "adversarial"
    assert result.verdict in ("falsified", "not_falsified")


def test_adversarial_falsifies_thin_target():
    result = robust_adversarial(NatSet.interval(1, 10), NatSet.interval(2, 2), Fraction(1, 10))
    assert result.verdict == "falsified"
    assert result.robust is False


def test_robustness_certificate_value():
    cert = robustness_certificate(Fraction(3, 2), 8, Fraction(1, 2), 2)
    assert cert.beta == Fraction(5, 36)
    assert cert.to_json()["beta"] == "5/36"
    with pytest.raises(PreconditionViolated):
        robustness_certificate(1, 8, 0, 1)
    with pytest.raises(PreconditionViolated):
        robustness_certificate(Fraction(1, 2), 8, Fraction(1, 4), 0)


def test_hypotheses_on_fresh_interval():
    X = NatSet.interval(1, 12)
    report = robustness_hypotheses(X, NatSet.empty(X.universe), NatSet.empty(Interval(2, 24)), 8)
    assert report.holds
    assert report.alpha == Fraction(1, 2)
    assert report.zeta == 2
    assert report.certificate is not None
    assert report.certificate.beta == Fraction(5, 36)


def test_hypotheses_reject_non_interval():
    X = NatSet.from_iterable(Interval(1, 12), [1, 2, 3, 5])
    report = robustness_hypotheses(X, NatSet.empty(X.universe), NatSet.empty(Interval(2, 24)), 2)
    assert not report.holds
    assert report.certificate is None


def test_regular_verify_ratio():
    X = NatSet.interval(1, 10)
    Y = NatSet.interval(11, 11)
    assert regular_verify(X, Y, Fraction(1, 2)).holds
    result = regular_verify(X, Y, Fraction(3, 5))
    assert not result.holds
    assert result.min_ratio == Fraction(1, 2)
    assert result.argmin == 11


def test_regular_verify_outside_window_and_empty():
    X = NatSet.interval(1, 10)
    result = regular_verify(X, NatSet.from_iterable(Interval(2, 60), [11, 40]), Fraction(1, 100))
    assert not result.holds
    assert result.min_ratio == 0
    assert result.argmin == 40
    empty = regular_verify(X, NatSet.empty(Interval(2, 20)), 1)
    assert empty.holds and empty.min_ratio is None and empty.argmin is None


def test_floor_log2():
    assert floor_log2(Fraction(8)) == 3
    assert floor_log2(Fraction(7)) == 2
    assert floor_log2(Fraction(1, 3)) == -2
    assert floor_log2(Fraction(40)) == 5


def test_layer_demand():
    assert layer_demand(64, 0) == 16
    assert layer_demand(64, 4) == math.ceil(64 / 12)


@pytest.mark.parametrize(
    "n, M, p, d",
    [(2000, 11, 0.05, 64), (4096, 16, 0.1, 256), (1500, 12, 0.25, 32), (200, 50, 0.5, 16)],
)
def test_dyadic_partition_is_exact_and_regular(n, M, p, d):
    layers = dyadic_partition(n, M, p, d)
    check = verify_partition(layers, n, M, p, d)
    assert check.exact and check.disjoint and check.covers
    assert check.k == layers[-1].j
    assert layers[-1].top and not any(layer.top for layer in layers[:-1])
    for layer in layers[:-1]:
        assert regular_verify(layer.X, layer.Y, DYADIC_KAPPA).holds


def test_dyadic_merged_top_layer():
    layers = dyadic_partition(200, 50, 0.5, 16)
    top = layers[-1]
    assert top.X == NatSet.interval(1, 200)


def test_dyadic_preconditions():
    with pytest.raises(PreconditionViolated):
        dyadic_partition(100, 100, 0.1, 16)
    with pytest.raises(PreconditionViolated):
        dyadic_partition(100, 10, 0.1, 3)
    with pytest.raises(PreconditionViolated):
        dyadic_partition(100, 10, 0.75, 16)
