"""Tests des estimations Monte Carlo et des grilles d'expériences."""

from fractions import Fraction

import pytest

from sumgaps.audit.bounds import BoundReport
from sumgaps.audit.logreal import LogReal
from sumgaps.core.errors import BudgetExceeded, PreconditionViolated
from sumgaps.montecarlo.estimate import (
    clopper_pearson,
    deficiency_histogram,
    estimate_tail,
    exhaustive_miss_probability,
    infinite_tail,
    lower_bound_check,
    middle_coverage,
    TailEstimate,
    miss_probability,
    resolvable,
    single_element_tail,
    threshold_probe,
    trial_ranges,
)
from sumgaps.montecarlo.grid import ExperimentGrid, _cell_flags, histogram_rows, run_suite


def test_clopper_pearson_reference_values():
    low, high = clopper_pearson(5, 10)
    assert low == pytest.approx(0.1871, abs=1e-4)
    assert high == pytest.approx(0.8129, abs=1e-4)
    low, high = clopper_pearson(0, 10)
    assert low == 0.0
    assert high == pytest.approx(1 - 0.025**0.1, rel=1e-9)
    assert clopper_pearson(10, 10)[1] == 1.0


@pytest.mark.parametrize("events, trials, confidence", [(-1, 10, 0.95), (11, 10, 0.95), (0, 0, 0.95), (1, 10, 1.0)])
def test_clopper_pearson_rejects_invalid(events, trials, confidence):
    with pytest.raises(PreconditionViolated):
        clopper_pearson(events, trials, confidence)


def test_trial_ranges_cover_in_order():
    assert trial_ranges(10, 1) == [(0, 10)]
    ranges = trial_ranges(10, 2)
    assert ranges[0][0] == 0 and ranges[-1][1] == 10
    assert all(a[1] == b[0] for a, b in zip(ranges, ranges[1:]))


def test_estimate_tail_is_reproducible():
    first = estimate_tail(60, 8, 0.15, 200, 7)
    assert first == estimate_tail(60, 8, 0.15, 200, 7)
    assert first.trials == 200
    assert first.p_hat == Fraction(first.events, 200)
    assert first.ci_low <= float(first.p_hat) <= first.ci_high


def test_estimate_tail_independent_of_workers():
    serial = estimate_tail(50, 6, 0.2, 64, 3, workers=1)
    parallel = estimate_tail(50, 6, 0.2, 64, 3, workers=2)
    assert serial.events == parallel.events


def test_estimate_tail_extreme_p():
    assert estimate_tail(20, 40, 0.0, 10, 1).events == 10
    assert estimate_tail(20, 1, 1.0, 10, 1).events == 10
    assert estimate_tail(20, 2, 1.0, 10, 1).events == 0


def test_estimate_tail_flags_and_errors():
    assert estimate_tail(30, 25, 0.1, 5, 1).flags == ("out_of_range",)
    with pytest.raises(PreconditionViolated):
        estimate_tail(30, 5, 1.5, 10, 1)
    with pytest.raises(PreconditionViolated):
        estimate_tail(30, 5, 0.1, 0, 1)
    with pytest.raises(PreconditionViolated):
        estimate_tail(30, 5, 0.1, 10, -1)


def test_lower_bound_check_implication():
    check = lower_bound_check(50, 10, 0.1, 300, 5)
    assert check.implies_tail
    assert check.violations == 0
    assert check.exact == Fraction(9, 10) ** 5
    with pytest.raises(PreconditionViolated):
        lower_bound_check(4, 10, 0.1, 10, 5)


def test_threshold_probe_is_coupled():
    probe = threshold_probe(25, (2.0, 0.5, 1.0), 200, 9)
    assert probe.coupling_violations == 0
    events = {row.c: row.estimate.events for row in probe.rows}
    assert events[0.5] >= events[1.0] >= events[2.0]
    assert [row.c for row in probe.rows] == [2.0, 0.5, 1.0]
    with pytest.raises(PreconditionViolated):
        threshold_probe(4, (3.0,), 10, 1)


def test_middle_coverage_vacuous():
    result = middle_coverage(10, 5, 0.5, 20, 1)
    assert result.vacuous
    assert result.interval is None
    assert result.empirical.events == 0
    assert "vacuous" in result.empirical.flags


def test_middle_coverage_interval():
    result = middle_coverage(200, 2, 0.5, 50, 1)
    assert not result.vacuous
    assert result.interval == (9, 391)
    assert 0.0 <= result.bound.value() <= 1.0


@pytest.mark.parametrize("x, n", [(2, 5), (7, 5), (10, 8), (17, 30), (40, 30)])
def test_miss_probability_matches_enumeration(x, n):
    p = Fraction(1, 3)
    assert miss_probability(x, n, p) == exhaustive_miss_probability(x, n, p)


def test_exhaustive_miss_probability_limits():
    with pytest.raises(BudgetExceeded):
        exhaustive_miss_probability(60, 50, 0.2)
    with pytest.raises(PreconditionViolated):
        exhaustive_miss_probability(1, 50, 0.2)


def test_single_element_tail():
    tail = single_element_tail(30, 40, 0.2, 300, 4)
    assert tail.exact == miss_probability(30, 40, 0.2)
    assert tail.bound_valid
    assert float(tail.exact) <= tail.closed_bound.value()
    assert not single_element_tail(60, 40, 0.2, 10, 4).bound_valid


def test_infinite_tail():
    result = infinite_tail(5, 0.5, 0.25, 50, 2)
    assert result.n == 20
    assert result.upper >= result.estimate.ci_high
    assert result.to_json()["n"] == 20
    with pytest.raises(PreconditionViolated):
        infinite_tail(5, 1.0, 0.25, 50, 2)


def test_histogram_counts_all_trials():
    histogram = deficiency_histogram(20, 0.3, 100, 6)
    assert sum(histogram.values()) == 100
    assert list(histogram) == sorted(histogram)
    rows = histogram_rows(histogram)
    assert rows[0] == {"deficiency": min(histogram), "count": histogram[min(histogram)]}


def test_grid_from_dict():
    grid = ExperimentGrid.from_dict({"n": 100, "m": [10], "p": [0.1], "eps": [0.25], "trials": 5}, seed=3)
    assert grid.n_values == (100,)
    assert grid.trials == 5 and grid.seed == 3
    assert len(grid) == 1
    with pytest.raises(PreconditionViolated):
        ExperimentGrid.from_dict({"n": ["x"]})
    with pytest.raises(PreconditionViolated):
        ExperimentGrid.from_dict({"p": [1.5]})


def test_run_suite_tables():
    grid = ExperimentGrid(
        n_values=(40,),
        m_values=(6,),
        p_values=(0.0, 0.1),
        eps_values=(0.25,),
        trials=50,
        seed=8,
        c_values=(0.5, 1.0),
        M_values=(2,),
        x_values=(10,),
    )
    report = run_suite(grid)
    assert len(report.rows) == 2
    zero, positive = report.rows
    assert "no_bound" in zero.flags
    assert zero.estimate.events == 50
    assert "below_threshold" in positive.flags
    assert len(report.lower) == 2
    assert len(report.threshold) == 1
    assert len(report.middle) == 1 and report.middle[0][3].vacuous
    assert len(report.element) == 2
    assert report.violations == []
    assert report.to_json()["violations"] == []


def test_resolvable_floor():
    # IC haut d'un comptage nul sur 200 essais : 1 - 0.025^(1/200) ≈ 0.0183
    assert not resolvable(LogReal.of(0.01), 200)
    assert resolvable(LogReal.of(0.02), 200)
    assert resolvable(LogReal.of(0.004), 1000)
    assert not resolvable(LogReal.of(5e-4), 10**6)


def test_cell_flags_upper_ci_against_bound():
    estimate = TailEstimate.from_counts(5, 200)
    assert estimate.ci_low < 0.05 < estimate.ci_high
    flags = _cell_flags(40, 6, 0.1, estimate, LogReal.of(0.05), True, 200)
    assert "exceeds_bound" in flags and "bound_violated" in flags
    flags = _cell_flags(40, 6, 0.1, estimate, LogReal.of(0.05), False, 200)
    assert "below_threshold" in flags and "bound_violated" not in flags


def test_cell_flags_unresolvable_bound_is_not_violated():
    estimate = TailEstimate.from_counts(0, 200)
    flags = _cell_flags(40, 6, 0.1, estimate, LogReal.of(0.01), True, 200)
    assert "unresolvable" in flags and "exceeds_bound" in flags
    assert "bound_violated" not in flags
    flags = _cell_flags(40, 6, 0.1, estimate, LogReal.of(0.05), True, 200)
    assert flags == ()


def _tiny_bound(m, p, eps, config=None):
    return BoundReport("bound_main", {"m": m, "p": p, "eps": eps}, LogReal.of(1e-6), True)


def test_run_suite_reports_violated_main_bound(monkeypatch):
    monkeypatch.setattr("sumgaps.montecarlo.grid.bound_main", _tiny_bound)
    grid = ExperimentGrid(n_values=(40,), m_values=(6,), p_values=(0.1,), eps_values=(0.25,), trials=50)
    report = run_suite(grid)
    assert "bound_violated" in report.rows[0].flags
    assert any(v.startswith("bound_main n=40 m=6 p=0.1") for v in report.violations)
    assert report.to_json()["violations"] == report.violations
