"""Tests des bornes fermées, des termes d'union et de LogReal."""

import math

import pytest

from sumgaps.audit.bounds import (
    L_default,
    L_series_check,
    audit_families,
    audit_grid,
    bound_few,
    bound_main,
    bound_many,
    decomposition_audit,
    elementary_inequalities,
    end_pair_bound,
    lower_event,
    sandwich,
    single_element_bound,
    smallest_constant,
    truncation_bound,
    union_term_many,
    union_term_regular,
)
from sumgaps.audit.logreal import LogReal
from sumgaps.config.schema import AuditConfig
from sumgaps.core.errors import PreconditionViolated
from sumgaps.montecarlo.estimate import miss_probability

SMALL_C = AuditConfig(C=0.5, L=2.0)


def test_bound_main_value():
    report = bound_main(100, 0.1, 0.25)
    assert report.value.log == pytest.approx(25 * math.log(0.9))
    assert report.inputs["C"] == 16.0
    assert not report.hypotheses_hold
    assert "p_below_range" in report.details


def test_bound_main_with_small_constant():
    report = bound_main(10**6, 0.1, 0.25, SMALL_C)
    assert report.hypotheses_hold
    assert report.details == (f"p_min={0.5 * 2 / math.sqrt(0.25**3 * 10**6):.6g}",)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.5])
def test_bounds_reject_p_outside_open_unit(p):
    with pytest.raises(PreconditionViolated):
        bound_main(10, p, 0.25)
    with pytest.raises(PreconditionViolated):
        bound_many(10, 2, 0.25, p)
    with pytest.raises(PreconditionViolated):
        bound_few(100, p)


def test_bound_above_half_is_flagged():
    report = bound_main(10**6, 0.7, 0.25, SMALL_C)
    assert not report.hypotheses_hold
    assert "p_above_half" in report.details


def test_bound_many_and_few_values():
    many = bound_many(1000, 2, 0.1, 0.2)
    assert many.value.log == pytest.approx((500 - 200) * math.log(0.8))
    few = bound_few(2**12, 0.3, d=4)
    assert few.value.log == pytest.approx(2 * math.log(0.7))
    assert few.inputs["d"] == 4
    assert bound_few(8192 * 4, 0.3).inputs["d"] == 4.0


def test_sandwich_lower_below_main():
    lower, upper, ok = sandwich(100, 0.1, 0.25)
    assert ok
    assert lower == lower_event(100, 0.1)
    assert lower.log == pytest.approx(50 * math.log(0.9))
    assert lower <= upper


def test_elementary_inequalities_hold():
    checks = elementary_inequalities(2000)
    assert {c.id for c in checks} >= {
        "one_minus_p_squared",
        "quarter_p_squared",
        "chernoff_to_complement",
        "binomial_half",
        "single_element_chain",
    }
    assert all(c.holds for c in checks), [c.to_json() for c in checks if not c.holds]
    with pytest.raises(PreconditionViolated):
        elementary_inequalities(100, aux_grid=[1.0])


def test_L_default():
    assert L_default() == 32756
    direct, closed, error = L_series_check()
    assert error < 1e-6
    assert closed == pytest.approx(32756.0, abs=0.01)
    assert AuditConfig().resolved_L() == 32756.0
    assert SMALL_C.resolved_L() == 2.0


def test_decomposition_split():
    report = decomposition_audit(10**7, 400, 0.4, 0.25)
    assert report.claim_holds
    assert "split" in report.details
    whole = decomposition_audit(100, 400, 0.4, 0.25)
    assert "whole_interval" in whole.details
    assert whole.value == bound_main(400, 0.4, 0.25).value


def test_union_term_empty_range():
    report = union_term_many(100, 1, 0.25, 0.3)
    assert "empty_range" in report.report.details
    assert report.grid == ()
    assert report.monotone_on_grid


def test_union_term_small_family():
    report = union_term_many(10**6, 1, 0.25, 0.3, config=SMALL_C)
    assert not report.family_empty
    assert len(report.grid) == SMALL_C.monotone_points
    assert report.to_json()["grid"]["hi"] == 0.5


def test_union_term_regular_checks_inputs():
    with pytest.raises(PreconditionViolated):
        union_term_regular(100, 10, 10, 0.25, 0.3)
    report = union_term_regular(10**6, 1000, 10, 0.25, 0.3, L=1.0, config=SMALL_C)
    assert report.report.id == "union_term_regular"
    assert report.report.inputs["L"] == 1.0


def test_smallest_constant():
    with pytest.raises(PreconditionViolated):
        smallest_constant("unknown", {}, [1.0])
    search = smallest_constant("many", {"d": 100, "T": 1, "eps": 0.25}, [16.0])
    assert search.C is None
    assert search.details == ("C=16: empty_range",)


def test_end_pair_and_truncation():
    value = end_pair_bound(10, 20, 100, 0.1, 0.25)
    assert value.log == pytest.approx((15 - 6.25) * math.log(0.9))
    tail = truncation_bound(100, 0.2)
    expected = 0.8 ** 10 / (1 - 0.8**0.05)
    assert tail.value() == pytest.approx(expected)


@pytest.mark.parametrize("x, p", [(2, 0.5), (9, 0.3), (50, 0.1), (200, 0.05)])
def test_single_element_bound_dominates_exact(x, p):
    assert float(miss_probability(x, x, p)) <= single_element_bound(x, p).value() + 1e-15


def test_audit_grid_rows():
    rows = audit_grid([(1000, 40, 0.1, 0.25), (10**7, 400, 0.4, 0.25)])
    assert len(rows) == 2
    assert all(row.sandwich_holds for row in rows)
    assert rows[1].decomposition.claim_holds
    assert set(rows[0].to_row()) >= {"log_bound", "sandwich", "decomposition_holds"}


def test_audit_families_per_cell():
    families = audit_families([(1000, 40, 0.1, 0.25), (1000, 40, 0.2, 0.25)], C_grid=[16.0])
    assert len(families) == 2
    first = families[0]
    assert first.many.inputs["T"] == 25.0
    assert first.few.inputs["M"] == 1000
    assert first.regular_union is not None
    assert first.constant is families[1].constant
    assert first.constant.details == ("C=16: empty_range",)
    data = first.to_json()
    assert data["smallest_C"]["C"] is None
    assert data["many_union"]["id"] == "union_term_many"


def test_logreal_underflow_and_arithmetic():
    tiny = LogReal.complement_power(0.5, 5000)
    assert tiny.value() == 0.0
    assert tiny.to_str().endswith("e-1506")
    assert (LogReal.of(2.0) * LogReal.of(3.0)).value() == pytest.approx(6.0)
    assert (LogReal.of(2.0) + LogReal.of(3.0)).value() == pytest.approx(5.0)
    assert (LogReal.of(6.0) / LogReal.of(3.0)).value() == pytest.approx(2.0)
    assert LogReal.zero() + LogReal.one() == LogReal.one()
    assert LogReal.of(0.5).minimum(LogReal.one()) == LogReal.of(0.5)
    assert LogReal.zero().to_str() == "0"
    assert LogReal.power(0.0, 0.0) == LogReal.one()
    with pytest.raises(PreconditionViolated):
        LogReal.of(-1.0)
    with pytest.raises(PreconditionViolated):
        LogReal.one() / LogReal.zero()
