"""Tests des conteneurs robuste et itéré."""

from fractions import Fraction

import pytest

from sumgaps.cli.instances import sample_instance, sub_superset
from sumgaps.containers.book import PairBook
from sumgaps.containers.robust import (
    RobustCase,
    fingerprint_target,
    greedy_pick,
    iterated_container,
    pad_smallest,
    robust_pair_container,
)
from sumgaps.core.errors import (
    InsufficientFingerprintSupply,
    InvariantViolation,
    PreconditionViolated,
)
from sumgaps.core.rational import ceil_sqrt
from sumgaps.core.sets import Interval, NatSet


def test_greedy_pick_prefers_smallest_on_ties():
    assert greedy_pick([3, 5, 7, 9], lambda a: a % 4) == 3
    assert greedy_pick([2, 4, 6], lambda a: 1) == 2


def test_pair_book_views():
    book = PairBook()
    book.add(1, 5)
    book.add(1, 6)
    book.add(2, 5)
    book.add(1, 5)
    assert len(book) == 3
    assert (1, 6) in book and (2, 6) not in book
    assert book.row(1) == {5, 6}
    assert book.column(5) == {1, 2}
    assert book.max_row() == 2 and book.max_column() == 2
    assert book.rows_union([1, 2]) == {5, 6}
    pruned = book.without_columns({5})
    assert len(pruned) == 1 and pruned.row_sizes() == {1: 1}
    book.check()


def test_pair_book_detects_divergent_views():
    book = PairBook()
    book.add(1, 2)
    book._size = 5
    with pytest.raises(InvariantViolation):
        book.check()


def test_container_heavy_case(single_element_instance):
    inst = single_element_instance
    result = robust_pair_container(inst.A, inst.X, inst.Y, Fraction(1, 8), allow_short_supply=True)
    assert result.case is RobustCase.DENSE_B_CONTAINER_HEAVY
    assert result.Q == NatSet.interval(2, 24)
    assert result.F.members == (1,)
    assert result.short_supply
    assert not result.guarantees_applicable


def test_sparse_case():
    X = NatSet.interval(1, 24)
    A = NatSet.from_iterable(X.universe, [1])
    Y = NatSet.from_iterable(Interval(2, 48), [48])
    result = robust_pair_container(A, X, Y, Fraction(1, 8), allow_short_supply=True)
    assert result.case is RobustCase.SPARSE_B
    assert result.Q.members == (24,)
    assert len(result.book) == 0


def test_sumset_heavy_case():
    X = NatSet.interval(1, 24)
    A = NatSet.from_iterable(X.universe, [1])
    result = robust_pair_container(A, X, NatSet.interval(2, 48), Fraction(1, 8), allow_short_supply=True)
    assert result.case is RobustCase.DENSE_B_SUMSET_HEAVY
    assert not result.Q
    assert result.sumset_hits == 1


def test_short_supply_raises(single_element_instance):
    inst = single_element_instance
    with pytest.raises(InsufficientFingerprintSupply) as excinfo:
        robust_pair_container(inst.A, inst.X, inst.Y, Fraction(1, 8))
    assert excinfo.value.available == 1
    assert excinfo.value.required == 28
    assert excinfo.value.is_usage_error


def test_robust_preconditions(single_element_instance):
    inst = single_element_instance
    with pytest.raises(PreconditionViolated):
        robust_pair_container(inst.A, inst.X, inst.Y, 0)
    outside = NatSet.from_iterable(Interval(1, 30), [30])
    with pytest.raises(PreconditionViolated):
        robust_pair_container(outside, inst.X, inst.Y, Fraction(1, 8))


@pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
def test_robust_invariants_on_random_instances(seed):
    inst = sample_instance(60, 0.3, seed)
    beta = Fraction(1, 8)
    result = robust_pair_container(inst.A, inst.X, inst.Y, beta, allow_short_supply=True)
    assert result.F.issubset(inst.A)
    assert inst.A.isdisjoint(result.Q)
    assert len(result.F) == len(result.trace) <= 2 * result.steps
    cap = ceil_sqrt(beta * len(inst.X))
    assert result.book.max_row() <= cap
    assert result.book.max_column() <= cap
    assert result.F0.issubset(result.F)


@pytest.mark.parametrize("seed", [11, 12, 13])
def test_robust_replay_is_deterministic(seed, rng):
    inst = sample_instance(80, 0.4, seed)
    result = robust_pair_container(inst.A, inst.X, inst.Y, Fraction(1, 6), allow_short_supply=True)
    for _ in range(5):
        again = result.replay(sub_superset(inst.A, result.F, rng))
        assert again.F == result.F
        assert again.Q == result.Q
        assert again.case is result.case


def test_robust_certificate_json(single_element_instance):
    inst = single_element_instance
    cert = robust_pair_container(
        inst.A, inst.X, inst.Y, Fraction(1, 8), allow_short_supply=True
    ).certificate()
    data = cert.to_json()
    assert data["lemma"] == "robust"
    assert data["case"] == "DenseB_ContainerHeavy"
    assert data["F"] == [1]
    assert data["Q"] == list(range(2, 25))
    assert data["flags"] == ["short_supply"]
    assert data["beta"] == "1/8"
    assert data["book"]["size"] == 23


def test_iterated_on_single_element():
    A = NatSet.from_iterable(Interval(1, 24), [1])
    result = iterated_container(A, Interval(1, 24), 8, Fraction(1, 4), Fraction(1, 100))
    assert result.F.members == (1,)
    assert result.Q == NatSet.interval(2, 24)
    assert result.iterations == 2
    assert [s.case for s in result.states] == ["DenseB_SumsetHeavy", "DenseB_ContainerHeavy"]
    assert result.states[0].alpha == Fraction(1, 2)
    assert result.states[0].zeta == 5
    assert result.states[0].beta == Fraction(11, 72)
    assert result.target_size == 1
    assert result.guarantees_applicable
    cert = result.certificate().to_json()
    assert cert["lemma"] == "iterated"
    assert cert["iterations"] == 2
    assert len(cert["states"]) == 2


def test_iterated_requires_supply():
    A = NatSet.from_iterable(Interval(1, 24), [1])
    with pytest.raises(InsufficientFingerprintSupply):
        iterated_container(A, Interval(1, 24), 8, Fraction(1, 4), Fraction(1, 8))


def test_iterated_preconditions():
    A = NatSet.from_iterable(Interval(1, 24), [1])
    with pytest.raises(PreconditionViolated):
        iterated_container(A, Interval(1, 24), 8, Fraction(1, 2), Fraction(1, 100))
    with pytest.raises(PreconditionViolated):
        iterated_container(A, Interval(1, 24), 30, Fraction(1, 4), Fraction(1, 100))
    full = NatSet.interval(1, 24)
    with pytest.raises(PreconditionViolated):
        iterated_container(full, Interval(1, 24), 8, Fraction(1, 4), Fraction(1, 100))


def test_iterated_replay_and_invariants(rng):
    inst = sample_instance(48, 0.35, 7)
    d = min(12, len(inst.Y))
    result = iterated_container(inst.A, Interval(1, 48), d, Fraction(1, 4), Fraction(1, 50))
    assert result.F.issubset(inst.A)
    assert inst.A.isdisjoint(result.Q)
    assert len(result.Q) >= d * (Fraction(1, 2) - Fraction(1, 4))
    again = result.replay(sub_superset(inst.A, result.F, rng))
    assert again.F == result.F
    assert again.Q == result.Q


def test_fingerprint_target_and_padding():
    assert fingerprint_target(24, 8, Fraction(1, 4), Fraction(1, 100)) == 1
    assert fingerprint_target(24, 8, Fraction(1, 4), Fraction(1, 8)) == 3
    A = NatSet.from_iterable(Interval(1, 10), [2, 4, 6, 8])
    F = NatSet.from_iterable(Interval(1, 10), [6])
    assert pad_smallest(A, F, 3).members == (2, 4, 6)
    assert pad_smallest(A, F, 1) == F
