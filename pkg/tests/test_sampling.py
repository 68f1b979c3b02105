"""Tests de l'échantillonneur reproductible."""

import numpy as np
import pytest

from sumgaps.cli.instances import missing_sums, sample_instance, sub_superset
from sumgaps.core.errors import PreconditionViolated
from sumgaps.core.sampling import RandomSpec, element_uniforms, sample
from sumgaps.core.sets import Interval, NatSet, sumset


def test_same_spec_same_set():
    spec = RandomSpec(0.3, 42, Interval(1, 500))
    assert sample(spec) == sample(spec)


def test_streams_differ():
    universe = Interval(1, 400)
    assert sample(RandomSpec(0.5, 42, universe, 0)) != sample(RandomSpec(0.5, 42, universe, 1))


def test_coupling_is_monotone_in_p():
    universe = Interval(1, 300)
    previous = sample(RandomSpec(0.0, 9, universe))
    for p in (0.05, 0.1, 0.3, 0.6, 0.9):
        current = sample(RandomSpec(p, 9, universe))
        assert previous.issubset(current)
        previous = current


def test_universes_agree_on_intersection():
    small = sample(RandomSpec(0.4, 3, Interval(10, 60)))
    large = sample(RandomSpec(0.4, 3, Interval(1, 200)))
    assert small == large.restrict(Interval(10, 60))


def test_uniform_prefix_does_not_depend_on_length():
    assert np.array_equal(element_uniforms(5, 2, 30), element_uniforms(5, 2, 80)[:30])


def test_extreme_probabilities():
    universe = Interval(3, 20)
    assert not sample(RandomSpec(0.0, 1, universe))
    assert sample(RandomSpec(1.0, 1, universe)) == NatSet.interval(3, 20)


def test_density_is_close_to_p():
    A = sample(RandomSpec(0.3, 11, Interval(1, 20_000)))
    assert abs(len(A) / 20_000 - 0.3) < 0.02


@pytest.mark.parametrize(
    "p, seed, stream",
    [(-0.1, 1, 0), (1.5, 1, 0), (0.5, -1, 0), (0.5, 2**64, 0), (0.5, 1, -3)],
)
def test_invalid_specs(p, seed, stream):
    with pytest.raises(PreconditionViolated):
        RandomSpec(p, seed, Interval(1, 10), stream)


def test_sample_instance_targets_missing_sums():
    inst = sample_instance(40, 0.2, seed=5)
    assert inst.X == NatSet.interval(1, 40)
    assert inst.A.issubset(inst.X)
    assert inst.Y.isdisjoint(sumset(inst.A))
    assert inst.Y == missing_sums(inst.A, inst.X)
    assert inst.params == {"n": 40, "p": 0.2, "seed": 5, "stream": 0}


def test_sub_superset_stays_between(rng):
    A = NatSet.from_iterable(Interval(1, 50), range(1, 51, 2))
    F = NatSet.from_iterable(Interval(1, 50), [1, 9, 25])
    for _ in range(10):
        middle = sub_superset(A, F, rng)
        assert F.issubset(middle)
        assert middle.issubset(A)
