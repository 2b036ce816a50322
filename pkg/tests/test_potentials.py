import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betaopt.potentials import (
    Affine,
    Constant,
    DistancePower,
    PiecewiseAffine,
    identity,
    pair_witness_potential,
    potential_from_spec,
    random_trig,
    seminorm_check,
)

CUBIC = 2.4811943040920

FAMILIES = [
    identity(),
    Constant(0.3),
    Affine(0.2, -1.5),
    DistancePower((0.2, 0.7), -1.0, 0.5),
    DistancePower((0.0,), -1.0, 1.0, "circle"),
    random_trig(3, 8, 1.0),
    random_trig(5, 4, 2.0, 0.5),
    pair_witness_potential(CUBIC),
]


@pytest.mark.parametrize("phi", FAMILIES, ids=lambda p: p.family_tag)
def test_interval_bounds_enclose_samples(phi):
    rng = np.random.default_rng(0)
    a = rng.uniform(0, 1, 300)
    b = np.minimum(1, a + rng.uniform(0, 0.3, 300))
    for lo, hi in zip(a, b):
        xs = np.linspace(lo, hi, 50)
        v = phi.eval(xs)
        assert np.max(v) <= phi.sup_on(lo, hi) + 1e-12
        assert np.min(v) >= phi.inf_on(lo, hi) - 1e-12


@pytest.mark.parametrize("phi", FAMILIES, ids=lambda p: p.family_tag)
def test_seminorm_bound_dominates_observed_ratio(phi):
    rng = np.random.default_rng(1)
    xs = rng.uniform(0, 1, 5000)
    ys = np.clip(xs + rng.normal(0, 0.05, 5000), 0, 1)
    assert seminorm_check(phi, xs, ys) <= phi.seminorm_bound + 1e-9


@pytest.mark.parametrize("seed", range(5))
def test_random_trig_has_requested_norm(seed):
    phi = random_trig(seed, 8, 0.7)
    assert phi.holder_norm_bound() == pytest.approx(0.7)


def test_pair_witness_knots():
    phi = pair_witness_potential(CUBIC)
    x = CUBIC / (CUBIC**2 - 1)
    y = 1 / (CUBIC**2 - 1)
    assert phi.eval(y) == pytest.approx(-1)
    assert phi.eval((x + 1) / CUBIC) == pytest.approx(-2)
    assert phi.eval(x) == pytest.approx(0)
    assert phi.eval(0.0) == 0 and phi.eval(1.0) == 0


def test_distance_power_circle_metric():
    phi = DistancePower((0.0,), -1.0, 1.0, "circle")
    assert phi.eval(0.9) == pytest.approx(-0.1)
    assert phi.eval(0.5) == pytest.approx(-0.5)


def test_spec_strings():
    assert potential_from_spec("id").eval(0.25) == 0.25
    assert potential_from_spec("const:2").eval(0.1) == 2
    d = potential_from_spec("dist:0.5;coef=-2")
    assert d.eval(0.25) == pytest.approx(-0.5)
    with pytest.raises(ValueError):
        potential_from_spec("nope")


def test_sum_and_scale():
    phi = identity() + Constant(1.0)
    assert phi.eval(0.5) == pytest.approx(1.5)
    assert (-identity()).sup_on(0.0, 1.0) == pytest.approx(0.0)
    assert identity().scaled(3).seminorm_bound == pytest.approx(3)


@settings(max_examples=200)
@given(
    st.lists(st.floats(0, 1), min_size=1, max_size=4, unique=True),
    st.floats(0, 1),
    st.floats(0, 0.5),
)
def test_distance_power_interval_bounds(points, a, width):
    phi = DistancePower(tuple(points), -1.0, 0.5)
    b = min(1.0, a + width)
    xs = np.linspace(a, b, 64)
    v = phi.eval(xs)
    assert np.max(v) <= phi.sup_on(a, b) + 1e-12
    assert np.min(v) >= phi.inf_on(a, b) - 1e-12


def test_piecewise_affine_requires_sorted_knots():
    with pytest.raises(ValueError):
        PiecewiseAffine((0.0, 0.5, 0.4, 1.0), (0, 1, 0, 0))
