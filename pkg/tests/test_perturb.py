import math
import warnings
from fractions import Fraction

import numpy as np
import pytest

from betaopt.errors import NotShadowable, PreconditionFailed
from betaopt.numkit import Enclosure, EventuallyPeriodicWord, solve_h_equals_one
from betaopt.orbits import make_orbit
from betaopt.perturb import (
    REFUTED,
    VERIFIED,
    admissibility_window,
    adversarial_perturbation,
    beta_near,
    build_perturbed,
    leading_zero_count,
    locking_check,
    locking_potential,
    perturbation_coefficient,
    perturbation_constants_beta,
    perturbation_constants_expanding,
    shadow_orbit,
    shadow_upper,
    verify_maximizer,
)
from betaopt.potentials import Constant, DistancePower, pair_witness_potential

CUBIC = 2.4811943040920


@pytest.fixture(scope="module")
def z_orbit(cubic):
    return make_orbit(cubic, (1,), "U")


@pytest.fixture(scope="module")
def xy_orbit(cubic):
    return make_orbit(cubic, (0, 1), "U")


@pytest.mark.parametrize("eps", [1e-2, 1e-3, 1e-4])
def test_shadow_fixed_point_closed_form(cubic, z_orbit, eps):
    gamma = beta_near(CUBIC - eps)
    g = float(gamma)
    rep = shadow_orbit(cubic, gamma, z_orbit)
    assert rep.orbit_gamma.values[0] == pytest.approx(1 / (g - 1), abs=1e-12)
    assert rep.distances[0] == pytest.approx(1 / (g - 1) - 1 / (CUBIC - 1), rel=1e-6)
    assert rep.within_bounds and rep.card_preserved


def test_shadow_period_two_closed_form(cubic, xy_orbit):
    gamma = beta_near(CUBIC - 1e-3)
    g = float(gamma)
    rep = shadow_orbit(cubic, gamma, xy_orbit)
    assert sorted(rep.orbit_gamma.values) == pytest.approx(sorted([g / (g * g - 1), 1 / (g * g - 1)]), abs=1e-12)
    assert rep.within_bounds


def test_shadow_of_zero_is_zero(cubic):
    rep = shadow_orbit(cubic, beta_near(2.3), make_orbit(cubic, (0,), "U"))
    assert rep.distances[0] == 0 and rep.s is None


def test_shadow_upper_formula():
    assert shadow_upper(3.0, 2.0) == pytest.approx(1 * 4 / 3)


def test_shadow_rejects_far_gamma(cubic):
    # (1)^inf is only admissible for gamma >= 2
    with pytest.raises(NotShadowable):
        shadow_orbit(cubic, beta_near(1.9), make_orbit(cubic, (1,), "U"))
    with pytest.raises(PreconditionFailed):
        shadow_orbit(cubic, beta_near(2.6), make_orbit(cubic, (1,), "U"))


def test_leading_zero_count(cubic):
    assert leading_zero_count(make_orbit(cubic, (1,))) == 0
    assert leading_zero_count(make_orbit(cubic, (0, 1))) == 1
    assert leading_zero_count(make_orbit(cubic, (0, 0, 1, 0, 1))) == 2
    with pytest.raises(PreconditionFailed):
        leading_zero_count(make_orbit(cubic, (0,)))


def test_constants_for_fixed_point(cubic, z_orbit):
    k = perturbation_constants_beta(cubic, z_orbit, 1.0)
    z = 1 / (CUBIC - 1)
    x = CUBIC - 2
    y = CUBIC * x - 1
    by_hand = min(min(abs(z - 1 / CUBIC), abs(z - 2 / CUBIC)) / 3, min(abs(z - x), abs(z - y), 1 - z) / 2)
    assert k.p == 1
    assert k.r == pytest.approx(by_hand, rel=1e-9)
    assert k.r == pytest.approx(0.0437, abs=1e-4)
    assert k.branch == "avoids critical orbit"
    assert k.K_beta == pytest.approx(1 / (CUBIC - 1))
    assert k.r > 0 and k.C2 > 0 and k.C1 >= 1 and k.c < CUBIC - 1
    assert k.s == pytest.approx(CUBIC**-2)


def test_constants_for_period_two(cubic, xy_orbit):
    k = perturbation_constants_beta(cubic, xy_orbit, 1.0)
    x, y = CUBIC / (CUBIC**2 - 1), 1 / (CUBIC**2 - 1)
    d_disc = min(abs(p - q) for p in (x, y) for q in (1 / CUBIC, 2 / CUBIC))
    assert k.branch == "meets critical orbit"
    assert k.r == pytest.approx(min(d_disc / 3, abs(x - y) / 4), rel=1e-9)
    assert k.p == 2


@pytest.mark.parametrize("word", [(1,), (0, 1)])
def test_window_matches_exact_root(cubic, word):
    # the largest rotation is the binding constraint; it becomes admissible
    # exactly where h_gamma(largest rotation) = 1
    orbit = make_orbit(cubic, word, "U")
    top = max(orbit.rotations())
    root = solve_h_equals_one(EventuallyPeriodicWord.periodic(top), Enclosure(1.01, 3))
    assert admissibility_window(cubic, orbit) == pytest.approx(CUBIC - root.mid(), abs=1e-9)


def test_window_caps_c(cubic, xy_orbit):
    k = perturbation_constants_beta(cubic, xy_orbit)
    assert k.window == pytest.approx(CUBIC - (1 + 5**0.5) / 2, abs=1e-9)
    assert k.c == pytest.approx((CUBIC - 1) / 2)
    assert k.M == pytest.approx((CUBIC - k.c) ** 2 / (CUBIC * (CUBIC - k.c - 1) ** 2))


def test_constants_preconditions(two, cubic):
    with pytest.raises(PreconditionFailed):
        perturbation_constants_beta(two, make_orbit(two, (0, 1)))
    with pytest.raises(PreconditionFailed):
        perturbation_constants_beta(cubic, make_orbit(cubic, (1,)), alpha=1.5)


def test_coefficient_and_trivial_perturbations(cubic, z_orbit):
    k = perturbation_constants_beta(cubic, z_orbit, 1.0)
    gamma = beta_near(CUBIC - 1e-3)
    assert perturbation_coefficient(k, CUBIC, float(gamma), 1.0) == pytest.approx(2 * k.C1 * 1e-3**0.5, rel=1e-6)
    assert perturbation_coefficient(k, CUBIC, CUBIC, 1.0) == 0
    phi = Constant(0.3)
    assert build_perturbed(phi, k, cubic, gamma, z_orbit) is phi


def test_perturbed_seminorm(cubic, z_orbit):
    k = perturbation_constants_beta(cubic, z_orbit, 1.0)
    gamma = beta_near(CUBIC - 1e-4)
    rep = shadow_orbit(cubic, gamma, z_orbit)
    phi = DistancePower((float(z_orbit.values[0]),), -1.0, 1.0)
    out = build_perturbed(phi, k, cubic, gamma, rep.orbit_gamma)
    assert out.seminorm_bound == pytest.approx(1 + 2 * k.C1 * 1e-4**0.5, rel=1e-6)


def test_verify_distance_potential(cubic, xy_orbit):
    phi = DistancePower(tuple(xy_orbit.values), -1.0, 1.0)
    v = verify_maximizer(cubic, phi, xy_orbit, max_period=8, depth=12)
    assert v.verdict == VERIFIED
    assert v.best_rival_average.hi < 0


def test_verify_refutes_pair_on_witness_potential(cubic, xy_orbit):
    phi = pair_witness_potential(cubic)
    v = verify_maximizer(cubic, phi, xy_orbit, max_period=8, depth=12)
    assert v.verdict == REFUTED
    assert v.target_average.contains(-0.5) or abs(v.target_average.mid() + 0.5) < 1e-12
    assert v.best_rival_average.lo >= -1e-12


def test_locking_potential_examples(two):
    zero = make_orbit(two, (0,), "U")
    phi_t = locking_potential(Constant(0.0), zero, 1.0)
    assert phi_t.eval(0.25) == pytest.approx(-0.25)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        assert locking_potential(Constant(0.0), zero, 0.0).eval(0.4) == 0
    assert caught


def test_adversarial_perturbation_norm(cubic, z_orbit):
    psi = adversarial_perturbation(z_orbit, 0.3, 1.0)
    assert psi.holder_norm_bound() == pytest.approx(0.3)
    assert np.argmax(psi.eval(np.linspace(0, 1, 1001))) == pytest.approx(675, abs=1)


def test_locking_zero_delta_trivially_passes(cubic, xy_orbit):
    phi_t = locking_potential(Constant(0.0), xy_orbit, 1.0)
    rep = locking_check(cubic, phi_t, xy_orbit, 0.0, trials=5, max_period=6, depth=8)
    assert rep.all_pass and rep.passes == 5


def test_locking_small_delta_at_fixed_point_zero(two):
    zero = make_orbit(two, (0,), "U")
    phi_t = locking_potential(Constant(0.0), zero, 1.0)
    rep = locking_check(two, phi_t, zero, 0.1, trials=10, max_period=6, depth=8)
    assert rep.all_pass
    assert rep.empirical_C > 0


HAND_PACKS = {
    (Fraction(0),): dict(p=1, Delta=math.inf, r=0.25, D=0.2, L1=194.25, L2=26.25, C=82425.0),
    (Fraction(1, 3), Fraction(2, 3)): dict(
        p=2,
        Delta=1 / 3,
        r=1 / 12,
        D=1 / 13,
        L1=1 + 13 / 12 + 192,
        L2=25 + 13 / 12,
        C=(25 + 13 / 12) * (3 + 1 + 13 / 12 + 192) * 48,
    ),
    (Fraction(1, 7), Fraction(2, 7), Fraction(4, 7)): dict(
        p=3,
        Delta=1 / 7,
        r=1 / 28,
        D=1 / 29,
        L1=1 + 29 / 28 + 192,
        L2=25 + 29 / 28,
        C=(25 + 29 / 28) * (4 + 1 + 29 / 28 + 192) * 112,
    ),
}


@pytest.mark.parametrize("orbit", list(HAND_PACKS), ids=["zero", "thirds", "sevenths"])
def test_expanding_packs(orbit):
    got = perturbation_constants_expanding(2, orbit, 1.0).as_dict()
    for key, want in HAND_PACKS[orbit].items():
        assert got[key] == pytest.approx(want, rel=1e-12), key


def test_expanding_C_grows_with_period():
    for orbit in HAND_PACKS:
        k = perturbation_constants_expanding(2, orbit)
        slope = k.L2 * (2 * 2 / k.r) ** k.alpha
        assert slope > 0
        assert k.C == pytest.approx(max(1.0, slope * (1 + k.p + k.L1)))


def test_expanding_rejects_non_orbits():
    with pytest.raises(PreconditionFailed):
        perturbation_constants_expanding(2, (Fraction(1, 3), Fraction(1, 7)))
    with pytest.raises(PreconditionFailed):
        perturbation_constants_expanding(2, (Fraction(1, 2),))
