import itertools
import math

import numpy as np
import pytest

from betaopt.errors import BudgetExceeded
from betaopt.orbits import (
    enumerate_periodic_orbits,
    holder_constant,
    make_orbit,
    min_interpoint_distance,
    orbit_average,
    q_bracket,
    set_distance,
)
from betaopt.potentials import Constant, identity, random_trig
from betaopt.shift import critical_point

CUBIC = 2.4811943040920


def mobius(n):
    out, m, p = 1, n, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            out = -out
        p += 1
    return -out if m > 1 else out


def necklaces(k, n):
    return sum(mobius(d) * k ** (n // d) for d in range(1, n + 1) if n % d == 0) // n


def brute_orbits(digits_max, upper_word, p, strict):
    """Lyndon words of length p whose rotations compare below the periodic upper word."""
    ref = upper_word * (4 * p // len(upper_word) + 4)
    out = []
    for w in itertools.product(range(digits_max + 1), repeat=p):
        rots = [w[i:] + w[:i] for i in range(p)]
        if min(rots) != w or rots.count(w) > 1:
            continue
        ok = True
        for r in rots:
            s = (r * (4 * len(ref)))[: len(ref)]
            if s > ref or (strict and s == ref):
                ok = False
        if ok:
            out.append(w)
    return out


@pytest.mark.parametrize("p", range(1, 11))
def test_binary_counts_match_necklace_formula(two, p):
    t = [o for o in enumerate_periodic_orbits(two, 10, "T") if o.period == p]
    u = [o for o in enumerate_periodic_orbits(two, 10, "U") if o.period == p]
    assert len(u) == necklaces(2, p)
    assert len(t) == necklaces(2, p) - (1 if p == 1 else 0)


@pytest.mark.parametrize("p", range(1, 10))
def test_golden_orbits_match_brute_force(golden, p):
    for tag, strict in (("T", True), ("U", False)):
        got = sorted(o.word for o in enumerate_periodic_orbits(golden, 9, tag) if o.period == p)
        assert got == brute_orbits(1, (1, 0), p, strict)


@pytest.mark.parametrize("p", range(1, 7))
def test_cubic_orbits_match_brute_force(cubic, p):
    # pi*(1) = pi(1) = 2(10)^inf here; the reference word starts with the
    # preperiod so compare against the periodic tail with the 2 prepended
    got = sorted(o.word for o in enumerate_periodic_orbits(cubic, 6, "T") if o.period == p)
    ref = (2,) + (1, 0) * (4 * p + 4)
    want = []
    for w in itertools.product(range(3), repeat=p):
        rots = [w[i:] + w[:i] for i in range(p)]
        if min(rots) != w or rots.count(w) > 1:
            continue
        if all((r * len(ref))[: len(ref)] < ref for r in rots):
            want.append(w)
    assert got == want


def test_examples_period_two(two, golden):
    assert [o.word for o in enumerate_periodic_orbits(two, 2, "T") if o.period == 2] == [(0, 1)]
    u = enumerate_periodic_orbits(golden, 2, "U")
    assert [o.word for o in u] == [(0,), (0, 1)]
    assert u[1].contains_one


def test_orbit_points_and_average(cubic):
    o = make_orbit(cubic, (1, 0))
    assert o.word == (0, 1)
    x, y = CUBIC / (CUBIC**2 - 1), 1 / (CUBIC**2 - 1)
    assert sorted(o.values) == pytest.approx(sorted([x, y]))
    assert orbit_average(identity(), o).contains((x + y) / 2) or abs(
        orbit_average(identity(), o).mid() - (x + y) / 2
    ) < 1e-14
    assert o.label == "(01)"


def test_make_orbit_rejects_non_primitive(two):
    with pytest.raises(ValueError):
        make_orbit(two, (0, 1, 0, 1))


def test_min_interpoint_distance(cubic):
    pts = [critical_point(cubic, m) for m in range(3)]
    x = CUBIC - 2
    y = CUBIC * x - 1
    assert min_interpoint_distance(pts) == pytest.approx(min(abs(x - y), 1 - x, 1 - y))
    assert min_interpoint_distance(pts) == pytest.approx(0.28726, abs=1e-5)
    assert min_interpoint_distance([0.1]) == math.inf
    assert min_interpoint_distance([0.05, 0.95], "circle") == pytest.approx(0.1)


def test_set_distance():
    assert set_distance([0.1, 0.5], [0.45, 0.9]) == pytest.approx(0.05)


def test_holder_constant():
    assert holder_constant(2, 1.0) == 1.0
    assert holder_constant(4, 0.5) == 1.0


def test_bracket_for_identity_at_two(two):
    qb = q_bracket(two, identity(), 10, 8)
    assert qb.contains(1.0)
    assert qb.width < 1e-10
    assert qb.witness.word == (1,)
    # fixed point at 1 only exists for U; the best T orbit is 0 1^7
    assert qb.lower_T.contains(7 / 8) or abs(qb.lower_T.mid() - 7 / 8) < 1e-12


def test_bracket_for_constant(cubic):
    qb = q_bracket(cubic, Constant(0.5), 10, 8)
    assert qb.contains(0.5)
    assert qb.width < 1e-10


@pytest.mark.parametrize("seed", range(3))
def test_bracket_is_consistent(golden, seed):
    qb = q_bracket(golden, random_trig(seed), 12, 10)
    assert qb.diagnostics["consistent"]
    o = qb.witness
    assert float(qb.lower.lo) <= float(orbit_average(random_trig(seed), o).hi)
    samples = np.linspace(0, 1, 4001)
    assert float(qb.upper.hi) <= np.max(random_trig(seed).eval(samples)) + 1e-9


def test_orbit_budget(two):
    with pytest.raises(BudgetExceeded):
        enumerate_periodic_orbits(two, 20, "T", budget=1000)
