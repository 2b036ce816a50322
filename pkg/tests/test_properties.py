"""Randomized identities for the coding maps, cylinders and beta-shifts."""

from fractions import Fraction

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from betaopt.dynamics import BetaParam, expand, t_map
from betaopt.errors import DigitOutOfRange, PrecisionInsufficient
from betaopt.numkit import EventuallyPeriodicWord
from betaopt.potentials import random_trig
from betaopt.shift import cylinder_of, in_beta_shift, is_admissible

CASES = settings(max_examples=1000)

LADDER = [
    BetaParam.from_rational(Fraction(3, 2)),
    BetaParam.golden(),
    BetaParam.from_rational(2),
    BetaParam.from_polynomial((1, -2, -2, 2)),
    BetaParam.from_rational(Fraction(5, 2)),
]
betas = st.sampled_from(LADDER)
points = st.fractions(min_value=0, max_value=1, max_denominator=10**6)


def _digits(beta, x, n):
    try:
        return expand(beta, x, n)
    except PrecisionInsufficient:
        assume(False)


@CASES
@given(betas, points, st.integers(1, 24))
def test_shift_of_code_is_code_of_image(beta, x, n):
    assume(x < 1)
    head = _digits(beta, x, n + 1)
    assert _digits(beta, t_map(beta, x), n) == head[1:]


@CASES
@given(betas, points, st.integers(1, 30))
def test_retraction_error(beta, x, n):
    b = float(beta)
    digits = _digits(beta, x, n)
    value = sum(d * b ** -(i + 1) for i, d in enumerate(digits))
    assert 0 <= float(x) - value + 1e-15
    assert float(x) - value <= b ** (1 - n) / (b - 1) + 1e-15


@CASES
@given(betas, points, points)
def test_code_monotone_in_x(beta, x, y):
    assume(x != y)
    x, y = min(x, y), max(x, y)
    assert _digits(beta, x, 24) <= _digits(beta, y, 24)


@CASES
@given(points)
def test_code_monotone_in_beta(x):
    assume(x > 0)
    codes = [_digits(beta, x, 20) for beta in LADDER]
    assert codes == sorted(codes)


@CASES
@given(st.sampled_from(LADDER[1:]), st.lists(st.integers(0, 2), min_size=1, max_size=7), st.integers(0, 50),
       st.floats(0, 1), st.floats(0, 1))
def test_distortion_on_cylinders(beta, word, seed, a, c):
    word = tuple(word)
    assume(max(word) <= beta.floor and is_admissible(beta, word))
    b = float(beta)
    n = len(word)
    phi = random_trig(seed, 6, 1.0)
    image = float(cylinder_of(beta, word).image_right.mid())
    t1, t2 = a * image * (1 - 1e-12), c * image * (1 - 1e-12)

    def orbit(t):
        # T^i of the point with code word·(tail at t): suffix value plus t scaled back
        out = []
        for i in range(n):
            suffix = word[i:]
            v = sum(d * b ** -(k + 1) for k, d in enumerate(suffix))
            out.append(v + t * b ** -(n - i))
        return np.array(out)

    sx, sy = phi.eval(orbit(t1)).sum(), phi.eval(orbit(t2)).sum()
    bound = phi.seminorm_bound / (b**phi.alpha - 1) * abs(t1 - t2) ** phi.alpha
    assert abs(sx - sy) <= bound + 1e-9


words = st.builds(
    EventuallyPeriodicWord,
    st.lists(st.integers(0, 2), max_size=4).map(tuple),
    st.lists(st.integers(0, 2), min_size=1, max_size=4).map(tuple),
)


@CASES
@given(words, st.integers(0, 3), st.integers(1, 4))
def test_shift_monotone_in_beta(w, i, step):
    j = min(i + step, len(LADDER) - 1)
    assume(i < j)
    gamma, beta = LADDER[i], LADDER[j]
    try:
        small = in_beta_shift(gamma, w)
    except DigitOutOfRange:
        small = False
    if small:
        assert in_beta_shift(beta, w)
