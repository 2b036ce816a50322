from fractions import Fraction

import pytest

from betaopt.betanum import (
    EMERGENT,
    NON_EMERGENT,
    classify,
    emergent_status_for_beta_number,
    greedy_orbit_classification,
    nonsimple_between,
    parry_solve,
    suffixes_strictly_below,
)
from betaopt.dynamics import NON_PREPERIODIC, NON_SIMPLE, SIMPLE, BetaParam, expand
from betaopt.errors import NotAParryWord, PreconditionFailed, Undecidable
from betaopt.numkit import EventuallyPeriodicWord, h_eval

W = EventuallyPeriodicWord.parse

PARAMS = [
    ("cubic", (1, -2, -2, 2), NON_SIMPLE, "2(10)"),
    ("golden", (1, -1, -1), SIMPLE, "11"),
    ("tribonacci", (1, -1, -1, -1), SIMPLE, "111"),
    ("two", None, SIMPLE, "2"),
]


def _param(coeffs):
    return BetaParam.from_rational(2) if coeffs is None else BetaParam.from_polynomial(coeffs)


@pytest.mark.parametrize("name,coeffs,kind,word", PARAMS)
def test_classify_examples(name, coeffs, kind, word):
    c = classify(_param(coeffs))
    assert c.kind == kind
    assert c.expansion == W(word)


@pytest.mark.parametrize("name,coeffs,kind,word", PARAMS)
def test_greedy_route_agrees(name, coeffs, kind, word):
    beta = _param(coeffs)
    a, b = classify(beta), greedy_orbit_classification(beta)
    assert (a.kind, a.expansion) == (b.kind, b.expansion)


@pytest.mark.parametrize("q", [Fraction(5, 2), Fraction(12, 5)])
def test_rationals_without_short_recurrence(q):
    beta = BetaParam.from_rational(q)
    a, b = classify(beta, 64), greedy_orbit_classification(beta, 64)
    assert a.kind == b.kind == NON_PREPERIODIC
    assert a.prefix == b.prefix == expand(beta, 1, 64)


def test_parry_solve_examples():
    assert abs(float(parry_solve(W("21"))) - (1 + 2**0.5)) < 1e-14
    assert float(parry_solve(W("3"))) == 3
    cubic = parry_solve(W("2(10)"))
    assert h_eval(W("2(10)"), cubic.value).contains(1)


@pytest.mark.parametrize("word", ["2(2)", "(10)", "1(1)", "12"])
def test_parry_solve_rejects(word):
    with pytest.raises(NotAParryWord):
        parry_solve(W(word))


def test_suffix_check_examples():
    assert suffixes_strictly_below(W("2(10)"))
    assert suffixes_strictly_below(W("11"))
    assert not suffixes_strictly_below(W("(10)"))
    assert suffixes_strictly_below(W("101"))
    assert not suffixes_strictly_below(W("1011"))


def test_emergent_status():
    assert emergent_status_for_beta_number(classify(BetaParam.golden())) == EMERGENT
    cubic = BetaParam.from_polynomial((1, -2, -2, 2))
    assert emergent_status_for_beta_number(classify(cubic)) == NON_EMERGENT
    with pytest.raises(Undecidable):
        emergent_status_for_beta_number(classify(BetaParam.from_rational(Fraction(5, 2))))


def _check_between(lo, hi, gamma):
    assert float(lo) < float(gamma) < float(hi)
    assert gamma.kind == NON_SIMPLE
    w = gamma.expansion
    # every proper shift strictly below the word, checked on a long prefix
    digits = w.prefix(200)
    for k in range(1, 100):
        assert digits[k : k + 100] < digits[:100]
    assert h_eval(w, gamma.value).contains(1)


def test_nonsimple_between_examples(cubic):
    hi = BetaParam.from_rational(Fraction(5, 2))
    g = nonsimple_between(cubic, hi)
    _check_between(cubic, hi, g)
    assert g.expansion == W("210110(00002)")
    lo = BetaParam.from_rational(Fraction(12, 5))
    g = nonsimple_between(lo, cubic)
    _check_between(lo, cubic, g)
    assert g.expansion.period == (0, 2)


def test_nonsimple_between_preconditions(cubic):
    with pytest.raises(PreconditionFailed):
        nonsimple_between(BetaParam.golden(), cubic)
    with pytest.raises(PreconditionFailed):
        nonsimple_between(cubic, BetaParam.from_rational(Fraction(12, 5)))
