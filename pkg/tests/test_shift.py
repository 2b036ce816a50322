from fractions import Fraction

import pytest

from betaopt.dynamics import BetaParam
from betaopt.errors import NotAdmissible
from betaopt.numkit import EventuallyPeriodicWord
from betaopt.shift import (
    cylinder_of,
    enumerate_cylinders,
    in_beta_shift,
    in_H_gamma,
    is_admissible,
    word_tables,
)

W = EventuallyPeriodicWord.parse


def fib(n):
    a, b = 1, 2
    for _ in range(n - 1):
        a, b = b, a + b
    return a


def test_admissibility_examples(golden, two):
    assert is_admissible(golden, (1, 0, 1))
    assert not is_admissible(golden, (1, 1, 0))
    assert not is_admissible(two, (2, 1))
    assert is_admissible(two, (1, 1, 1))


def test_cylinder_full_and_not_full(two, cubic):
    c = cylinder_of(two, (1,))
    assert c.full
    assert c.left.contains(Fraction(1, 2)) and c.right.contains(1)
    top = cylinder_of(cubic, (2,))
    assert not top.full
    assert abs(top.image_right.mid() - (2.4811943040920 - 2)) < 1e-12


def test_cylinder_of_inadmissible_word(golden):
    with pytest.raises(NotAdmissible):
        cylinder_of(golden, (1, 1))


def test_golden_two_cylinders(golden):
    cyls = enumerate_cylinders(golden, 2)
    assert sorted(c.word for c in cyls) == [(0, 0), (0, 1), (1, 0)]


@pytest.mark.parametrize("n", range(1, 11))
def test_golden_word_counts_are_fibonacci(golden, n):
    assert word_tables(golden, n)[-1].count == fib(n + 1)


@pytest.mark.parametrize("name", ["two", "golden", "cubic"])
def test_cylinders_partition_unit_interval(request, name):
    beta = request.getfixturevalue(name)
    cyls = sorted(enumerate_cylinders(beta, 5), key=lambda c: c.left.mid())
    assert cyls[0].left.mid() == pytest.approx(0, abs=1e-14)
    assert cyls[-1].right.mid() == pytest.approx(1, abs=1e-12)
    for a, b in zip(cyls, cyls[1:]):
        assert a.right.mid() == pytest.approx(b.left.mid(), abs=1e-12)
    total = sum(c.right.mid() - c.left.mid() for c in cyls)
    assert total == pytest.approx(1, abs=1e-12)


def test_in_beta_shift_examples(golden, cubic):
    assert in_beta_shift(golden, W("(10)"))
    assert not in_beta_shift(golden, W("(110)"))
    assert in_beta_shift(cubic, W("2(10)"))
    assert not in_beta_shift(cubic, W("(2)"))
    assert not in_beta_shift(cubic, W("(21)"))
    assert in_beta_shift(cubic, W("(20)"))


def test_in_H_gamma_examples(cubic):
    gamma = BetaParam.from_rational(Fraction(12, 5))
    assert in_H_gamma(cubic, gamma, 0)
    # pi_gamma(1) begins 20201, so (20)^inf sits just above it
    assert in_H_gamma(cubic, gamma, W("2(0)"))
    assert in_H_gamma(cubic, gamma, W("(20100)"))
    assert not in_H_gamma(cubic, gamma, W("(20)"))
    assert not in_H_gamma(cubic, gamma, W("2(10)"))
    golden = BetaParam.golden()
    assert not in_H_gamma(cubic, golden, W("(2)"))


def test_in_H_gamma_requires_smaller_gamma(cubic):
    with pytest.raises(ValueError):
        in_H_gamma(cubic, BetaParam.from_rational(3), 0)
