"""Numeric substrate: digit words, lexicographic order, series evaluation, enclosures.

Enclosures are closed intervals ``[lo, hi]`` of MPFR numbers.  Every
arithmetic operation rounds the lower end down and the upper end up, so
the true value of any expression built from exact inputs stays inside.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence, Union

import gmpy2
from gmpy2 import mpfr, mpz

from .errors import BracketInvalid, DigitOutOfRange, PrecisionInsufficient

DEFAULT_BITS = 128
MAX_BITS = 1024
PRECISION_ENV = "BETAOPT_PRECISION_BITS"

FiniteWord = tuple  # tuple[int, ...]; kept as a plain tuple so words hash and slice cheaply


def default_bits() -> int:
    """Working precision in bits, overridable through the environment."""
    raw = os.environ.get(PRECISION_ENV)
    if raw:
        try:
            bits = int(raw)
        except ValueError:
            return DEFAULT_BITS
        return max(53, min(bits, MAX_BITS))
    return DEFAULT_BITS


@lru_cache(maxsize=None)
def _ctx(bits: int, up: bool) -> gmpy2.context:
    return gmpy2.context(precision=bits, round=gmpy2.RoundUp if up else gmpy2.RoundDown)


@lru_cache(maxsize=None)
def _near(bits: int) -> gmpy2.context:
    return gmpy2.context(precision=bits, round=gmpy2.RoundToNearest)


_ZERO = mpfr(0)

Number = Union[int, float, Fraction, str, "Enclosure"]


def _bounds(value, bits: int) -> tuple:
    """Outward-rounded MPFR bounds of ``value`` at ``bits`` of precision."""
    if isinstance(value, Enclosure):
        return value.lo, value.hi
    if isinstance(value, bool):
        value = int(value)
    if isinstance(value, int):
        z = mpz(value)
        return _ctx(bits, False).add(z, _ZERO), _ctx(bits, True).add(z, _ZERO)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        m = mpfr(value, 53)
        return _ctx(bits, False).add(m, _ZERO), _ctx(bits, True).add(m, _ZERO)
    if isinstance(value, str):
        value = Fraction(value)
    if isinstance(value, Fraction):
        p, q = mpz(value.numerator), mpz(value.denominator)
        return _ctx(bits, False).div(p, q), _ctx(bits, True).div(p, q)
    if isinstance(value, type(mpfr(0))):
        return _ctx(bits, False).add(value, _ZERO), _ctx(bits, True).add(value, _ZERO)
    raise TypeError(f"cannot enclose {type(value).__name__}")


class Enclosure:
    """Closed interval with outward-rounded arithmetic."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None, bits: int | None = None):
        bits = bits or default_bits()
        if hi is None:
            lo, hi = _bounds(lo, bits)
        else:
            lo = _bounds(lo, bits)[0]
            hi = _bounds(hi, bits)[1]
        if lo > hi:
            raise ValueError(f"empty enclosure [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    @classmethod
    def _raw(cls, lo, hi) -> "Enclosure":
        obj = object.__new__(cls)
        obj.lo = lo
        obj.hi = hi
        return obj

    @property
    def bits(self) -> int:
        return max(self.lo.precision, self.hi.precision)

    # -- inspection -----------------------------------------------------
    def width(self) -> float:
        return float(_ctx(self.bits, True).sub(self.hi, self.lo))

    def mid(self) -> float:
        b = self.bits
        return float(_near(b).div(_near(b).add(self.lo, self.hi), 2))

    def __float__(self) -> float:
        return self.mid()

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    def contains(self, value) -> bool:
        lo, hi = _bounds(value, self.bits)
        return self.lo <= lo and hi <= self.hi

    def overlaps(self, other) -> bool:
        lo, hi = _bounds(other, self.bits)
        return not (hi < self.lo or lo > self.hi)

    def certainly_lt(self, other) -> bool:
        return self.hi < _bounds(other, self.bits)[0]

    def certainly_gt(self, other) -> bool:
        return self.lo > _bounds(other, self.bits)[1]

    def certainly_le(self, other) -> bool:
        return self.hi <= _bounds(other, self.bits)[0]

    def certainly_ge(self, other) -> bool:
        return self.lo >= _bounds(other, self.bits)[1]

    def hull(self, other) -> "Enclosure":
        lo, hi = _bounds(other, self.bits)
        return Enclosure._raw(min(self.lo, lo), max(self.hi, hi))

    def with_bits(self, bits: int) -> "Enclosure":
        return Enclosure._raw(_ctx(bits, False).add(self.lo, _ZERO), _ctx(bits, True).add(self.hi, _ZERO))

    # -- arithmetic -----------------------------------------------------
    def _other(self, other):
        if isinstance(other, Enclosure):
            return other.lo, other.hi, max(self.bits, other.bits)
        bits = self.bits
        lo, hi = _bounds(other, bits)
        return lo, hi, bits

    def __add__(self, other):
        lo, hi, b = self._other(other)
        return Enclosure._raw(_ctx(b, False).add(self.lo, lo), _ctx(b, True).add(self.hi, hi))

    __radd__ = __add__

    def __sub__(self, other):
        lo, hi, b = self._other(other)
        return Enclosure._raw(_ctx(b, False).sub(self.lo, hi), _ctx(b, True).sub(self.hi, lo))

    def __rsub__(self, other):
        lo, hi, b = self._other(other)
        return Enclosure._raw(_ctx(b, False).sub(lo, self.hi), _ctx(b, True).sub(hi, self.lo))

    def __neg__(self):
        return Enclosure._raw(-self.hi, -self.lo)

    def __mul__(self, other):
        lo, hi, b = self._other(other)
        if self.lo >= 0 and lo >= 0:
            return Enclosure._raw(_ctx(b, False).mul(self.lo, lo), _ctx(b, True).mul(self.hi, hi))
        down, up = _ctx(b, False), _ctx(b, True)
        pairs = ((self.lo, lo), (self.lo, hi), (self.hi, lo), (self.hi, hi))
        return Enclosure._raw(
            min(down.mul(x, y) for x, y in pairs), max(up.mul(x, y) for x, y in pairs)
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        lo, hi, b = self._other(other)
        if lo <= 0 <= hi:
            raise ZeroDivisionError("divisor enclosure contains zero")
        down, up = _ctx(b, False), _ctx(b, True)
        if self.lo >= 0 and lo > 0:
            return Enclosure._raw(down.div(self.lo, hi), up.div(self.hi, lo))
        pairs = ((self.lo, lo), (self.lo, hi), (self.hi, lo), (self.hi, hi))
        return Enclosure._raw(
            min(down.div(x, y) for x, y in pairs), max(up.div(x, y) for x, y in pairs)
        )

    def __rtruediv__(self, other):
        lo, hi, b = self._other(other)
        return Enclosure._raw(lo, hi) / self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers are supported")
        result = Enclosure._raw(mpfr(1, self.bits), mpfr(1, self.bits))
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def abs(self) -> "Enclosure":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Enclosure._raw(mpfr(0, self.bits), max(-self.lo, self.hi))

    # -- integer parts --------------------------------------------------
    def floor(self) -> int:
        """Exact ``floor``; raises when the enclosure straddles an integer."""
        a, b = int(gmpy2.floor(self.lo)), int(gmpy2.floor(self.hi))
        if a != b:
            raise PrecisionInsufficient(f"enclosure [{self.lo}, {self.hi}] straddles {b}")
        return a

    def strict_floor(self) -> int:
        """Largest integer strictly below the value (``ceil(v) - 1``)."""
        a, b = int(gmpy2.ceil(self.lo)), int(gmpy2.ceil(self.hi))
        if a != b:
            raise PrecisionInsufficient(f"enclosure [{self.lo}, {self.hi}] straddles {a}")
        return a - 1

    def __repr__(self) -> str:
        if self.is_exact:
            return f"Enclosure({float(self.lo)!r})"
        return f"Enclosure([{float(self.lo)!r}, {float(self.hi)!r}])"


def enclose(value: Number, bits: int | None = None) -> Enclosure:
    if isinstance(value, Enclosure):
        return value
    return Enclosure(value, bits=bits)


# ---------------------------------------------------------------------------
# Words


class Order(enum.IntEnum):
    Less = -1
    Equal = 0
    Greater = 1


def _primitive_root(word: tuple) -> tuple:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


@dataclass(frozen=True)
class EventuallyPeriodicWord:
    """The infinite word ``preperiod · period · period · …`` in canonical form."""

    preperiod: tuple = ()
    period: tuple = (0,)

    def __post_init__(self):
        pre = tuple(int(d) for d in self.preperiod)
        per = tuple(int(d) for d in self.period)
        if not per:
            raise ValueError("period must be nonempty")
        if any(d < 0 for d in pre + per):
            raise ValueError("digits must be nonnegative")
        per = _primitive_root(per)
        while pre and pre[-1] == per[-1]:
            pre = pre[:-1]
            per = per[-1:] + per[:-1]
        object.__setattr__(self, "preperiod", pre)
        object.__setattr__(self, "period", per)

    @classmethod
    def finite(cls, digits: Iterable[int]) -> "EventuallyPeriodicWord":
        return cls(tuple(digits), (0,))

    @classmethod
    def periodic(cls, digits: Iterable[int]) -> "EventuallyPeriodicWord":
        return cls((), tuple(digits))

    @classmethod
    def parse(cls, text: str) -> "EventuallyPeriodicWord":
        """Parse ``"2(10)"``; digits above 9 may be comma separated, e.g. ``"12,3(0)"``."""
        text = text.strip().replace("^inf", "").replace("^∞", "")
        if "(" in text:
            head, _, rest = text.partition("(")
            body = rest.rstrip(")")
        else:
            head, body = text, "0"

        def digits(s: str) -> tuple:
            s = s.strip()
            if not s:
                return ()
            if "," in s:
                return tuple(int(t) for t in s.split(",") if t.strip())
            return tuple(int(c) for c in s)

        return cls(digits(head), digits(body))

    def __str__(self) -> str:
        sep = "," if any(d > 9 for d in self.preperiod + self.period) else ""
        return f"{sep.join(map(str, self.preperiod))}({sep.join(map(str, self.period))})"

    def notation(self) -> str:
        return str(self) + "^∞"

    @property
    def is_finite(self) -> bool:
        return self.period == (0,)

    @property
    def max_digit(self) -> int:
        return max(self.preperiod + self.period)

    def digit(self, i: int) -> int:
        """Digit at 0-based position ``i``."""
        k = len(self.preperiod)
        if i < k:
            return self.preperiod[i]
        return self.period[(i - k) % len(self.period)]

    def prefix(self, n: int) -> tuple:
        return tuple(self.digit(i) for i in range(n))

    def shift(self, k: int = 1) -> "EventuallyPeriodicWord":
        pre, per = self.preperiod, self.period
        if k <= len(pre):
            return EventuallyPeriodicWord(pre[k:], per)
        r = (k - len(pre)) % len(per)
        return EventuallyPeriodicWord((), per[r:] + per[:r])

    def distinct_shifts(self) -> list:
        """``σ^k`` for ``k = 0 … len(pre)+len(per)-1``; every later shift repeats one of these."""
        return [self.shift(k) for k in range(len(self.preperiod) + len(self.period))]

    def prepend(self, digits: Sequence[int]) -> "EventuallyPeriodicWord":
        return EventuallyPeriodicWord(tuple(digits) + self.preperiod, self.period)


def lex_compare(a: EventuallyPeriodicWord, b: EventuallyPeriodicWord) -> Order:
    """Exact lexicographic comparison of two eventually periodic words."""
    horizon = max(len(a.preperiod), len(b.preperiod)) + math.lcm(len(a.period), len(b.period))
    for i in range(horizon):
        x, y = a.digit(i), b.digit(i)
        if x != y:
            return Order.Less if x < y else Order.Greater
    return Order.Equal


def lex_compare_prefix(a: Sequence[int], b: Sequence[int]) -> Order:
    """Compare finite words position by position over their common length."""
    for x, y in zip(a, b):
        if x != y:
            return Order.Less if x < y else Order.Greater
    return Order.Equal


# ---------------------------------------------------------------------------
# Series


def _h_at_point(word: EventuallyPeriodicWord, beta: Enclosure) -> Enclosure:
    pre, per = word.preperiod, word.period
    p = len(per)
    num = Enclosure._raw(mpfr(0, beta.bits), mpfr(0, beta.bits))
    for d in per:
        num = num * beta + d
    tail = num / (beta**p - 1)
    acc = Enclosure._raw(mpfr(0, beta.bits), mpfr(0, beta.bits))
    for d in pre:
        acc = acc * beta + d
    return (acc + tail) / beta ** len(pre)


def h_eval(word: EventuallyPeriodicWord, beta: Number) -> Enclosure:
    """Enclosure of ``sum_i z_i beta^{-i}`` using the closed form for the periodic tail.

    The series is decreasing in ``beta`` (digits are nonnegative), so it is
    evaluated at the two endpoints of the ``beta`` enclosure separately.
    """
    beta = enclose(beta)
    if beta.lo <= 1:
        raise ValueError("h_eval requires beta > 1")
    top = int(gmpy2.floor(beta.hi))
    if word.max_digit > top:
        raise DigitOutOfRange(f"digit {word.max_digit} exceeds floor(beta) = {top}")
    if word.period == (0,) and not word.preperiod:
        return Enclosure._raw(mpfr(0, beta.bits), mpfr(0, beta.bits))
    if beta.is_exact:
        return _h_at_point(word, beta)
    at_hi = _h_at_point(word, Enclosure._raw(beta.hi, beta.hi))
    at_lo = _h_at_point(word, Enclosure._raw(beta.lo, beta.lo))
    return Enclosure._raw(at_hi.lo, at_lo.hi)


def solve_h_equals_one(
    word: EventuallyPeriodicWord, bracket: Enclosure, tol: float = 2.0**-80
) -> Enclosure:
    """Bisection for the unique ``beta`` in ``bracket`` with ``h_beta(word) = 1``."""
    bits = max(bracket.bits, default_bits(), int(math.ceil(-math.log2(tol))) + 48)
    a, b = bracket.lo, bracket.hi
    ha = _h_at_point(word, Enclosure._raw(mpfr(a, bits), mpfr(a, bits)))
    hb = _h_at_point(word, Enclosure._raw(mpfr(b, bits), mpfr(b, bits)))
    if ha.contains(1) and ha.is_exact:
        return Enclosure._raw(mpfr(a, bits), mpfr(a, bits))
    if hb.contains(1) and hb.is_exact:
        return Enclosure._raw(mpfr(b, bits), mpfr(b, bits))
    if not (ha.certainly_gt(1) and hb.certainly_lt(1)):
        raise BracketInvalid("need h(lo) > 1 > h(hi) on the bracket")
    near = _near(bits)
    a, b = mpfr(a, bits), mpfr(b, bits)
    tol_m = mpfr(tol, bits)
    while _ctx(bits, True).sub(b, a) > tol_m:
        m = near.div(near.add(a, b), 2)
        hm = _h_at_point(word, Enclosure._raw(m, m))
        if hm.certainly_gt(1):
            a = m
        elif hm.certainly_lt(1):
            b = m
        elif hm.is_exact:
            return Enclosure._raw(m, m)
        else:
            # The root sits within rounding distance of m; step off by a quarter tolerance.
            q = near.div(tol_m, 4)
            lo_t, hi_t = near.sub(m, q), near.add(m, q)
            h_lo = _h_at_point(word, Enclosure._raw(lo_t, lo_t))
            h_hi = _h_at_point(word, Enclosure._raw(hi_t, hi_t))
            if h_lo.certainly_gt(1) and h_hi.certainly_lt(1):
                a, b = lo_t, hi_t
                break
            if bits >= MAX_BITS:
                raise PrecisionInsufficient("root not separable at the precision cap")
            return solve_h_equals_one(word, Enclosure._raw(a, b).with_bits(bits * 2), tol)
    return Enclosure._raw(a, b)


def digit_bracket(word: EventuallyPeriodicWord) -> Enclosure:
    """A starting bracket for ``solve_h_equals_one``: the root lies in ``[d, d+1]`` with ``d`` the first digit."""
    d = word.digit(0)
    if d < 1:
        raise BracketInvalid("first digit must be at least 1")
    lo = Fraction(d) if d >= 2 else Fraction(1) + Fraction(1, 2**40)
    return Enclosure(lo, Fraction(d + 1), bits=default_bits())
