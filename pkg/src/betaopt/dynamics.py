"""The maps T_beta and U_beta, beta-expansions, and the critical orbit of 1.

A :class:`BetaParam` is built once from an exact description (a rational,
an integer polynomial, or the expansion word of 1) and caches its
classification data at construction.  Rational parameters use exact
``Fraction`` arithmetic; all others use enclosures with a precision ladder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .errors import NotAParryWord, PrecisionInsufficient, VerificationFailed
from .numkit import (
    MAX_BITS,
    Enclosure,
    EventuallyPeriodicWord,
    Order,
    default_bits,
    digit_bracket,
    enclose,
    h_eval,
    lex_compare,
    solve_h_equals_one,
)

DEFAULT_HORIZON = 64

Point = Union[Enclosure, Fraction, int, str, float]

SIMPLE = "Simple"
NON_SIMPLE = "NonSimple"
NON_PREPERIODIC = "NonPreperiodicUpToHorizon"


def _as_fraction(x: Point) -> Fraction | None:
    if isinstance(x, Enclosure):
        if not x.is_exact:
            return None
        num, den = x.lo.as_integer_ratio()
        return Fraction(int(num), int(den))
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return None


# ---------------------------------------------------------------------------
# parameter sources


@lru_cache(maxsize=None)
def _poly_root(coeffs: tuple, bits: int) -> tuple:
    """Dyadic bracket ``(lo, hi)`` of the largest real root, of width at most ``2**-bits``."""

    def sign(x: Fraction) -> int:
        acc = Fraction(0)
        for c in coeffs:
            acc = acc * x + c
        return (acc > 0) - (acc < 0)

    roots = np.roots(np.array(coeffs, dtype=float))
    real = [r.real for r in roots if abs(r.imag) < 1e-9 * max(1.0, abs(r))]
    if not real:
        raise ValueError("polynomial has no real root")
    approx = max(real)
    lead = (coeffs[0] > 0) - (coeffs[0] < 0)
    # above the largest root the polynomial has the sign of its leading coefficient
    eps = 1e-7 * max(1.0, abs(approx))
    for _ in range(60):
        lo, hi = Fraction(approx - eps), Fraction(approx + eps)
        if sign(hi) == lead and sign(lo) == -lead:
            break
        eps *= 2
    else:
        raise ValueError("could not bracket the largest root")
    scale = 2**bits
    lo_n = math.floor(lo * scale)
    hi_n = math.ceil(hi * scale)
    s_lo = -lead
    while hi_n - lo_n > 1:
        m = (lo_n + hi_n) // 2
        s = sign(Fraction(m, scale))
        if s == 0:
            return Fraction(m, scale), Fraction(m, scale)
        if s == s_lo:
            lo_n = m
        else:
            hi_n = m
    return Fraction(lo_n, scale), Fraction(hi_n, scale)


@lru_cache(maxsize=None)
def _word_root(word: EventuallyPeriodicWord, bits: int) -> Enclosure:
    return solve_h_equals_one(word, digit_bracket(word), tol=2.0 ** -(bits - 8))


def _source_enclosure(kind: str, payload, bits: int) -> Enclosure:
    if kind == "rational":
        return Enclosure(payload, bits=bits)
    if kind == "polynomial":
        lo, hi = _poly_root(payload, bits)
        return Enclosure(lo, hi, bits=bits)
    if kind == "word":
        return _word_root(payload, bits)
    raise ValueError(kind)


# ---------------------------------------------------------------------------
# the orbit of 1 under U_beta


def _upper_orbit_exact(beta: Fraction, horizon: int):
    """Return ``('hit'|'recur'|'none', digits, index)`` for rational beta."""
    x = Fraction(1)
    seen = {x: 0}
    digits = []
    for k in range(horizon):
        y = beta * x
        d = math.ceil(y) - 1
        digits.append(d)
        x = y - d
        if x == 1:
            return "hit", tuple(digits), 0
        if x in seen:
            return "recur", tuple(digits), seen[x]
        seen[x] = k + 1
    return "none", tuple(digits), None


def _upper_orbit_enclosed(beta: Enclosure, horizon: int):
    """As :func:`_upper_orbit_exact` but on enclosures; ties become candidates."""
    one = Enclosure(1, bits=beta.bits)
    x = one
    orbit = [x]
    digits = []
    for k in range(horizon):
        y = beta * x
        try:
            d = y.strict_floor()
        except PrecisionInsufficient:
            j = int(np.ceil(float(y.lo)))
            # beta * x may equal the integer j, in which case U(x) = 1
            digits.append(j - 1)
            return "hit", tuple(digits), 0
        digits.append(d)
        x = y - d
        for i, prev in enumerate(orbit):
            if prev.overlaps(x):
                if i == 0 and not x.certainly_lt(1):
                    return "hit", tuple(digits), 0
                if i > 0:
                    return "recur", tuple(digits), i
        orbit.append(x)
    return "none", tuple(digits), None


def _words_from_upper(status: str, digits: tuple, index):
    """Build ``(pi(1), pi*(1))`` from the detected structure of the U-orbit of 1."""
    if status == "hit":
        upper = EventuallyPeriodicWord.periodic(digits)
        lower = EventuallyPeriodicWord.finite(digits[:-1] + (digits[-1] + 1,))
        return lower, upper
    if status == "recur":
        upper = EventuallyPeriodicWord(digits[:index], digits[index:])
        return upper, upper
    return None, None


def upper_from_expansion(word: EventuallyPeriodicWord) -> EventuallyPeriodicWord:
    """pi*(1) from pi(1): a finite expansion z1…zn becomes (z1…(zn−1))^∞."""
    if word.is_finite:
        z = word.preperiod
        return EventuallyPeriodicWord.periodic(z[:-1] + (z[-1] - 1,))
    return word


def is_parry_word(word: EventuallyPeriodicWord) -> bool:
    """True iff every proper shift of ``word`` is strictly smaller, and the word is not 0^∞."""
    if word.digit(0) < 1:
        return False
    return all(lex_compare(s, word) is Order.Less for s in word.distinct_shifts()[1:]) and (
        lex_compare(word.shift(len(word.preperiod) + len(word.period)), word) is Order.Less
    )


def certify_expansion(word: EventuallyPeriodicWord, beta: Enclosure) -> bool:
    """Check that ``word`` is the greedy expansion of 1 for the enclosed beta.

    Requires ``h(word)`` to enclose 1 and ``h`` of every proper shift to be
    certainly below 1, which is exactly the greedy digit condition.
    """
    if not is_parry_word(word):
        return False
    if not h_eval(word, beta).contains(1):
        return False
    for s in word.distinct_shifts()[1:]:
        if not h_eval(s, beta).certainly_lt(1):
            return False
    return True


@dataclass(frozen=True, eq=False)
class BetaParam:
    """A parameter beta > 1 with a certified enclosure and cached critical-orbit data."""

    kind_source: str
    payload: object
    label: str
    value: Enclosure
    floor: int
    is_integer: bool
    kind: str
    expansion: EventuallyPeriodicWord | None
    upper_expansion: EventuallyPeriodicWord | None
    upper_prefix: tuple
    horizon: int
    bits_used: int
    D: tuple = field(repr=False)

    # -- identity -------------------------------------------------------
    @property
    def key(self) -> tuple:
        return (self.kind_source, self.payload)

    def __eq__(self, other) -> bool:
        return isinstance(other, BetaParam) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"BetaParam({self.label}≈{self.value.mid():.10g}, {self.kind})"

    # -- construction ---------------------------------------------------
    @staticmethod
    def from_rational(value, horizon: int = DEFAULT_HORIZON) -> "BetaParam":
        q = Fraction(value)
        if q <= 1:
            raise ValueError("beta must exceed 1")
        return _build("rational", q, str(value), horizon)

    @staticmethod
    def from_polynomial(coeffs: Sequence[int], horizon: int = DEFAULT_HORIZON) -> "BetaParam":
        """Largest real root of ``coeffs[0] z^n + … + coeffs[-1]``."""
        c = tuple(int(a) for a in coeffs)
        while c and c[0] == 0:
            c = c[1:]
        label = "poly:" + ",".join(map(str, c))
        if len(c) == 2:
            return BetaParam.from_rational(Fraction(-c[1], c[0]), horizon)
        return _build("polynomial", c, label, horizon)

    @staticmethod
    def from_parry_word(word: EventuallyPeriodicWord, horizon: int = DEFAULT_HORIZON) -> "BetaParam":
        if not is_parry_word(word) or word == EventuallyPeriodicWord.finite((1,)):
            raise NotAParryWord(f"{word} is not the expansion of 1 for any beta > 1")
        if word.is_finite and len(word.preperiod) == 1:
            return BetaParam.from_rational(word.preperiod[0], horizon)
        return _build("word", word, "word:" + str(word), horizon)

    @staticmethod
    def golden(horizon: int = DEFAULT_HORIZON) -> "BetaParam":
        return BetaParam.from_polynomial((1, -1, -1), horizon)

    def enclosure(self, bits: int | None = None) -> Enclosure:
        bits = bits or self.bits_used
        if bits == self.value.bits:
            return self.value
        return _source_enclosure(self.kind_source, self.payload, bits)

    @property
    def exact(self) -> Fraction | None:
        return self.payload if self.kind_source == "rational" else None

    @property
    def is_beta_number(self) -> bool:
        return self.kind in (SIMPLE, NON_SIMPLE)

    def __float__(self) -> float:
        return self.value.mid()


def _bits_for(horizon: int, approx: float) -> int:
    return max(default_bits(), int(math.ceil(horizon * math.log2(max(approx, 2.0)))) + 64)


@lru_cache(maxsize=4096)
def _build(kind: str, payload, label: str, horizon: int) -> BetaParam:
    approx = float(_source_enclosure(kind, payload, 64).mid())
    bits = _bits_for(horizon, approx)
    value = _source_enclosure(kind, payload, bits)
    if kind == "rational":
        q = payload
        floor = math.floor(q)
        is_int = q.denominator == 1
        status, digits, index = _upper_orbit_exact(q, horizon)
        lower, upper = _words_from_upper(status, digits, index)
    elif kind == "word":
        floor = value.floor()
        is_int = False
        lower = payload
        upper = upper_from_expansion(lower)
        if not certify_expansion(lower, value):
            raise VerificationFailed(f"expansion {lower} not certified at {bits} bits")
        digits = upper.prefix(horizon)
    else:
        floor = value.floor()
        is_int = False
        lower = upper = None
        status, digits, index = "none", (), None
        b = bits
        while True:
            status, digits, index = _upper_orbit_enclosed(_source_enclosure(kind, payload, b), horizon)
            if status == "none" or b >= MAX_BITS:
                break
            b = min(2 * b, MAX_BITS)
            again = _upper_orbit_enclosed(_source_enclosure(kind, payload, b), horizon)
            if again != (status, digits, index):
                status, digits, index = again
                if status == "none":
                    break
                continue
            break
        if status != "none":
            lower, upper = _words_from_upper(status, digits, index)
            if not certify_expansion(lower, _source_enclosure(kind, payload, b)):
                raise VerificationFailed(f"candidate expansion {lower} failed certification")
            value = _source_enclosure(kind, payload, b)
            bits = b
    if lower is None:
        ckind = NON_PREPERIODIC
    elif lower.is_finite:
        ckind = SIMPLE
    else:
        ckind = NON_SIMPLE
    prefix = upper.prefix(horizon) if upper is not None else tuple(digits)
    D = tuple(
        (Enclosure(Fraction(j) / payload, bits=bits) if kind == "rational" else Enclosure(j, bits=bits) / value)
        for j in range(1, floor + 1)
    )
    return BetaParam(
        kind_source=kind,
        payload=payload,
        label=label,
        value=value,
        floor=floor,
        is_integer=is_int,
        kind=ckind,
        expansion=lower,
        upper_expansion=upper,
        upper_prefix=prefix,
        horizon=horizon,
        bits_used=bits,
        D=D,
    )


@lru_cache(maxsize=4096)
def critical_digits(beta: BetaParam, n: int) -> tuple:
    """First ``n`` digits of pi*_beta(1)."""
    if beta.upper_expansion is not None:
        return beta.upper_expansion.prefix(n)
    if n <= len(beta.upper_prefix):
        return beta.upper_prefix[:n]
    if beta.exact is not None:
        return _upper_orbit_exact(beta.exact, n)[1]
    bits = _bits_for(n, beta.value.mid())
    status, digits, _ = _upper_orbit_enclosed(beta.enclosure(bits), n)
    if status != "none":
        raise PrecisionInsufficient("critical orbit became ambiguous while extending the prefix")
    return digits


# ---------------------------------------------------------------------------
# maps


def _check_unit(x: Enclosure) -> None:
    if x.lo < 0 or x.hi > 1:
        raise ValueError("point must lie in [0, 1]")


def t_map(beta: BetaParam, x: Point) -> Enclosure:
    """T_beta(x) = beta x − floor(beta x)."""
    q = _as_fraction(x)
    if beta.exact is not None and q is not None:
        if not 0 <= q <= 1:
            raise ValueError("point must lie in [0, 1]")
        y = beta.exact * q
        return Enclosure(y - math.floor(y), bits=beta.bits_used)
    xe = enclose(x, beta.bits_used)
    _check_unit(xe)
    y = beta.value * xe
    return y - y.floor()


def u_map(beta: BetaParam, x: Point) -> Enclosure:
    """U_beta(x) = beta x − floor'(beta x), with U_beta(0) = 0."""
    q = _as_fraction(x)
    if q is not None and q == 0:
        return Enclosure(0, bits=beta.bits_used)
    if beta.exact is not None and q is not None:
        if not 0 <= q <= 1:
            raise ValueError("point must lie in [0, 1]")
        y = beta.exact * q
        return Enclosure(y - (math.ceil(y) - 1), bits=beta.bits_used)
    xe = enclose(x, beta.bits_used)
    _check_unit(xe)
    y = beta.value * xe
    return y - y.strict_floor()


def _iterate_digits(beta: BetaParam, x: Point, n: int, upper: bool) -> tuple:
    q = _as_fraction(x)
    if q is not None and q == 1:
        word = beta.upper_expansion if upper else beta.expansion
        if word is not None:
            return word.prefix(n)
        if beta.exact is None:
            return critical_digits(beta, n)
    if beta.exact is not None and q is not None:
        b = beta.exact
        digits = []
        for _ in range(n):
            y = b * q
            if upper:
                d = 0 if q == 0 else math.ceil(y) - 1
            else:
                d = math.floor(y)
            digits.append(d)
            q = y - d
        return tuple(digits)
    bits = _bits_for(n, beta.value.mid())
    b = beta.enclosure(bits)
    xe = Enclosure(q, bits=bits) if q is not None else enclose(x)
    digits = []
    for _ in range(n):
        if upper and xe.is_exact and xe.lo == 0:
            digits.append(0)
            continue
        y = b * xe
        d = y.strict_floor() if upper else y.floor()
        digits.append(d)
        xe = y - d
    return tuple(digits)


def expand(beta: BetaParam, x: Point, n: int) -> tuple:
    """First ``n`` digits of the greedy expansion pi_beta(x)."""
    if n < 1:
        raise ValueError("n must be positive")
    return _iterate_digits(beta, x, n, upper=False)


def expand_upper(beta: BetaParam, x: Point, n: int) -> tuple:
    """First ``n`` digits of the upper expansion pi*_beta(x)."""
    if n < 1:
        raise ValueError("n must be positive")
    return _iterate_digits(beta, x, n, upper=True)


@dataclass(frozen=True)
class OrbitSample:
    points: tuple
    map_tag: str
    cycle_start: int | None = None
    exact_set: bool = False

    @property
    def cycle(self) -> tuple:
        return self.points[self.cycle_start :] if self.cycle_start is not None else ()


def critical_orbit(beta: BetaParam, depth: int = DEFAULT_HORIZON) -> OrbitSample:
    """The U_beta orbit of 1: the exact finite set for beta-numbers, a sample otherwise."""
    if depth < 1:
        raise ValueError("depth must be positive")
    w = beta.upper_expansion
    if w is not None:
        shifts = w.distinct_shifts()
        pts = tuple(h_eval(s, beta.value) for s in shifts)
        pts = (Enclosure(1, bits=beta.bits_used),) + pts[1:]
        return OrbitSample(pts, "U", cycle_start=len(w.preperiod), exact_set=True)
    pts = []
    x = Enclosure(1, bits=beta.bits_used)
    if beta.exact is not None:
        q = Fraction(1)
        for _ in range(depth):
            pts.append(Enclosure(q, bits=beta.bits_used))
            y = beta.exact * q
            q = y - (math.ceil(y) - 1)
        return OrbitSample(tuple(pts), "U")
    bits = _bits_for(depth, beta.value.mid())
    b = beta.enclosure(bits)
    x = Enclosure(1, bits=bits)
    for _ in range(depth):
        pts.append(x)
        y = b * x
        x = y - y.strict_floor()
    return OrbitSample(tuple(pts), "U")


@dataclass(frozen=True)
class ZMembership:
    kind: str  # "Yes" or "NoUpToHorizon"
    n: int | None = None

    def __bool__(self) -> bool:
        return self.kind == "Yes"


def z_membership(beta: BetaParam, x: Point, horizon: int = DEFAULT_HORIZON) -> ZMembership:
    """Whether U_beta^n(x) = 1 for some n ≤ horizon."""
    q = _as_fraction(x)
    if beta.exact is not None and q is not None:
        b = beta.exact
        for n in range(horizon + 1):
            if q == 1:
                return ZMembership("Yes", n)
            if q == 0:
                break
            y = b * q
            q = y - (math.ceil(y) - 1)
        return ZMembership("NoUpToHorizon")
    bits = _bits_for(horizon, beta.value.mid())
    b = beta.enclosure(bits)
    xe = Enclosure(q, bits=bits) if q is not None else enclose(x)
    for n in range(horizon + 1):
        if xe.is_exact and xe.lo == 1:
            return ZMembership("Yes", n)
        if xe.is_exact and xe.lo == 0:
            break
        y = b * xe
        xe = y - y.strict_floor()
    return ZMembership("NoUpToHorizon")


def discontinuities(beta: BetaParam) -> tuple:
    """D_beta = {j / beta} ∩ (0, 1]."""
    return beta.D
