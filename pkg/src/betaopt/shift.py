"""Beta-shift membership, admissible words and cylinders.

Admissibility of finite words is decided exactly: a suffix ``s`` followed
by zeros is strictly below pi*(1) iff ``s`` is lexicographically at most the
prefix of pi*(1) of the same length, because pi*(1) never ends in zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import BetaParam, Point, critical_digits, critical_orbit, expand
from .errors import BudgetExceeded, DigitOutOfRange, HorizonExceeded, NotAdmissible
from .numkit import Enclosure, EventuallyPeriodicWord, Order, h_eval, lex_compare

TIE_HORIZON = 256
DEFAULT_WORD_BUDGET = 2_000_000


def _check_digits(beta: BetaParam, digits: Sequence[int]) -> None:
    if digits and max(digits) > beta.floor:
        raise DigitOutOfRange(f"digit {max(digits)} exceeds floor(beta) = {beta.floor}")


def is_admissible(beta: BetaParam, word: Sequence[int]) -> bool:
    """True iff ``word · 0^∞`` is the greedy expansion of a point of [0, 1)."""
    word = tuple(word)
    _check_digits(beta, word)
    if not word:
        return True
    c = critical_digits(beta, len(word))
    for k in range(len(word)):
        s = word[k:]
        if s > c[: len(s)]:
            return False
    return True


def longest_critical_suffix(beta: BetaParam, word: Sequence[int]) -> int:
    """Largest ``m`` such that the last ``m`` digits of ``word`` are the first ``m`` of pi*(1)."""
    word = tuple(word)
    n = len(word)
    c = critical_digits(beta, n)
    for m in range(n, 0, -1):
        if word[n - m :] == c[:m]:
            return m
    return 0


def critical_point(beta: BetaParam, m: int) -> Enclosure:
    """U_beta^m(1), exactly located for beta-numbers."""
    w = beta.upper_expansion
    if w is not None:
        if m == 0 or lex_compare(w.shift(m), w) is Order.Equal:
            return Enclosure(1, bits=beta.bits_used)
        return h_eval(w.shift(m), beta.value)
    return critical_orbit(beta, m + 1).points[m]


@dataclass(frozen=True)
class Cylinder:
    word: tuple
    left: Enclosure
    right: Enclosure
    full: bool
    image_right: Enclosure

    @property
    def length(self) -> int:
        return len(self.word)


def cylinder_of(beta: BetaParam, word: Sequence[int]) -> Cylinder:
    """The n-cylinder of ``word`` with its image endpoint U^m(1) under T^n."""
    word = tuple(word)
    if not is_admissible(beta, word):
        raise NotAdmissible(f"{word} is not admissible")
    n = len(word)
    left = h_eval(EventuallyPeriodicWord.finite(word), beta.value)
    m = longest_critical_suffix(beta, word)
    image = critical_point(beta, m)
    right = left + image / beta.value**n
    full = image.is_exact and image.lo == 1
    return Cylinder(word, left, right, full, image)


# ---------------------------------------------------------------------------
# the admissibility automaton


def _automaton(beta: BetaParam, n: int):
    """Digit limits and successor states of the automaton reading pi*(1).

    State ``j`` means the current word ends with the first ``j`` digits of
    pi*(1).  From state ``j`` a digit below ``c_j`` resets to 0 and the digit
    ``c_j`` advances; for eventually periodic pi*(1) the state at the end of
    the first period folds back onto the start of the period.
    """
    w = beta.upper_expansion
    if w is not None:
        size = len(w.preperiod) + len(w.period)
        c = w.prefix(size)
        nxt = [j + 1 if j + 1 < size else len(w.preperiod) for j in range(size)]
    else:
        size = n + 1
        c = critical_digits(beta, n + 1)
        nxt = [j + 1 for j in range(size - 1)] + [size - 1]
    return np.array(c, dtype=np.int64), np.array(nxt, dtype=np.int64)


@dataclass(frozen=True)
class WordTable:
    """All admissible words of one length, as parallel arrays sorted lexicographically."""

    n: int
    codes: np.ndarray  # base-(c_1 + 1) integer codes, sorted
    states: np.ndarray  # automaton state after reading each word
    left: np.ndarray  # float left endpoints of the cylinders
    base: int

    @property
    def count(self) -> int:
        return len(self.codes)

    def digits(self) -> np.ndarray:
        """Digit matrix of shape (count, n), decoded from the codes."""
        out = np.empty((self.count, self.n), dtype=np.int8)
        rest = self.codes.copy()
        for i in range(self.n - 1, -1, -1):
            out[:, i] = rest % self.base
            rest //= self.base
        return out

    def index_of(self, codes: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.codes, codes)
        if len(codes) and (idx.max() >= self.count or not np.array_equal(self.codes[idx], codes)):
            raise NotAdmissible("code lookup for a word outside the table")
        return idx


def word_tables(beta: BetaParam, n: int, budget: int = DEFAULT_WORD_BUDGET, strict: bool = True) -> list:
    """Word tables for lengths ``0 … n`` built by appending digits through the automaton.

    With ``strict=False`` the construction stops quietly at the last length
    that fits the budget instead of raising.
    """
    c, nxt = _automaton(beta, n)
    base = int(c[0]) + 1
    if n * math.log(base) > math.log(2.0**62):
        raise BudgetExceeded("word codes would overflow 64 bits")
    b = float(beta)
    tables = [WordTable(0, np.zeros(1, np.int64), np.zeros(1, np.int64), np.zeros(1), base)]
    for length in range(1, n + 1):
        prev = tables[-1]
        limit = c[prev.states]
        scale = b ** (-length)
        parts = []
        for d in range(base):
            ok = np.nonzero(limit >= d)[0]
            if len(ok) == 0:
                continue
            st = np.where(limit[ok] == d, nxt[prev.states[ok]], 0)
            parts.append((prev.codes[ok] * base + d, st, prev.left[ok] + d * scale))
        count = sum(len(p[0]) for p in parts)
        if count > budget:
            if strict:
                raise BudgetExceeded(f"{count} admissible words of length {length} exceed budget {budget}")
            break
        codes = np.concatenate([p[0] for p in parts])
        order = np.argsort(codes, kind="stable")
        states = np.concatenate([p[1] for p in parts])[order]
        left = np.concatenate([p[2] for p in parts])[order]
        tables.append(WordTable(length, codes[order], states, left, base))
    return tables


def image_right_values(beta: BetaParam, states: np.ndarray) -> np.ndarray:
    """Float values of U^m(1) indexed by automaton state."""
    top = int(states.max()) if len(states) else 0
    vals = np.array([critical_point(beta, m).mid() for m in range(top + 1)])
    return vals[states]


def enumerate_cylinders(beta: BetaParam, n: int, budget: int = DEFAULT_WORD_BUDGET) -> list:
    """All admissible n-cylinders sorted by left endpoint."""
    if n < 1:
        raise ValueError("n must be positive")
    table = word_tables(beta, n, budget)[-1]
    return [cylinder_of(beta, tuple(int(d) for d in row)) for row in table.digits()]


# ---------------------------------------------------------------------------
# infinite words


def in_beta_shift(beta: BetaParam, word: EventuallyPeriodicWord, horizon: int = TIE_HORIZON) -> bool:
    """True iff every shift of ``word`` is at most pi*(1) lexicographically."""
    _check_digits(beta, word.preperiod + word.period)
    shifts = word.distinct_shifts()
    w = beta.upper_expansion
    if w is not None:
        return all(lex_compare(s, w) is not Order.Greater for s in shifts)
    c = critical_digits(beta, horizon)
    for s in shifts:
        p = s.prefix(horizon)
        if p > c:
            return False
        if p == c:
            raise HorizonExceeded(f"shift of {word} ties with pi*(1) through {horizon} digits")
    return True


def recognize_word(beta: BetaParam, x: Point, horizon: int = 96, max_block: int = 16):
    """Find an eventually periodic word whose value under h_beta overlaps ``x``, if a short one exists."""
    try:
        digits = expand(beta, x, horizon)
    except Exception:
        return None
    xe = x if isinstance(x, Enclosure) else Enclosure(x, bits=beta.bits_used)
    for total in range(1, max_block + 1):
        for per in range(1, total + 1):
            pre = total - per
            cand = EventuallyPeriodicWord(digits[:pre], digits[pre : pre + per])
            if cand.prefix(horizon) == digits and h_eval(cand, beta.value).overlaps(xe):
                return cand
    return None


def in_H_gamma(
    beta: BetaParam, gamma: BetaParam, x: Point | EventuallyPeriodicWord, horizon: int = TIE_HORIZON
) -> bool:
    """Whether ``x`` lies in h_beta(S_gamma), decided through its code pi_beta(x)."""
    if not float(gamma) < float(beta):
        raise ValueError("requires gamma < beta")
    if isinstance(x, EventuallyPeriodicWord):
        word = x
    else:
        if isinstance(x, Enclosure) and x.is_exact and x.lo == 0 or (not isinstance(x, Enclosure) and x == 0):
            return True
        word = recognize_word(beta, x)
        if word is None:
            digits = expand(beta, x, horizon)
            if max(digits) > gamma.floor:
                return False
            c = critical_digits(gamma, horizon)
            for k in range(horizon):
                a = digits[k:]
                if a > c[: len(a)]:
                    return False
                if a == c[: len(a)]:
                    raise HorizonExceeded("code of x ties with pi*_gamma(1) at the horizon")
            return True
    if word.max_digit > gamma.floor:
        return False
    return in_beta_shift(gamma, word, horizon)
