"""Classification of parameters and constructions of beta-numbers."""

from __future__ import annotations

from dataclasses import dataclass

from .dynamics import (
    NON_PREPERIODIC,
    NON_SIMPLE,
    SIMPLE,
    BetaParam,
    _bits_for,
    _build,
    expand,
    is_parry_word,
)
from .errors import (
    NotAParryWord,
    PreconditionFailed,
    PrecisionInsufficient,
    Undecidable,
    VerificationFailed,
)
from .numkit import MAX_BITS, Enclosure, EventuallyPeriodicWord, Order, lex_compare_prefix

EMERGENT = "Emergent"
NON_EMERGENT = "NonEmergent"


@dataclass(frozen=True)
class Classification:
    kind: str
    expansion: EventuallyPeriodicWord | None
    prefix: tuple
    horizon: int

    @property
    def is_beta_number(self) -> bool:
        return self.kind in (SIMPLE, NON_SIMPLE)

    def describe(self) -> str:
        if self.expansion is not None:
            return f"{self.kind} {self.expansion.notation()}"
        return f"{self.kind}({self.horizon}) prefix {''.join(map(str, self.prefix))}"


def classify(beta: BetaParam, horizon: int = 64) -> Classification:
    """Classify beta by recurrence of the orbit of 1 within ``horizon`` steps."""
    if horizon < 2:
        raise ValueError("horizon must be at least 2")
    if beta.kind == NON_PREPERIODIC and horizon > beta.horizon:
        beta = _build(beta.kind_source, beta.payload, beta.label, horizon)
    if beta.expansion is not None:
        return Classification(beta.kind, beta.expansion, beta.expansion.prefix(horizon), horizon)
    return Classification(NON_PREPERIODIC, None, expand(beta, 1, horizon), horizon)


def greedy_orbit_classification(beta: BetaParam, horizon: int = 64) -> Classification:
    """Second classification route through the greedy T-orbit of 1.

    T^k(1) = 0 marks a finite expansion; T^k(1) = T^j(1) with j ≥ 1 marks a
    preperiodic one.  Candidates are accepted only when the same structure
    is seen at doubled precision.
    """
    bits = _bits_for(horizon, float(beta))
    previous = None
    while True:
        found = _greedy_structure(beta.enclosure(bits), horizon)
        if found == previous or bits >= MAX_BITS:
            break
        previous, bits = found, min(2 * bits, MAX_BITS)
    status, digits, index = found
    if status == "zero":
        word = EventuallyPeriodicWord.finite(digits)
        return Classification(SIMPLE, word, word.prefix(horizon), horizon)
    if status == "recur":
        word = EventuallyPeriodicWord(digits[:index], digits[index:])
        return Classification(NON_SIMPLE, word, word.prefix(horizon), horizon)
    return Classification(NON_PREPERIODIC, None, digits, horizon)


def _greedy_structure(b: Enclosure, horizon: int):
    x = Enclosure(1, bits=b.bits)
    orbit = []
    digits = []
    for _ in range(horizon):
        y = b * x
        try:
            d = y.floor()
        except PrecisionInsufficient:
            # beta*x sits on an integer: the orbit reaches 0 here
            d = int(round(float(y.mid())))
            digits.append(d)
            return ("zero", tuple(digits), None)
        digits.append(d)
        x = y - d
        if x.is_exact and x.lo == 0:
            return ("zero", tuple(digits), None)
        for i, prev in enumerate(orbit):
            if prev.overlaps(x):
                return ("recur", tuple(digits), i + 1)
        orbit.append(x)
    return ("none", tuple(digits), None)


def parry_solve(word: EventuallyPeriodicWord) -> BetaParam:
    """The unique beta whose greedy expansion of 1 is ``word``."""
    if not is_parry_word(word):
        raise NotAParryWord(f"{word} fails the shift condition")
    beta = BetaParam.from_parry_word(word)
    n = max(8, len(word.preperiod) + 2 * len(word.period))
    if expand(beta, 1, n) != word.prefix(n):
        raise VerificationFailed(f"expansion of 1 at the solved beta does not start with {word.prefix(n)}")
    return beta


def _strictly_less(a: BetaParam, b: BetaParam) -> bool:
    bits = max(a.bits_used, b.bits_used)
    return a.enclosure(bits).certainly_lt(b.enclosure(bits))


def nonsimple_between(beta1: BetaParam, beta2: BetaParam, prefix: int = 64) -> BetaParam:
    """A non-simple beta-number strictly between two parameters.

    With a = pi(1) at beta1 and b = pi(1) at beta2, take the first index m
    where a_m < b_m, the least n ≥ m for which b_{m+1…m+n} is not all zero,
    and solve for the beta whose expansion of 1 is b1…bm 0^n (a1 0^{m-1})^∞.
    """
    for beta in (beta1, beta2):
        if beta.kind == SIMPLE:
            raise PreconditionFailed(f"{beta.label} is a simple beta-number")
    if not _strictly_less(beta1, beta2):
        raise PreconditionFailed("requires beta1 < beta2")
    a = expand(beta1, 1, prefix)
    b = expand(beta2, 1, prefix)
    if lex_compare_prefix(a, b) is not Order.Less:
        raise PreconditionFailed("expansions of 1 agree through the prefix")
    m = next(i for i in range(prefix) if a[i] != b[i]) + 1
    nz = next((i for i, d in enumerate(b[m:]) if d != 0), None)
    if nz is None:
        raise PreconditionFailed("no nonzero digit after the split within the prefix")
    n = max(m, nz + 1)
    word = EventuallyPeriodicWord(b[:m] + (0,) * n, (a[0],) + (0,) * (m - 1))
    gamma = parry_solve(word)
    if not (_strictly_less(beta1, gamma) and _strictly_less(gamma, beta2)):
        raise VerificationFailed("constructed parameter is not strictly between the inputs")
    return gamma


def suffixes_strictly_below(word: EventuallyPeriodicWord) -> bool:
    """Exact check that every proper shift of ``word`` is strictly smaller than it."""
    return is_parry_word(word)


def emergent_status_for_beta_number(c: Classification) -> str:
    if c.kind == SIMPLE:
        return EMERGENT
    if c.kind == NON_SIMPLE:
        return NON_EMERGENT
    raise Undecidable("emergence is not decidable from a finite prefix of the expansion")
