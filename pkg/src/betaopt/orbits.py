"""Periodic orbits, orbit statistics and two-sided brackets on the ergodic supremum Q.

The lower end of a bracket is the best periodic average found.  The upper
end is the smaller of two sound bounds built from cylinder suprema of the
potential: the subadditive bound (1/m)·max_w Σ_i sup φ(T^i I_w), and the
maximum cycle mean of the depth-g cylinder graph, which bounds every
invariant measure because each orbit travels along a path in that graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .dynamics import SIMPLE, BetaParam
from .errors import BudgetExceeded, HorizonExceeded
from .numkit import Enclosure, EventuallyPeriodicWord, h_eval
from .potentials import HolderPotential
from .shift import DEFAULT_WORD_BUDGET, TIE_HORIZON, _automaton, critical_point, word_tables

DEFAULT_MAX_PERIOD = 12
DEFAULT_DEPTH = 16
DEFAULT_GRAPH_DEPTH = 12
# float64 orbit points carry this much absolute error at most (closed form, period ≤ 24)
POINT_RADIUS = 1e-14


def holder_constant(beta, alpha: float) -> float:
    """K_{α,β} = 1/(β^α − 1)."""
    return 1.0 / (float(beta) ** alpha - 1.0)


@dataclass(frozen=True, eq=False)
class PeriodicOrbit:
    """The orbit of h_beta((word)^∞) with ``word`` its least rotation."""

    word: tuple
    map_tag: str
    beta: BetaParam = field(repr=False)
    values: np.ndarray = field(repr=False)

    @property
    def period(self) -> int:
        return len(self.word)

    @property
    def key(self) -> tuple:
        return (self.word, self.map_tag)

    def __eq__(self, other) -> bool:
        return isinstance(other, PeriodicOrbit) and self.key == other.key and self.beta == other.beta

    def __hash__(self) -> int:
        return hash((self.key, self.beta))

    def rotations(self) -> list:
        w = self.word
        return [w[i:] + w[:i] for i in range(len(w))]

    @cached_property
    def points(self) -> tuple:
        """High-precision enclosures of the orbit points, in rotation order."""
        beta = self.beta
        out = []
        for r in self.rotations():
            word = EventuallyPeriodicWord.periodic(r)
            if beta.upper_expansion is not None and word == beta.upper_expansion:
                out.append(Enclosure(1, bits=beta.bits_used))
            else:
                out.append(h_eval(word, beta.value))
        return tuple(out)

    @property
    def lo(self) -> np.ndarray:
        return np.clip(self.values - POINT_RADIUS, 0.0, 1.0)

    @property
    def hi(self) -> np.ndarray:
        return np.clip(self.values + POINT_RADIUS, 0.0, 1.0)

    @property
    def contains_one(self) -> bool:
        w = self.beta.upper_expansion
        return w is not None and not w.preperiod and w.period in self.rotations()

    @property
    def label(self) -> str:
        return "(" + "".join(map(str, self.word)) + ")"

    def with_points(self, beta: BetaParam, map_tag: str | None = None) -> "PeriodicOrbit":
        """The orbit with the same word at another parameter."""
        return make_orbit(beta, self.word, map_tag or self.map_tag)


def periodic_values(beta, words: np.ndarray) -> np.ndarray:
    """Float points h((w)^∞) for every rotation of every row of ``words``."""
    b = float(beta)
    words = np.asarray(words, dtype=float)
    count, p = words.shape
    pw = b ** np.arange(p - 1, -1, -1)
    out = np.empty((count, p))
    denom = b**p - 1
    for k in range(p):
        rot = np.roll(words, -k, axis=1)
        out[:, k] = rot @ pw / denom
    return np.clip(out, 0.0, 1.0)


def make_orbit(beta: BetaParam, word, map_tag: str = "T") -> PeriodicOrbit:
    word = tuple(int(d) for d in word)
    rots = [word[i:] + word[:i] for i in range(len(word))]
    least = min(rots)
    if rots.count(least) > 1:
        raise ValueError(f"{word} is not primitive")
    values = periodic_values(beta, np.array([least]))[0]
    orbit = PeriodicOrbit(least, map_tag, beta, values)
    if orbit.contains_one:
        k = orbit.rotations().index(beta.upper_expansion.period)
        values = values.copy()
        values[k] = 1.0
        orbit = PeriodicOrbit(least, map_tag, beta, values)
    return orbit


def _closed_shift_lyndon(beta: BetaParam, p: int, budget: int) -> np.ndarray:
    """Least-rotation primitive words w of length p with every shift of w^∞ ⪯ pi*(1)."""
    beta_number = beta.upper_expansion is not None
    tables = word_tables(beta, p, budget)
    table = tables[p]
    digits = table.digits().astype(np.int64)
    base = table.base
    codes = table.codes
    # least rotation, primitive: code strictly below every proper rotation
    keep = np.ones(len(codes), dtype=bool)
    for k in range(1, p):
        hi_part = codes // base ** (p - k)
        lo_part = codes % base ** (p - k)
        rot = lo_part * base**k + hi_part
        keep &= codes < rot
    digits = digits[keep]
    if len(digits) == 0:
        return digits
    # reading w repeatedly must never leave the automaton
    c, nxt = _automaton(beta, max(TIE_HORIZON, p) if not beta_number else p)
    nstates = len(c)
    state = np.zeros(len(digits), dtype=np.int64)
    ok = np.ones(len(digits), dtype=bool)
    rounds = nstates + 1
    for _ in range(rounds):
        for i in range(p):
            d = digits[:, i]
            lim = c[state]
            ok &= d <= lim
            state = np.where(d == lim, nxt[state], 0)
            if not beta_number and np.any(ok & (state >= nstates - 1)):
                raise HorizonExceeded("periodic word ties with pi*(1) beyond the horizon")
    return digits[ok]


@lru_cache(maxsize=256)
def _orbits_cached(beta: BetaParam, max_period: int, map_tag: str, budget: int) -> tuple:
    orbits = []
    upper = beta.upper_expansion
    one_class = None
    if beta.kind == SIMPLE and upper is not None and not upper.preperiod:
        per = upper.period
        one_class = min(per[i:] + per[:i] for i in range(len(per)))
    for p in range(1, max_period + 1):
        words = _closed_shift_lyndon(beta, p, budget)
        if len(words) == 0:
            continue
        values = periodic_values(beta, words)
        for row, vals in zip(words, values):
            w = tuple(int(d) for d in row)
            if w == one_class:
                if map_tag == "T":
                    continue
                k = [w[i:] + w[:i] for i in range(p)].index(upper.period)
                vals = vals.copy()
                vals[k] = 1.0
            orbits.append(PeriodicOrbit(w, map_tag, beta, vals))
    return tuple(orbits)


def enumerate_periodic_orbits(
    beta: BetaParam, max_period: int = DEFAULT_MAX_PERIOD, map_tag: str = "T", budget: int = DEFAULT_WORD_BUDGET
) -> list:
    """All primitive periodic orbits of T_beta or U_beta of period ≤ max_period.

    T-orbits are the words whose shifts stay strictly below pi*(1); U adds the
    orbit of 1 when beta is simple.  Each orbit is named by its least rotation.
    """
    if map_tag not in ("T", "U"):
        raise ValueError("map_tag must be 'T' or 'U'")
    if max_period < 1:
        raise ValueError("max_period must be positive")
    if max_period * beta.floor**max_period > budget:
        raise BudgetExceeded(f"period {max_period} exceeds the enumeration budget")
    return list(_orbits_cached(beta, max_period, map_tag, budget))


def orbit_average(phi: HolderPotential, orbit: PeriodicOrbit) -> Enclosure:
    """Certified enclosure of (1/p)·Σ φ over the orbit points."""
    total = Enclosure(0)
    for pt in orbit.points:
        total = total + phi.eval_enclosure(pt)
    return total / orbit.period


def orbit_average_bounds(phi: HolderPotential, orbits) -> tuple:
    """Vectorized lower and upper bounds of the averages of many orbits."""
    if not orbits:
        return np.zeros(0), np.zeros(0)
    lo = np.concatenate([o.lo for o in orbits])
    hi = np.concatenate([o.hi for o in orbits])
    a, b = phi.bounds(lo, hi)
    sizes = np.array([o.period for o in orbits])
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    return np.add.reduceat(a, starts) / sizes, np.add.reduceat(b, starts) / sizes


def min_interpoint_distance(points, metric: str = "interval") -> float:
    """Smallest distance between distinct points; +inf for a single point."""
    vals = np.sort(np.array([p.mid() if isinstance(p, Enclosure) else float(p) for p in points]))
    if len(vals) < 2:
        return math.inf
    gaps = np.diff(vals)
    if metric == "circle":
        gaps = np.append(gaps, 1.0 - vals[-1] + vals[0])
    return float(np.min(gaps))


def set_distance(a, b) -> float:
    """d(A, B) = min over pairs."""
    va = np.array([p.mid() if isinstance(p, Enclosure) else float(p) for p in a])
    vb = np.array([p.mid() if isinstance(p, Enclosure) else float(p) for p in b])
    return float(np.min(np.abs(va[:, None] - vb[None, :])))


# ---------------------------------------------------------------------------
# the bracket


@dataclass(frozen=True)
class MaximizationBracket:
    lower: Enclosure
    upper: Enclosure
    witness: PeriodicOrbit | None
    n_used: int
    P_used: int
    lower_T: Enclosure | None = None
    witness_T: PeriodicOrbit | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def width(self) -> float:
        return float(self.upper.hi) - float(self.lower.lo)

    @property
    def midpoint(self) -> float:
        return 0.5 * (float(self.upper.hi) + float(self.lower.lo))

    def contains(self, q: float) -> bool:
        return float(self.lower.lo) <= q <= float(self.upper.hi)


def _cylinder_sups(beta: BetaParam, phi: HolderPotential, table) -> np.ndarray:
    n = table.n
    image = np.array([critical_point(beta, m).mid() for m in range(int(table.states.max()) + 1)])
    right = table.left + float(beta) ** (-n) * image[table.states]
    return phi.sup_on(table.left, np.minimum(right, 1.0))


def subadditive_bounds(beta: BetaParam, phi: HolderPotential, tables) -> list:
    """Per-depth bounds min((1/m)·max_w Σ sup φ on T^i I_w, (1/m)·(max_w S_mφ(left) + K|φ|))."""
    K = holder_constant(beta, phi.alpha)
    sem = phi.seminorm_bound
    out = []
    prev_sup = prev_left = None
    for m in range(1, len(tables)):
        t = tables[m]
        sups = _cylinder_sups(beta, phi, t)
        at_left = phi.eval(t.left)
        if m == 1:
            B, S = sups, at_left
        else:
            idx = tables[m - 1].index_of(t.codes % t.base ** (m - 1))
            B, S = sups + prev_sup[idx], at_left + prev_left[idx]
        prev_sup, prev_left = B, S
        slack = 1e-12 * (1 + float(np.max(np.abs(B)))) + 1e-12 * m
        out.append(min(float(B.max()), float(S.max()) + K * sem) / m + slack)
    return out


def graph_cycle_bound(
    beta: BetaParam, phi: HolderPotential, tables, depth: int, iters: int = 600, window: int = 24, check_every: int = 25
) -> float:
    """Upper bound on the maximum cycle mean of the depth-``depth`` cylinder graph.

    For any finite v and A the max-plus matrix, every cycle mean is at most
    (1/c)·max_i ((A^c v)_i − v_i); value iteration supplies the A^c v.
    """
    t = tables[depth]
    weights = _cylinder_sups(beta, phi, t)
    c, _ = _automaton(beta, depth)
    limit = c[t.states]
    base = t.base
    tail = (t.codes % base ** (depth - 1)) * base
    edges = []
    for d in range(base):
        nodes = np.nonzero(limit >= d)[0]
        edges.append((nodes, t.index_of(tail[nodes] + d)))
    first_dst = edges[0][1]  # digit 0 is always allowed
    v = np.zeros(t.count)
    history = [v]
    best = math.inf
    stale = 0
    for k in range(1, iters + 1):
        nxt_v = v[first_dst]
        for nodes, dst in edges[1:]:
            nxt_v[nodes] = np.maximum(nxt_v[nodes], v[dst])
        v = weights + nxt_v
        history.append(v)
        if len(history) > window + 1:
            history.pop(0)
        if k % check_every == 0 or k == iters:
            est = min(float(np.max(history[-1] - history[-1 - j])) / j for j in range(1, len(history)))
            stale = stale + 1 if est > best - 1e-14 else 0
            best = min(best, est)
            if stale >= 2:
                break
            # renormalize to keep magnitudes small; differences are unaffected
            shift = float(v.max())
            history = [h - shift for h in history]
            v = history[-1]
    slack = 1e-12 * (1 + float(np.max(np.abs(weights))))
    return best + slack


def critical_orbit_sums(beta: BetaParam, phi: HolderPotential, n: int) -> list:
    """(1/m)·S_m^U φ(1) for m = 1 … n."""
    vals = np.array([critical_point(beta, m).mid() for m in range(n)])
    sums = np.cumsum(phi.eval(vals))
    return [float(s) / (m + 1) for m, s in enumerate(sums)]


def q_bracket(
    beta: BetaParam,
    phi: HolderPotential,
    n: int = DEFAULT_DEPTH,
    max_period: int = DEFAULT_MAX_PERIOD,
    budget: int = DEFAULT_WORD_BUDGET,
    graph_depth: int = DEFAULT_GRAPH_DEPTH,
) -> MaximizationBracket:
    """Two-sided bracket on Q(T_beta, φ) = Q(U_beta, φ)."""
    orbits_u = enumerate_periodic_orbits(beta, max_period, "U", budget)
    orbits_t = [o for o in orbits_u if not o.contains_one]
    lo_u, _ = orbit_average_bounds(phi, orbits_u)
    i_u = int(np.argmax(lo_u))
    lo_t, _ = orbit_average_bounds(phi, orbits_t)
    i_t = int(np.argmax(lo_t))
    witness = orbits_u[i_u]
    witness_t = orbits_t[i_t]
    lower = orbit_average(phi, witness)
    lower_t = orbit_average(phi, witness_t)

    tables = word_tables(beta, n, budget, strict=False)
    n_used = len(tables) - 1
    if n_used < 1:
        raise BudgetExceeded("not even one-digit words fit the budget")
    sub = subadditive_bounds(beta, phi, tables)
    crit = critical_orbit_sums(beta, phi, n_used)
    per_depth = [max(s, c) for s, c in zip(sub, crit)]
    g = min(graph_depth, n_used)
    graph = [graph_cycle_bound(beta, phi, tables, d) for d in range(1, g + 1)]
    upper = Enclosure(min(min(per_depth), min(graph)))
    diag = {
        "subadditive_by_depth": per_depth,
        "graph_by_depth": graph,
        "graph_depth": g,
        "orbits_U": len(orbits_u),
        "orbits_T": len(orbits_t),
        "depth_requested": n,
        "depth_truncated": n_used < n,
        "consistent": float(lower.lo) <= float(upper.hi),
    }
    return MaximizationBracket(lower, upper, witness, n_used, max_period, lower_t, witness_t, diag)
