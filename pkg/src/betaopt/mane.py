"""Bousch operator, calibrated sub-actions and revealed versions on a breakpoint grid.

Grid functions carry a left and a right value at every node.  Between
nodes they interpolate linearly from the right value at the left node to
the left value at the right node, so jumps can sit exactly on nodes.
The sub-action's jumps lie on the critical orbit, which the grid contains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .dynamics import BetaParam, critical_orbit
from .errors import NoConvergence
from .numkit import Enclosure
from .orbits import MaximizationBracket, PeriodicOrbit, holder_constant, q_bracket
from .potentials import HolderPotential

DEFAULT_GRID = 4096
DEFAULT_CRITICAL_POINTS = 64
SNAP_TOL = 1e-11
HOLDER_ALLOWANCE = 1.05


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True, eq=False)
class BreakpointGrid:
    beta: BetaParam
    nodes: np.ndarray
    critical: np.ndarray  # node lies on the critical orbit O*(1)
    discontinuity: np.ndarray  # node lies in D_beta

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def one(self) -> int:
        return self.size - 1

    def snap(self, y: np.ndarray) -> np.ndarray:
        """Index of a node within SNAP_TOL of each query, or −1."""
        y = np.asarray(y, dtype=float)
        idx = np.clip(np.searchsorted(self.nodes, y), 0, self.size - 1)
        lower = np.clip(idx - 1, 0, self.size - 1)
        best = np.where(np.abs(self.nodes[lower] - y) < np.abs(self.nodes[idx] - y), lower, idx)
        return np.where(np.abs(self.nodes[best] - y) <= SNAP_TOL, best, -1)

    def locate(self, y: np.ndarray):
        """Snap index, left interval node and interpolation weight for each query."""
        y = np.clip(np.asarray(y, dtype=float), 0.0, 1.0)
        snap = self.snap(y)
        i0 = np.clip(np.searchsorted(self.nodes, y, side="right") - 1, 0, self.size - 2)
        h = self.nodes[i0 + 1] - self.nodes[i0]
        w = np.clip((y - self.nodes[i0]) / h, 0.0, 1.0)
        return snap, i0, w

    @cached_property
    def preimages(self) -> list:
        """Per branch j: (y_j, snap, i0, w, valid for right limits, valid for left limits)."""
        b = float(self.beta)
        out = []
        for j in range(self.beta.floor + 1):
            y = (self.nodes + j) / b
            snap, i0, w = self.locate(y)
            at_one = np.abs(y - 1.0) <= SNAP_TOL
            valid_right = (y < 1.0) & ~at_one
            valid_left = (y <= 1.0) | at_one
            y = np.where(snap >= 0, self.nodes[np.maximum(snap, 0)], np.minimum(y, 1.0))
            out.append((y, snap, i0, w, valid_right, valid_left))
        return out

    def _image(self, upper: bool) -> np.ndarray:
        """U_beta (upper) or T_beta of every node, with D_beta handled exactly."""
        b = float(self.beta)
        y = b * self.nodes
        if upper:
            img = y - (np.ceil(y) - 1)
            img[self.discontinuity] = 1.0
            img[0] = 0.0
        else:
            img = y - np.floor(y)
            img[self.discontinuity] = 0.0
            if self.beta.is_integer:
                img[self.one] = 0.0
        near = self.snap(img)
        img = np.where(near >= 0, self.nodes[np.maximum(near, 0)], img)
        return np.clip(img, 0.0, 1.0)

    @cached_property
    def upper_image(self) -> np.ndarray:
        return self._image(True)

    @cached_property
    def lower_image(self) -> np.ndarray:
        return self._image(False)


def build_grid(
    beta: BetaParam, n_uniform: int = DEFAULT_GRID, n_critical: int = DEFAULT_CRITICAL_POINTS, extra=()
) -> BreakpointGrid:
    """Uniform nodes ∪ D_beta ∪ critical-orbit points ∪ ``extra`` ∪ {0, 1}."""
    crit = critical_orbit(beta, n_critical)
    crit_pts = np.array([p.mid() for p in crit.points[:n_critical]])
    disc = np.array([d.mid() for d in beta.D if d.mid() < 1.0])
    special = np.concatenate([crit_pts, disc, np.asarray(list(extra), dtype=float), [0.0, 1.0]])
    special = special[(special >= 0) & (special <= 1)]
    special = np.unique(special)
    # keep special points exactly; drop uniform points colliding with them
    uni = np.linspace(0.0, 1.0, n_uniform)
    nodes = np.unique(np.concatenate([special, uni]))
    keep = np.ones(len(nodes), dtype=bool)
    for i in range(1, len(nodes)):
        if nodes[i] - nodes[i - 1] <= 10 * SNAP_TOL:
            drop = i if not np.any(np.abs(special - nodes[i]) == 0) else i - 1
            keep[drop] = False
    nodes = nodes[keep]
    nodes[0], nodes[-1] = 0.0, 1.0

    def flags(points: np.ndarray) -> np.ndarray:
        f = np.zeros(len(nodes), dtype=bool)
        if len(points):
            idx = np.searchsorted(nodes, points)
            for i, p in zip(idx, points):
                for k in (i - 1, i):
                    if 0 <= k < len(nodes) and abs(nodes[k] - p) <= 10 * SNAP_TOL:
                        f[k] = True
        return f

    return BreakpointGrid(beta, nodes, flags(crit_pts), flags(disc))


@dataclass(frozen=True, eq=False)
class OneSidedGridFunction:
    grid: BreakpointGrid
    left_values: np.ndarray
    right_values: np.ndarray
    side: str = "right"  # which one-sided value is the function's own value at a node

    @property
    def values(self) -> np.ndarray:
        return self.right_values if self.side == "right" else self.left_values

    def read(self, snap: np.ndarray, i0: np.ndarray, w: np.ndarray, side: str) -> np.ndarray:
        inner = (1 - w) * self.right_values[i0] + w * self.left_values[i0 + 1]
        own = self.right_values if side == "right" else self.left_values
        return np.where(snap >= 0, own[np.maximum(snap, 0)], inner)

    def at(self, y, side: str = "right") -> np.ndarray:
        snap, i0, w = self.grid.locate(y)
        return self.read(snap, i0, w, side)

    def sup_norm(self) -> float:
        return float(max(np.max(np.abs(self.left_values)), np.max(np.abs(self.right_values))))

    def __sub__(self, other: "OneSidedGridFunction") -> float:
        return float(
            max(np.max(np.abs(self.left_values - other.left_values)), np.max(np.abs(self.right_values - other.right_values)))
        )

    def to_rows(self) -> list:
        return [(float(x), float(a), float(b)) for x, a, b in zip(self.grid.nodes, self.left_values, self.right_values)]


def zero_function(grid: BreakpointGrid) -> OneSidedGridFunction:
    return OneSidedGridFunction(grid, np.zeros(grid.size), np.zeros(grid.size))


def _psi_reads(psi, grid: BreakpointGrid, shift: float = 0.0) -> list:
    """(right, left) readings of ψ − shift at every preimage branch."""
    out = []
    for y, snap, i0, w, _, _ in grid.preimages:
        if isinstance(psi, OneSidedGridFunction):
            out.append((psi.read(snap, i0, w, "right") - shift, psi.read(snap, i0, w, "left") - shift))
        else:
            v = np.asarray(psi.eval(y), dtype=float) - shift
            out.append((v, v))
    return out


def _apply(grid: BreakpointGrid, reads: list, u: OneSidedGridFunction) -> OneSidedGridFunction:
    right = np.full(grid.size, -np.inf)
    left = np.full(grid.size, -np.inf)
    for (y, snap, i0, w, vr, vl), (pr, pl) in zip(grid.preimages, reads):
        right = np.where(vr, np.maximum(right, u.read(snap, i0, w, "right") + pr), right)
        left = np.where(vl, np.maximum(left, u.read(snap, i0, w, "left") + pl), left)
    left[0] = right[0]
    return OneSidedGridFunction(grid, left, right)


def bousch_apply(beta: BetaParam, psi, u: OneSidedGridFunction) -> OneSidedGridFunction:
    """L_ψ(u)(x) = max over preimages y ≠ 1 of x of (u + ψ)(y), at both sides of every node."""
    if u.grid.beta != beta:
        raise ValueError("grid was built for another beta")
    return _apply(u.grid, _psi_reads(psi, u.grid), u)


# ---------------------------------------------------------------------------
# sub-actions


@dataclass
class ManeReport:
    q_used: Enclosure
    q_mid: float
    slack: float
    residual: float
    max_tilde_minus: float
    max_tilde_plus: float
    holder_ratio: float
    holder_ratio_ok: bool
    subaction_sup: float
    subaction_bound: float
    subaction_bound_ok: bool
    iterations: int = 0
    converged: bool = False
    revelation_ok: bool | None = None
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "q_used"}
        d["q_used"] = [float(self.q_used.lo), float(self.q_used.hi)]
        return d


def calibrated_subaction(
    beta: BetaParam,
    phi: HolderPotential,
    iters: int = 4000,
    window: int = 8,
    tol: float = 1e-10,
    grid: BreakpointGrid | None = None,
    grid_size: int = DEFAULT_GRID,
    bracket: MaximizationBracket | None = None,
    depth: int = 16,
    max_period: int = 12,
) -> tuple:
    """Iterate p_n = L^n_φ̄(0) and take trailing-window maxima as the limsup.

    Stops once consecutive window maxima differ by less than ``tol`` plus the
    bracket width, the most the normalization error can move them per step.
    """
    if bracket is None:
        bracket = q_bracket(beta, phi, depth, max_period)
    q = bracket.midpoint
    slack = bracket.width
    if grid is None:
        extra = list(phi.breakpoints())
        if bracket.witness is not None:
            extra += list(bracket.witness.values)
        grid = build_grid(beta, grid_size, extra=extra)
    reads = _psi_reads(phi, grid, q)
    p = zero_function(grid)
    recent = [p]
    u_prev = p
    converged = False
    k = 0
    for k in range(1, iters + 1):
        p = _apply(grid, reads, p)
        recent.append(p)
        if len(recent) > window:
            recent.pop(0)
        u = OneSidedGridFunction(
            grid,
            np.max([r.left_values for r in recent], axis=0),
            np.max([r.right_values for r in recent], axis=0),
        )
        if k >= window and (u - u_prev) < tol + slack:
            converged = True
            break
        u_prev = u
    residual = _apply(grid, reads, u) - u
    u_minus, u_plus = regularize(u, beta, phi.shifted(q))
    _, _, report = revealed_versions(phi, q, u_minus, u_plus, beta, bracket=bracket)
    report.residual = residual
    report.iterations = k
    report.converged = converged
    return u, report


def regularize(u: OneSidedGridFunction, beta: BetaParam, phi_bar: HolderPotential) -> tuple:
    """The left-continuous u⁻ and right-continuous u⁺ versions of a grid sub-action."""
    grid = u.grid
    left = u.left_values.copy()
    left[0] = u.right_values[0]
    u_minus = OneSidedGridFunction(grid, left, u.right_values.copy(), side="left")
    right = u.right_values.copy()
    t1 = grid.lower_image[grid.one]
    right[grid.one] = float(u.at([t1], "right")[0]) - float(phi_bar.eval(1.0))
    u_plus = OneSidedGridFunction(grid, u.left_values.copy(), right, side="right")
    return u_minus, u_plus


def _holder_ratio(grid: BreakpointGrid, values: np.ndarray, scale: float, alpha: float) -> float:
    """Largest |Δu| / (scale·|Δx|^α) over node pairs whose closed span avoids the critical orbit."""
    if scale <= 0:
        return 0.0 if np.ptp(values) == 0 else math.inf
    crit = np.concatenate([[0], np.cumsum(grid.critical.astype(int))])
    n = grid.size
    worst = 0.0
    strides = sorted({1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, n // 4, n // 2})
    for s in strides:
        if s < 1 or s >= n:
            continue
        i = np.arange(n - s)
        j = i + s
        clean = (crit[j + 1] - crit[i]) == 0
        if not clean.any():
            continue
        dx = grid.nodes[j[clean]] - grid.nodes[i[clean]]
        du = np.abs(values[j[clean]] - values[i[clean]]) - 1e-9
        ratio = np.max(np.maximum(du, 0.0) / (scale * dx**alpha))
        worst = max(worst, float(ratio))
    return worst


def revealed_versions(
    phi: HolderPotential,
    q: float,
    u_minus: OneSidedGridFunction,
    u_plus: OneSidedGridFunction,
    beta: BetaParam,
    bracket: MaximizationBracket | None = None,
    witness: PeriodicOrbit | None = None,
    revelation_tol: float = 5e-3,
) -> tuple:
    """φ̃⁻ = φ̄ + u⁻ − u⁻∘U and φ̃⁺ = φ̄ + u⁺ − u⁺∘T at every node, with the Mañé checks."""
    grid = u_minus.grid
    phibar = np.asarray(phi.eval(grid.nodes), dtype=float) - q
    tm = phibar + u_minus.values - u_minus.at(grid.upper_image, "left")
    tp = phibar + u_plus.values - u_plus.at(grid.lower_image, "right")
    tilde_minus = OneSidedGridFunction(grid, tm, tm, side="left")
    tilde_plus = OneSidedGridFunction(grid, tp, tp, side="right")

    K = holder_constant(beta, phi.alpha)
    scale = K * phi.seminorm_bound
    ratio = max(
        _holder_ratio(grid, u_minus.values, scale, phi.alpha), _holder_ratio(grid, u_plus.values, scale, phi.alpha)
    )
    bound = (2 + 3 * K) * phi.seminorm_bound
    sup_u = max(u_minus.sup_norm(), u_plus.sup_norm())
    if bracket is not None:
        q_used, slack = Enclosure(float(bracket.lower.lo), float(bracket.upper.hi)), bracket.width
        witness = witness or bracket.witness
    else:
        q_used, slack = Enclosure(q), 0.0
    revelation = None
    if witness is not None:
        idx = grid.snap(witness.values)
        if np.all(idx >= 0):
            gap = np.minimum(np.abs(tm[idx]), np.abs(tp[idx]))
            revelation = bool(np.all(gap <= revelation_tol + slack))
    report = ManeReport(
        q_used=q_used,
        q_mid=float(q),
        slack=float(slack),
        residual=float("nan"),
        max_tilde_minus=float(tm.max()),
        max_tilde_plus=float(tp.max()),
        holder_ratio=ratio,
        holder_ratio_ok=ratio <= HOLDER_ALLOWANCE,
        subaction_sup=sup_u,
        subaction_bound=bound,
        subaction_bound_ok=sup_u <= bound + 1e-6,
        revelation_ok=revelation,
    )
    return tilde_minus, tilde_plus, report


# ---------------------------------------------------------------------------
# the circle map x ↦ kx mod 1


@dataclass(frozen=True)
class CircleConstants:
    """Concrete expanding-map constants used for the circle map of degree k."""

    k: int
    alpha: float
    lam: float
    gamma_exp: float
    delta: float
    tau: float
    N: int
    diam: float
    L: float


def circle_constants(k: int, alpha: float = 1.0) -> CircleConstants:
    """λ = k, γ = 1/(2k), δ = 1/4, τ = min((λ−1)δ/2, δ), N = ⌈1/τ⌉, diam = 1/2 and the sub-action constant L."""
    lam = float(k)
    delta = 0.25
    tau = min((lam - 1) * delta / 2, delta)
    N = math.ceil(1 / tau)
    diam = 0.5
    la = lam**alpha
    L = max(1 / (la - 1), delta ** (-alpha) * N * (delta**alpha * la / (2**alpha * (la - 1)) + diam**alpha))
    return CircleConstants(k, alpha, lam, 1 / (2 * k), delta, tau, N, diam, L)


@dataclass(frozen=True)
class CircleFunction:
    nodes: np.ndarray  # i/N for i = 0 … N−1
    values: np.ndarray

    def at(self, y) -> np.ndarray:
        y = np.mod(np.asarray(y, dtype=float), 1.0)
        return np.interp(y, np.append(self.nodes, 1.0), np.append(self.values, self.values[0]))


@dataclass
class CircleReport:
    q_used: Enclosure
    q_mid: float
    slack: float
    max_psi: float
    holder_seminorm: float
    L: float
    holder_ok: bool
    depth: int
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "q_used"}
        d["q_used"] = [float(self.q_used.lo), float(self.q_used.hi)]
        return d


def circle_holder_seminorm(f: CircleFunction, alpha: float) -> float:
    n = len(f.nodes)
    worst = 0.0
    for s in sorted({1, 2, 3, 5, 8, 13, 34, 89, 233, n // 8, n // 4, n // 2}):
        if s < 1 or s > n // 2:
            continue
        du = np.abs(np.roll(f.values, -s) - f.values)
        worst = max(worst, float(np.max(du)) / (s / n) ** alpha)
    return worst


def expanding_subaction(
    k: int,
    phi: HolderPotential,
    depth: int = 24,
    grid_size: int = DEFAULT_GRID,
    bracket: MaximizationBracket | None = None,
    bracket_depth: int = 16,
    max_period: int = 12,
    tol: float = 1e-3,
) -> tuple:
    """u = max over m ≤ depth of w_m with w_{m+1}(x) = max over the k preimages y of (w_m + φ̄)(y).

    Raises NoConvergence when the last layer still lifts the running maximum
    by more than ``tol`` plus the bracket width.
    """
    if k < 2:
        raise ValueError("degree must be at least 2")
    if depth < 1:
        raise ValueError("depth must be positive")
    if bracket is None:
        bracket = q_bracket(BetaParam.from_rational(k), phi, bracket_depth, max_period)
    q = bracket.midpoint
    nodes = np.arange(grid_size) / grid_size
    pre = [(nodes + j) / k for j in range(k)]
    phibar_pre = [np.asarray(phi.eval(y), dtype=float) - q for y in pre]
    w = CircleFunction(nodes, np.zeros(grid_size))
    u = w.values.copy()
    for _ in range(depth):
        w = CircleFunction(nodes, np.max([w.at(y) + pb for y, pb in zip(pre, phibar_pre)], axis=0))
        gain = float(np.max(w.values - u))
        np.maximum(u, w.values, out=u)
    if gain > tol + bracket.width:
        raise NoConvergence(f"depth {depth} still raises the sub-action by {gain:.3g}")
    uf = CircleFunction(nodes, u)
    image = (np.arange(grid_size) * k) % grid_size
    psi = np.asarray(phi.eval(nodes), dtype=float) - q + u - u[image]
    consts = circle_constants(k, phi.alpha)
    sem = circle_holder_seminorm(uf, phi.alpha)
    report = CircleReport(
        q_used=Enclosure(float(bracket.lower.lo), float(bracket.upper.hi)),
        q_mid=float(q),
        slack=float(bracket.width),
        max_psi=float(psi.max()),
        holder_seminorm=sem,
        L=consts.L,
        holder_ok=sem <= consts.L * phi.seminorm_bound,
        depth=depth,
        diagnostics={"last_layer_gain": gain},
    )
    return uf, report
