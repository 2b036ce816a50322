"""Hölder potentials on [0, 1] with certified seminorm bounds.

Every family evaluates on float arrays and bounds itself on intervals:
``sup_on(a, b)`` and ``inf_on(a, b)`` are rigorous up to float rounding,
which ``bounds`` absorbs with a small relative pad.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .numkit import Enclosure

ROUNDING_PAD = 1e-13


def holder_from_lipschitz(lip: float, osc: float, alpha: float) -> float:
    """Bound |f|_α on [0, 1] from a Lipschitz constant and the oscillation of f."""
    if alpha == 1 or lip == 0:
        return lip
    t = osc / lip
    if t >= 1:
        return lip
    return lip**alpha * osc ** (1 - alpha)


def _arr(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


class HolderPotential:
    """Base class; subclasses define ``eval``, ``sup_on`` and ``inf_on``."""

    alpha: float
    seminorm_bound: float
    family_tag: str

    def eval(self, x):
        raise NotImplementedError

    def __call__(self, x):
        return self.eval(x)

    def sup_on(self, a, b):
        raise NotImplementedError

    def inf_on(self, a, b):
        raise NotImplementedError

    def sup_norm_bound(self) -> float:
        return float(max(abs(self.sup_on(0.0, 1.0)), abs(self.inf_on(0.0, 1.0))))

    def holder_norm_bound(self) -> float:
        return self.sup_norm_bound() + self.seminorm_bound

    def breakpoints(self) -> tuple:
        """Points where the potential is not smooth; useful as grid nodes."""
        return ()

    def bounds(self, lo, hi):
        """Lower and upper bounds of the potential over each ``[lo, hi]``."""
        lo, hi = _arr(lo), _arr(hi)
        s, i = _arr(self.sup_on(lo, hi)), _arr(self.inf_on(lo, hi))
        pad = ROUNDING_PAD * (1 + np.maximum(abs(s), abs(i)))
        return i - pad, s + pad

    def eval_enclosure(self, x: Enclosure) -> Enclosure:
        lo = np.nextafter(float(x.lo), -np.inf)
        hi = np.nextafter(float(x.hi), np.inf)
        lo, hi = max(lo, 0.0), min(hi, 1.0)
        a, b = self.bounds(lo, hi)
        return Enclosure(float(a), float(b))

    def describe(self) -> dict:
        return {"family": self.family_tag, "alpha": self.alpha, "seminorm_bound": self.seminorm_bound}

    # algebra
    def __add__(self, other: "HolderPotential") -> "HolderPotential":
        return Sum((self, other))

    def __neg__(self) -> "HolderPotential":
        return Scaled(-1.0, self)

    def __sub__(self, other: "HolderPotential") -> "HolderPotential":
        return Sum((self, Scaled(-1.0, other)))

    def scaled(self, factor: float) -> "HolderPotential":
        return Scaled(float(factor), self)

    def shifted(self, c: float) -> "HolderPotential":
        return Sum((self, Constant(-float(c), self.alpha)))


@dataclass(frozen=True)
class Constant(HolderPotential):
    value: float = 0.0
    alpha: float = 1.0
    family_tag: str = field(default="Constant", init=False)

    @property
    def seminorm_bound(self) -> float:
        return 0.0

    def eval(self, x):
        return np.full_like(_arr(x), self.value)

    def sup_on(self, a, b):
        return np.full_like(_arr(a), self.value)

    inf_on = sup_on

    def describe(self) -> dict:
        return {**super().describe(), "value": self.value}


@dataclass(frozen=True)
class Affine(HolderPotential):
    """a0 + a1·x; the identity when a0 = 0 and a1 = 1."""

    a0: float = 0.0
    a1: float = 1.0
    alpha: float = 1.0
    family_tag: str = field(default="Affine", init=False)

    @property
    def seminorm_bound(self) -> float:
        return abs(self.a1)

    def eval(self, x):
        return self.a0 + self.a1 * _arr(x)

    def sup_on(self, a, b):
        return np.maximum(self.eval(a), self.eval(b))

    def inf_on(self, a, b):
        return np.minimum(self.eval(a), self.eval(b))

    def describe(self) -> dict:
        return {**super().describe(), "a0": self.a0, "a1": self.a1}


def identity(alpha: float = 1.0) -> Affine:
    return Affine(0.0, 1.0, alpha)


@dataclass(frozen=True)
class DistancePower(HolderPotential):
    """coef · d(x, F)^α for a finite set F, in the interval or circle metric."""

    points: tuple
    coef: float = 1.0
    alpha: float = 1.0
    metric: str = "interval"
    family_tag: str = field(default="DistancePower", init=False)

    def __post_init__(self):
        pts = tuple(sorted(float(p) for p in self.points))
        if not pts:
            raise ValueError("need at least one point")
        if self.metric not in ("interval", "circle"):
            raise ValueError("metric must be 'interval' or 'circle'")
        object.__setattr__(self, "points", pts)

    @property
    def seminorm_bound(self) -> float:
        return abs(self.coef)

    @property
    def _anchors(self) -> np.ndarray:
        f = np.array(self.points)
        if self.metric == "circle":
            f = np.concatenate([f - 1.0, f, f + 1.0])
        return f

    def distance(self, x):
        x = _arr(x)
        f = self._anchors
        return np.min(np.abs(x[..., None] - f), axis=-1)

    def eval(self, x):
        return self.coef * self.distance(x) ** self.alpha

    def _dist_range(self, a, b):
        a, b = np.broadcast_arrays(_arr(a), _arr(b))
        f = self._anchors
        da, db = self.distance(a), self.distance(b)
        dmax = np.maximum(da, db)
        dmin = np.minimum(da, db)
        for k in range(len(f)):
            inside = (a <= f[k]) & (f[k] <= b)
            dmin = np.where(inside, 0.0, dmin)
            if k + 1 < len(f):
                m = 0.5 * (f[k] + f[k + 1])
                inside = (a <= m) & (m <= b)
                dmax = np.where(inside, np.maximum(dmax, 0.5 * (f[k + 1] - f[k])), dmax)
        return dmin, dmax

    def sup_on(self, a, b):
        dmin, dmax = self._dist_range(a, b)
        return self.coef * (dmax if self.coef >= 0 else dmin) ** self.alpha

    def inf_on(self, a, b):
        dmin, dmax = self._dist_range(a, b)
        return self.coef * (dmin if self.coef >= 0 else dmax) ** self.alpha

    def breakpoints(self) -> tuple:
        return tuple(p for p in self.points if 0 <= p <= 1)

    def describe(self) -> dict:
        return {**super().describe(), "points": list(self.points), "coef": self.coef, "metric": self.metric}


@dataclass(frozen=True)
class TrigPolynomial(HolderPotential):
    """Σ_k a_k cos 2πkx + b_k sin 2πkx, with a_0 the constant term."""

    cos_coeffs: tuple
    sin_coeffs: tuple
    alpha: float = 1.0
    family_tag: str = field(default="TrigPolynomial", init=False)

    def __post_init__(self):
        a = tuple(float(v) for v in self.cos_coeffs)
        b = tuple(float(v) for v in self.sin_coeffs)
        n = max(len(a), len(b) + 1, 1)
        a = a + (0.0,) * (n - len(a))
        b = b + (0.0,) * (n - 1 - len(b))
        object.__setattr__(self, "cos_coeffs", a)
        object.__setattr__(self, "sin_coeffs", b)

    @property
    def _amps(self) -> np.ndarray:
        a = np.array(self.cos_coeffs[1:])
        b = np.array(self.sin_coeffs)
        return np.hypot(a, b)

    @property
    def lipschitz(self) -> float:
        k = np.arange(1, len(self.cos_coeffs))
        return float(2 * math.pi * np.sum(k * self._amps))

    @property
    def second_derivative_bound(self) -> float:
        k = np.arange(1, len(self.cos_coeffs))
        return float((2 * math.pi) ** 2 * np.sum(k * k * self._amps))

    @property
    def seminorm_bound(self) -> float:
        return holder_from_lipschitz(self.lipschitz, 2 * float(np.sum(self._amps)), self.alpha)

    def _terms(self, x):
        x = _arr(x)
        k = np.arange(1, len(self.cos_coeffs))
        ang = 2 * math.pi * x[..., None] * k
        return ang, np.array(self.cos_coeffs[1:]), np.array(self.sin_coeffs), k

    def eval(self, x):
        ang, a, b, _ = self._terms(x)
        return self.cos_coeffs[0] + np.sum(a * np.cos(ang) + b * np.sin(ang), axis=-1)

    def derivative(self, x):
        ang, a, b, k = self._terms(x)
        return 2 * math.pi * np.sum(k * (b * np.cos(ang) - a * np.sin(ang)), axis=-1)

    def _excess(self, a, b):
        a, b = _arr(a), _arr(b)
        mid, r = 0.5 * (a + b), 0.5 * np.abs(b - a)
        second = np.abs(self.derivative(mid)) * r + 0.5 * self.second_derivative_bound * r * r
        first = self.lipschitz * r
        return mid, np.minimum(second, first)

    def sup_on(self, a, b):
        mid, ex = self._excess(a, b)
        return self.eval(mid) + ex

    def inf_on(self, a, b):
        mid, ex = self._excess(a, b)
        return self.eval(mid) - ex

    def describe(self) -> dict:
        return {**super().describe(), "cos": list(self.cos_coeffs), "sin": list(self.sin_coeffs)}


@dataclass(frozen=True)
class PiecewiseAffine(HolderPotential):
    """Linear interpolation of ``values`` at increasing ``knots`` covering [0, 1]."""

    knots: tuple
    values: tuple
    alpha: float = 1.0
    family_tag: str = field(default="PiecewiseAffine", init=False)

    def __post_init__(self):
        k = tuple(float(v) for v in self.knots)
        v = tuple(float(v) for v in self.values)
        if len(k) != len(v) or len(k) < 2:
            raise ValueError("knots and values must have equal length ≥ 2")
        if any(b <= a for a, b in zip(k, k[1:])):
            raise ValueError("knots must increase strictly")
        object.__setattr__(self, "knots", k)
        object.__setattr__(self, "values", v)

    @property
    def lipschitz(self) -> float:
        k, v = np.array(self.knots), np.array(self.values)
        return float(np.max(np.abs(np.diff(v) / np.diff(k))))

    @property
    def seminorm_bound(self) -> float:
        return holder_from_lipschitz(self.lipschitz, max(self.values) - min(self.values), self.alpha)

    def eval(self, x):
        return np.interp(_arr(x), self.knots, self.values)

    def _range(self, a, b):
        a, b = np.broadcast_arrays(_arr(a), _arr(b))
        va, vb = self.eval(a), self.eval(b)
        hi, lo = np.maximum(va, vb), np.minimum(va, vb)
        for t, v in zip(self.knots, self.values):
            inside = (a <= t) & (t <= b)
            hi = np.where(inside, np.maximum(hi, v), hi)
            lo = np.where(inside, np.minimum(lo, v), lo)
        return lo, hi

    def sup_on(self, a, b):
        return self._range(a, b)[1]

    def inf_on(self, a, b):
        return self._range(a, b)[0]

    def breakpoints(self) -> tuple:
        return self.knots

    def describe(self) -> dict:
        return {**super().describe(), "knots": list(self.knots), "values": list(self.values)}


@dataclass(frozen=True)
class Scaled(HolderPotential):
    factor: float
    inner: HolderPotential
    family_tag: str = field(default="Scaled", init=False)

    @property
    def alpha(self) -> float:
        return self.inner.alpha

    @property
    def seminorm_bound(self) -> float:
        return abs(self.factor) * self.inner.seminorm_bound

    def eval(self, x):
        return self.factor * self.inner.eval(x)

    def sup_on(self, a, b):
        f = self.inner.sup_on if self.factor >= 0 else self.inner.inf_on
        return self.factor * f(a, b)

    def inf_on(self, a, b):
        f = self.inner.inf_on if self.factor >= 0 else self.inner.sup_on
        return self.factor * f(a, b)

    def breakpoints(self) -> tuple:
        return self.inner.breakpoints()

    def describe(self) -> dict:
        return {**super().describe(), "factor": self.factor, "inner": self.inner.describe()}


@dataclass(frozen=True)
class Sum(HolderPotential):
    terms: tuple
    family_tag: str = field(default="Sum", init=False)

    def __post_init__(self):
        flat = []
        for t in self.terms:
            flat.extend(t.terms if isinstance(t, Sum) else (t,))
        alphas = {t.alpha for t in flat}
        if len(alphas) != 1:
            raise ValueError(f"terms have different exponents {sorted(alphas)}")
        object.__setattr__(self, "terms", tuple(flat))

    @property
    def alpha(self) -> float:
        return self.terms[0].alpha

    @property
    def seminorm_bound(self) -> float:
        return float(sum(t.seminorm_bound for t in self.terms))

    def eval(self, x):
        return sum(t.eval(x) for t in self.terms)

    def sup_on(self, a, b):
        return sum(t.sup_on(a, b) for t in self.terms)

    def inf_on(self, a, b):
        return sum(t.inf_on(a, b) for t in self.terms)

    def breakpoints(self) -> tuple:
        return tuple(sorted({p for t in self.terms for p in t.breakpoints()}))

    def describe(self) -> dict:
        return {**super().describe(), "terms": [t.describe() for t in self.terms]}


def random_trig(seed: int, degree: int = 8, norm: float = 1.0, alpha: float = 1.0) -> TrigPolynomial:
    """A seeded trig polynomial of the given degree with Hölder norm bound equal to ``norm``."""
    rng = np.random.default_rng(seed)
    k = np.arange(1, degree + 1)
    a = rng.normal(size=degree) / k**2
    b = rng.normal(size=degree) / k**2
    a0 = rng.normal() * 0.1
    raw = TrigPolynomial((a0, *a), tuple(b), alpha)
    scale = norm / raw.holder_norm_bound()
    return TrigPolynomial(tuple(scale * v for v in raw.cos_coeffs), tuple(scale * v for v in raw.sin_coeffs), alpha)


def pair_witness_potential(beta, alpha: float = 1.0) -> PiecewiseAffine:
    """Nonpositive piecewise-affine potential built on the period-two orbit {x, y}.

    Uses the landmarks y_i = h((1)^{i-1} 0 (01)^∞), the period-two points
    x = β/(β²−1), y = 1/(β²−1) and x_1 = (x + 1)/β.  The potential vanishes on
    [0, y_1], [y_2, y_3] and [y_4, 1], equals −1 at y and −2 at x_1, and is
    affine in between.  Valid when pi(1) = 2(10)^∞, where these points are
    ordered as 0 < y_1 < y < y_2 < x < y_3 < x_1 < y_4 < 1.
    """
    b = float(beta)
    y = 1 / (b * b - 1)
    x1 = (b * b + b - 1) / (b**3 - b)

    def yi(i: int) -> float:
        return (b ** (i + 1) + b**i - b * b - b + 1) / (b**i * (b * b - 1))

    knots = (0.0, yi(1), y, yi(2), yi(3), x1, yi(4), 1.0)
    values = (0.0, 0.0, -1.0, 0.0, 0.0, -2.0, 0.0, 0.0)
    return PiecewiseAffine(knots, values, alpha)


def potential_from_spec(spec: str, alpha: float = 1.0, beta=None) -> HolderPotential:
    """Parse potential specs such as ``identity``, ``const:0.5``, ``trig:seed=3,degree=8,norm=1``,
    ``dist:0.2,0.7;coef=-1``, ``pair-witness`` or ``affine:a0,a1``."""
    name, _, rest = spec.partition(":")
    name = name.strip().lower()
    if name in ("identity", "id"):
        return identity(alpha)
    if name in ("const", "constant"):
        return Constant(float(rest or 0.0), alpha)
    if name == "affine":
        a0, a1 = (float(t) for t in rest.split(","))
        return Affine(a0, a1, alpha)
    if name == "trig":
        opts = dict(kv.split("=") for kv in rest.split(",") if kv)
        return random_trig(int(opts.get("seed", 0)), int(opts.get("degree", 8)), float(opts.get("norm", 1.0)), alpha)
    if name == "dist":
        pts, _, extra = rest.partition(";")
        opts = dict(kv.split("=") for kv in extra.split(",") if kv)
        return DistancePower(
            tuple(float(p) for p in pts.split(",")),
            float(opts.get("coef", -1.0)),
            alpha,
            opts.get("metric", "interval"),
        )
    if name == "pair-witness":
        if beta is None:
            raise ValueError("pair-witness needs beta")
        return pair_witness_potential(beta, alpha)
    raise ValueError(f"unknown potential spec {spec!r}")


def seminorm_check(phi: HolderPotential, xs: Sequence[float], ys: Sequence[float]) -> float:
    """Largest observed ratio |φ(x)−φ(y)|/|x−y|^α over the given pairs."""
    x, y = _arr(xs), _arr(ys)
    d = np.abs(x - y)
    ok = d > 0
    return float(np.max(np.abs(phi.eval(x[ok]) - phi.eval(y[ok])) / d[ok] ** phi.alpha, initial=0.0))
