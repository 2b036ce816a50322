"""Shadowing across parameters, joint-perturbation constants and maximizer verification."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .dynamics import NON_SIMPLE, BetaParam, critical_orbit
from .errors import NotShadowable, PreconditionFailed
from .mane import circle_constants
from .numkit import Enclosure, EventuallyPeriodicWord, h_eval
from .orbits import (
    DEFAULT_MAX_PERIOD,
    PeriodicOrbit,
    enumerate_periodic_orbits,
    holder_constant,
    make_orbit,
    orbit_average,
    orbit_average_bounds,
    q_bracket,
)
from .potentials import DistancePower, HolderPotential, Sum, random_trig
from .shift import in_beta_shift

VERIFIED = "Verified"
REFUTED = "Refuted"
INCONCLUSIVE = "Inconclusive"
DEFAULT_SLACK = 1e-3


def beta_near(value: float, max_denominator: int = 10**12) -> BetaParam:
    """A rational parameter at ``value``, used for the perturbed maps."""
    return BetaParam.from_rational(Fraction(value).limit_denominator(max_denominator))


def _rotation_words(orbit: PeriodicOrbit) -> list:
    return [EventuallyPeriodicWord.periodic(r) for r in orbit.rotations()]


def _set_gap(a: list, b: list) -> float:
    """Certified lower bound of min |a_i − b_j| over enclosures."""
    if not a or not b:
        return math.inf
    best = math.inf
    for x in a:
        for y in b:
            gap = max(float(x.lo) - float(y.hi), float(y.lo) - float(x.hi), 0.0)
            best = min(best, gap)
    return best


def _min_gap(points: list) -> float:
    """Certified lower bound of the minimum interpoint distance; +inf for one point."""
    if len(points) < 2:
        return math.inf
    pts = sorted(points, key=lambda p: p.mid())
    return min(max(float(b.lo) - float(a.hi), 0.0) for a, b in zip(pts, pts[1:]))


# ---------------------------------------------------------------------------
# shadowing


@dataclass
class ShadowReport:
    orbit_gamma: PeriodicOrbit
    distances: np.ndarray
    upper_bound: float
    lower_bound: float
    card_preserved: bool
    s: float | None

    @property
    def within_bounds(self) -> bool:
        d = self.distances
        return bool(np.all(d <= self.upper_bound) and np.all(d >= self.lower_bound))

    def as_dict(self) -> dict:
        return {
            "orbit_gamma": self.orbit_gamma.label,
            "points_gamma": [float(v) for v in self.orbit_gamma.values],
            "distances": [float(v) for v in self.distances],
            "upper_bound": self.upper_bound,
            "lower_bound": self.lower_bound,
            "card_preserved": self.card_preserved,
            "within_bounds": self.within_bounds,
        }


def leading_zero_count(orbit: PeriodicOrbit) -> int:
    """Smallest N ≥ 0 with 0^N 1 0^∞ strictly below every rotation word of the orbit."""
    if orbit.word == (0,):
        raise PreconditionFailed("the fixed point 0 has no lower shadowing bound")
    # 0^N 1 0^∞ ≺ w iff w has a nonzero digit within its first N+1 places,
    # except that w = 0^N 1 0^∞ itself is impossible for a periodic word.
    return max(next(i for i, d in enumerate(r) if d) for r in orbit.rotations())


def shadow_lower_constant(beta: BetaParam, orbit: PeriodicOrbit) -> float:
    """s = β^{−N−2} with N from :func:`leading_zero_count`."""
    return float(beta) ** (-leading_zero_count(orbit) - 2)


def shadow_upper(beta: float, gamma: float) -> float:
    return (beta - gamma) * gamma**2 / (beta * (gamma - 1) ** 2)


def shadow_orbit(beta: BetaParam, gamma: BetaParam, orbit_beta: PeriodicOrbit) -> ShadowReport:
    """Carry a periodic orbit from β to γ < β by reading its code at γ."""
    b, g = float(beta), float(gamma)
    if not 1 < g < b:
        raise PreconditionFailed("requires 1 < gamma < beta")
    if orbit_beta.contains_one:
        raise PreconditionFailed("the orbit contains 1")
    words = _rotation_words(orbit_beta)
    for w in words:
        if w.max_digit > gamma.floor or not in_beta_shift(gamma, w):
            raise NotShadowable(f"{w.notation()} is not admissible at gamma = {g}")
    orbit_gamma = make_orbit(gamma, orbit_beta.word, orbit_beta.map_tag)
    pts_g = [h_eval(w, gamma.value) for w in words]
    pts_b = [h_eval(w, beta.value) for w in words]
    dist = np.array([float((pg - pb).abs().mid()) for pg, pb in zip(pts_g, pts_b)])
    if orbit_beta.word == (0,):
        s, lower = None, 0.0
    else:
        s = shadow_lower_constant(beta, orbit_beta)
        lower = s * (b - g)
    card = len({round(p.mid(), 14) for p in pts_g}) == orbit_beta.period
    return ShadowReport(orbit_gamma, dist, shadow_upper(b, g), lower, card, s)


# ---------------------------------------------------------------------------
# constants for beta-transformations


def _admissible_at(gamma: BetaParam, words: list) -> bool:
    return all(w.max_digit <= gamma.floor and in_beta_shift(gamma, w) for w in words)


def admissibility_window(beta: BetaParam, orbit: PeriodicOrbit, steps: int = 48) -> float:
    """Bisect for the least γ keeping every rotation word admissible; returns β minus that γ.

    Admissibility of a fixed word only improves as γ grows, so every γ
    between the returned bound and β keeps the orbit inside the γ-shift.
    """
    words = _rotation_words(orbit)
    b = float(beta)
    lo, hi = 1.0, b  # lo: not known admissible, hi: admissible (β itself)
    if not _admissible_at(beta, words):
        raise PreconditionFailed(f"orbit {orbit.label} is not in the beta-shift")
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if mid <= 1.0 + 1e-12 or hi - lo < 1e-13:
            break
        if _admissible_at(beta_near(mid), words):
            hi = mid
        else:
            lo = mid
    return b - hi


@dataclass(frozen=True)
class PerturbationConstants:
    p: int
    r: float
    C2: float
    L1: float
    L2: float
    C1: float
    M: float
    c: float
    s: float | None
    K_beta: float
    alpha: float
    L3: float | None = None
    L4: float | None = None
    window: float = 0.0
    branch: str = ""
    pieces: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def perturbation_constants_beta(beta: BetaParam, orbit_beta: PeriodicOrbit, alpha: float = 1.0) -> PerturbationConstants:
    """Evaluate the joint-perturbation constants for a U-periodic orbit of a non-simple beta-number.

    Distances enter as certified lower bounds, which only makes r and C₂
    smaller and C₁ larger.
    """
    if beta.kind != NON_SIMPLE:
        raise PreconditionFailed(f"{beta.label} is not a non-simple beta-number")
    if orbit_beta.contains_one:
        raise PreconditionFailed("the orbit contains 1")
    if not 0 < alpha <= 1:
        raise PreconditionFailed("alpha must lie in (0, 1]")
    b = float(beta)
    K = holder_constant(beta, alpha)
    pts = list(orbit_beta.points)
    crit = list(critical_orbit(beta).points)
    disc = list(beta.D)
    p = orbit_beta.period

    d_disc = _set_gap(pts, disc)
    spread = _min_gap(pts)
    hits_critical = any(any(x.overlaps(y) for y in crit) for x in pts)
    terms = {"disc": d_disc / 3, "spread": spread / 4}
    if not hits_critical:
        terms["critical"] = _set_gap(pts, crit) / 2
    r = min(terms.values())

    window = admissibility_window(beta, orbit_beta)
    # keep c below β − 1 so that γ²/(β(γ−1)²) stays bounded on the window
    c = min(window, (b - 1) / 2)
    M = (b - c) ** 2 / (b * (b - c - 1) ** 2)
    crit_spread = _min_gap(crit)
    C2 = min(c, 0.5, crit_spread / 2, crit_spread / (2 * M), r / M, b * r)
    L1 = 1 + 1 / ((b - C2) ** alpha - 1) + 2 * b**alpha * K
    L2 = 3 * K + 1 + M**alpha
    c1_terms = [1.0, L2 * C2 ** (alpha / 2) * b**alpha * r**-alpha, r**-alpha * b**alpha * (p + 1 + L1) * L2]
    L3 = L4 = s = None
    if orbit_beta.word != (0,):
        s = shadow_lower_constant(beta, orbit_beta)
        log_gap = math.log(b - C2)
        L3 = 1 + (math.log(b) + math.log(L2) / alpha - math.log(s)) / log_gap
        L4 = s**alpha / b**alpha * L1 + p * L2 + L3 * L2 + L2 / (math.e * alpha * log_gap)
        c1_terms.append(r**-alpha * b**alpha * (L4 + L2))
    C1 = max(c1_terms)
    return PerturbationConstants(
        p=p,
        r=r,
        C2=C2,
        L1=L1,
        L2=L2,
        C1=C1,
        M=M,
        c=c,
        s=s,
        K_beta=K,
        alpha=alpha,
        L3=L3,
        L4=L4,
        window=window,
        branch="meets critical orbit" if hits_critical else "avoids critical orbit",
        pieces={"r_terms": terms, "C1_terms": c1_terms, "critical_spread": crit_spread},
    )


def perturbation_coefficient(consts: PerturbationConstants, beta: float, gamma: float, seminorm: float) -> float:
    return 2 * consts.C1 * seminorm * (float(beta) - float(gamma)) ** (consts.alpha / 2)


def build_perturbed(
    phi: HolderPotential,
    consts: PerturbationConstants,
    beta: BetaParam,
    gamma: BetaParam,
    orbit_gamma: PeriodicOrbit,
    alpha: float | None = None,
) -> HolderPotential:
    """φ − 2C₁|φ|_α(β−γ)^{α/2}·d(·, O_γ)^α."""
    alpha = consts.alpha if alpha is None else alpha
    coef = perturbation_coefficient(consts, beta, gamma, phi.seminorm_bound)
    if coef == 0:
        return phi
    penalty = DistancePower(tuple(float(v) for v in orbit_gamma.values), -coef, alpha)
    return Sum((phi, penalty))


# ---------------------------------------------------------------------------
# maximizer verification


@dataclass
class MaximizerVerdict:
    target_average: Enclosure
    best_rival_average: Enclosure | None
    q_upper: Enclosure
    verdict: str
    slack: float
    best_rival: PeriodicOrbit | None = None
    rivals: int = 0
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        def pair(e):
            return None if e is None else [float(e.lo), float(e.hi)]

        return {
            "verdict": self.verdict,
            "target_average": pair(self.target_average),
            "best_rival_average": pair(self.best_rival_average),
            "best_rival": None if self.best_rival is None else self.best_rival.label,
            "q_upper": pair(self.q_upper),
            "slack": self.slack,
            "rivals": self.rivals,
            **self.diagnostics,
        }


def _rival_bounds(gamma: BetaParam, phi: HolderPotential, target: PeriodicOrbit, max_period: int, map_tag: str, budget: int):
    rivals = [o for o in enumerate_periodic_orbits(gamma, max_period, map_tag, budget) if o.word != target.word]
    lo, hi = orbit_average_bounds(phi, rivals)
    return rivals, lo, hi


def verify_maximizer(
    gamma: BetaParam,
    phi: HolderPotential,
    target: PeriodicOrbit,
    max_period: int = DEFAULT_MAX_PERIOD,
    depth: int = 16,
    map_tag: str = "U",
    budget: int = 4_000_000,
    slack: float = DEFAULT_SLACK,
    graph_depth: int = 12,
) -> MaximizerVerdict:
    """Compare the target's average with every rival of period ≤ max_period and with the certified upper bound."""
    if target.beta != gamma:
        target = target.with_points(gamma, map_tag)
    avg = orbit_average(phi, target)
    rivals, lo, hi = _rival_bounds(gamma, phi, target, max_period, map_tag, budget)
    bracket = q_bracket(gamma, phi, depth, max_period, budget, graph_depth)
    q_upper = bracket.upper
    best = None
    best_enc = None
    if rivals:
        k = int(np.argmax(hi))
        best, best_enc = rivals[k], Enclosure(float(lo[k]), float(hi[k]))
        refuted = bool(np.any(lo > float(avg.hi)))
        dominates = bool(np.all(hi < float(avg.lo)))
    else:
        refuted, dominates = False, True
    gap = float(q_upper.hi) - float(avg.lo)
    if refuted or float(q_upper.hi) < float(avg.lo):
        verdict = REFUTED if refuted else INCONCLUSIVE
    elif dominates and gap <= slack:
        verdict = VERIFIED
    else:
        verdict = INCONCLUSIVE
    if refuted:
        k = int(np.argmax(lo))
        best, best_enc = rivals[k], Enclosure(float(lo[k]), float(hi[k]))
    diagnostics = {
        "q_gap": gap,
        "depth_used": bracket.n_used,
        "margin": None if best_enc is None else float(avg.lo) - float(best_enc.hi),
    }
    return MaximizerVerdict(avg, best_enc, q_upper, verdict, slack, best, len(rivals), diagnostics)


# ---------------------------------------------------------------------------
# locking


def locking_potential(phi: HolderPotential, orbit: PeriodicOrbit, t: float, alpha: float | None = None) -> HolderPotential:
    """φ_t = φ − t·d(·, O)^α."""
    if t < 0:
        raise PreconditionFailed("t must be nonnegative")
    if t == 0:
        warnings.warn("t = 0 leaves the potential unchanged", stacklevel=2)
        return phi
    alpha = phi.alpha if alpha is None else alpha
    return Sum((phi, DistancePower(tuple(float(v) for v in orbit.values), -float(t), alpha)))


def adversarial_perturbation(rival: PeriodicOrbit, norm: float, alpha: float) -> HolderPotential:
    """−c·d(·, rival)^α scaled to Hölder norm ``norm``; it favours the rival over every other orbit."""
    probe = DistancePower(tuple(float(v) for v in rival.values), -1.0, alpha)
    total = probe.holder_norm_bound()
    return DistancePower(probe.points, -norm / total, alpha)


@dataclass
class LockingReport:
    passes: int
    failures: int
    trials: int
    delta_norm: float
    verdicts: list
    empirical_C: float
    predicted_margin: float

    @property
    def all_pass(self) -> bool:
        return self.failures == 0

    def as_dict(self) -> dict:
        return dict(self.__dict__, all_pass=self.all_pass)


def locking_check(
    beta: BetaParam,
    phi_t: HolderPotential,
    orbit: PeriodicOrbit,
    delta_norm: float,
    trials: int = 50,
    seed: int = 0,
    t: float = 1.0,
    max_period: int = 10,
    depth: int = 12,
    map_tag: str = "U",
    budget: int = 4_000_000,
    adversarial_every: int = 5,
    require_verified: bool = True,
) -> LockingReport:
    """Perturb φ_t by random ψ with ‖ψ‖_α ≤ delta_norm and check the maximizing orbit stays put.

    Every ``adversarial_every``-th trial uses a distance-power bump centred
    on a rival orbit instead of a trigonometric polynomial.  A trial passes
    when verify_maximizer still returns Verified for the fixed orbit.
    """
    if require_verified:
        base = verify_maximizer(beta, phi_t, orbit, max_period, depth, map_tag, budget)
        if base.verdict != VERIFIED:
            raise PreconditionFailed(f"phi_t is not verified at {orbit.label}: {base.verdict}")
    rivals = [o for o in enumerate_periodic_orbits(beta, max_period, map_tag, budget) if o.word != orbit.word]
    orbit = orbit if orbit.beta == beta else orbit.with_points(beta, map_tag)
    rng = np.random.default_rng(seed)
    d_orbit_rivals = _rival_distance_integrals(orbit, rivals, phi_t.alpha)
    verdicts = []
    worst_C = 0.0
    passes = 0
    for i in range(trials):
        trial_seed = int(rng.integers(2**31))
        if delta_norm == 0:
            verdicts.append(VERIFIED)
            passes += 1
            continue
        if adversarial_every and i % adversarial_every == adversarial_every - 1 and rivals:
            rival = rivals[trial_seed % len(rivals)]
            psi = adversarial_perturbation(rival, delta_norm, phi_t.alpha)
        else:
            psi = random_trig(trial_seed, degree=8, norm=delta_norm, alpha=phi_t.alpha)
        combined = Sum((phi_t, psi))
        verdict = verify_maximizer(beta, combined, orbit, max_period, depth, map_tag, budget).verdict
        verdicts.append(verdict)
        if verdict == VERIFIED:
            passes += 1
        # empirical constant in ∫ψ dν − ∫ψ dμ ≤ C|ψ|_α ∫d^α dν
        psi_lo, psi_hi = orbit_average_bounds(psi, rivals)
        gain = psi_hi - float(orbit_average(psi, orbit).lo)
        ratio = gain / (psi.seminorm_bound * d_orbit_rivals)
        if len(ratio):
            worst_C = max(worst_C, float(np.max(ratio)))
    margin = t / worst_C if worst_C > 0 else math.inf
    return LockingReport(passes, trials - passes, trials, delta_norm, verdicts, worst_C, margin)


def _rival_distance_integrals(orbit: PeriodicOrbit, rivals: list, alpha: float) -> np.ndarray:
    probe = DistancePower(tuple(float(v) for v in orbit.values), 1.0, alpha)
    lo, _ = orbit_average_bounds(probe, rivals)
    return np.maximum(lo, 1e-300)


# ---------------------------------------------------------------------------
# circle maps


@dataclass(frozen=True)
class ExpandingConstants:
    k: int
    alpha: float
    p: int
    Delta: float
    r: float
    D: float
    L: float
    L1: float
    L2: float
    C: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def circle_spread(points) -> float:
    """Minimum interpoint distance in the circle metric; +inf for one point."""
    vals = np.sort(np.mod(np.asarray([float(p) for p in points]), 1.0))
    if len(vals) < 2:
        return math.inf
    gaps = np.diff(vals)
    return float(min(gaps.min(), 1.0 - vals[-1] + vals[0]))


def circle_orbit_points(k: int, x0: Fraction) -> list:
    """The exact orbit of a rational point under x ↦ kx mod 1, checked to be periodic."""
    x0 = Fraction(x0) % 1
    pts = [x0]
    x = (k * x0) % 1
    while x != x0:
        if x in pts or len(pts) > 4096:
            raise PreconditionFailed(f"{x0} is not periodic under x -> {k}x mod 1")
        pts.append(x)
        x = (k * x) % 1
    return pts


def perturbation_constants_expanding(k: int, orbit, alpha: float = 1.0, L: float | None = None) -> ExpandingConstants:
    """Constant pack for x ↦ kx mod 1 with λ = LIP = k and δ = 1/4."""
    pts = [Fraction(x) for x in orbit]
    if not pts:
        raise PreconditionFailed("empty orbit")
    cycle = circle_orbit_points(k, pts[0])
    if set(cycle) != {p % 1 for p in pts}:
        raise PreconditionFailed("points do not form a single periodic orbit")
    consts = circle_constants(k, alpha)
    if L is None:
        L = consts.L
    lam = lip = float(k)
    delta = consts.delta
    p = len(cycle)
    spread = circle_spread(cycle)
    spread_term = (lam - 1) * spread / (4 + spread) if math.isfinite(spread) else math.inf
    D = min(delta, lip, (lam - 1) * delta / (1 + delta), (lam - 1) / 2, spread_term)
    r = min(spread / 4, consts.gamma_exp)
    L1 = 1 + 1 / ((lam - D) ** alpha - 1) + 2 * L * (2 * lip) ** alpha
    L2 = L + 1 + (lam - D - 1) ** (-alpha)
    C = max(1.0, L2 * (1 + p + L1) * (2 * lip / r) ** alpha)
    return ExpandingConstants(k, alpha, p, spread, r, D, L, L1, L2, C)
