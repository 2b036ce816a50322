"""Command-line harness: every operation writes one deterministic JSON report."""

from __future__ import annotations

import csv
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import click
import numpy as np

from . import __version__
from .betanum import classify, nonsimple_between, parry_solve
from .dynamics import BetaParam, expand
from .errors import BetaOptError, PreconditionFailed
from .mane import (
    calibrated_subaction,
    expanding_subaction,
    regularize,
    revealed_versions,
)
from .numkit import PRECISION_ENV, EventuallyPeriodicWord, default_bits
from .orbits import enumerate_periodic_orbits, make_orbit, q_bracket
from .perturb import (
    INCONCLUSIVE,
    beta_near,
    build_perturbed,
    locking_check,
    locking_potential,
    perturbation_constants_beta,
    perturbation_constants_expanding,
    shadow_orbit,
    verify_maximizer,
)
from .potentials import DistancePower, potential_from_spec

SCHEMA = "betaopt-report/1"
EXIT_OK, EXIT_INCONCLUSIVE = 0, 2


def parse_beta(spec: str) -> BetaParam:
    """``cubic:a,b,c,d`` (largest real root), ``poly:…``, ``word:2(10)``, ``golden`` or a decimal/fraction."""
    spec = spec.strip()
    name, sep, rest = spec.partition(":")
    if sep:
        if name in ("cubic", "poly"):
            coeffs = tuple(int(c) for c in rest.split(","))
            if name == "cubic" and len(coeffs) != 4:
                raise click.BadParameter("cubic needs four coefficients")
            return BetaParam.from_polynomial(coeffs)
        if name == "word":
            return parry_solve(EventuallyPeriodicWord.parse(rest))
        raise click.BadParameter(f"unknown beta kind {name!r}")
    if spec == "golden":
        return BetaParam.golden()
    try:
        return BetaParam.from_rational(Fraction(spec))
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from exc


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (str, int, bool)) or x is None:
        return x
    return str(x)


class Report:
    def __init__(self, ctx: click.Context, command: str, config: dict):
        self.ctx = ctx
        self.command = command
        self.config = dict(config, precision_bits=default_bits(), threads=ctx.obj["threads"], schema=SCHEMA)
        self.results: dict = {}
        self.diagnostics: dict = {}
        self.status = EXIT_OK

    def emit(self) -> None:
        doc = {
            "command": self.command,
            "config": self.config,
            "results": self.results,
            "diagnostics": self.diagnostics,
            "version": __version__,
        }
        text = json.dumps(_jsonable(doc), indent=2, sort_keys=True)
        out = self.ctx.obj["output"]
        if out:
            Path(out).write_text(text + "\n")
        else:
            click.echo(text)
        if self.status:
            self.ctx.exit(self.status)


def write_grid_csv(path: str, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node", "left_value", "right_value"])
        for row in rows:
            w.writerow([repr(float(v)) for v in row])


def _fail(exc: BetaOptError, command: str) -> None:
    doc = {"command": command, "error": {"code": exc.code, "message": str(exc)}, "version": __version__}
    click.echo(json.dumps(doc, indent=2, sort_keys=True), err=True)
    sys.exit(exc.exit_status)


class _Group(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except BetaOptError as exc:
            _fail(exc, ctx.invoked_subcommand or "")


@click.group(cls=_Group)
@click.version_option(__version__)
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="Write the JSON report here.")
@click.option("--threads", type=int, default=1, show_default=True, help="Parallelism cap.")
@click.option("--precision-bits", type=int, default=None, help=f"Override {PRECISION_ENV}.")
@click.pass_context
def main(ctx, output, threads, precision_bits):
    """Ergodic optimization for beta-transformations."""
    if precision_bits is not None:
        os.environ[PRECISION_ENV] = str(precision_bits)
    ctx.obj = {"output": output, "threads": max(1, threads)}


beta_opt = click.option("--beta", "beta_spec", required=True, help="cubic:a,b,c,d | word:2(10) | golden | decimal")
phi_opt = click.option("--phi", "phi_spec", default="identity", show_default=True, help="Potential spec.")
alpha_opt = click.option("--alpha", type=float, default=1.0, show_default=True)
budget_opt = click.option("--budget", type=int, default=4_000_000, show_default=True, help="Word-count budget.")


@main.command("expand")
@beta_opt
@click.option("--x", "x_spec", default="1", show_default=True, help="Point in [0, 1] (decimal or fraction).")
@click.option("--n", type=int, default=32, show_default=True)
@click.pass_context
def expand_cmd(ctx, beta_spec, x_spec, n):
    """Greedy digits of a point."""
    beta = parse_beta(beta_spec)
    r = Report(ctx, "expand", {"beta": beta_spec, "x": x_spec, "n": n})
    digits = expand(beta, Fraction(x_spec), n)
    r.results = {"beta": float(beta), "digits": "".join(map(str, digits))}
    r.emit()


@main.command("classify")
@beta_opt
@click.option("--horizon", type=int, default=64, show_default=True)
@click.pass_context
def classify_cmd(ctx, beta_spec, horizon):
    """Simple, non-simple or non-preperiodic up to the horizon."""
    beta = parse_beta(beta_spec)
    c = classify(beta, horizon)
    r = Report(ctx, "classify", {"beta": beta_spec, "horizon": horizon})
    r.results = {
        "beta": float(beta),
        "kind": c.kind,
        "expansion": c.expansion.notation() if c.expansion else None,
        "prefix": "".join(map(str, c.prefix)),
    }
    r.emit()


@main.command("parry-solve")
@click.option("--word", required=True, help="Eventually periodic word such as 2(10).")
@click.pass_context
def parry_solve_cmd(ctx, word):
    """The beta whose expansion of 1 is the given word."""
    beta = parry_solve(EventuallyPeriodicWord.parse(word))
    r = Report(ctx, "parry-solve", {"word": word})
    e = beta.enclosure()
    r.results = {"beta": float(beta), "enclosure": [float(e.lo), float(e.hi)], "kind": beta.kind}
    r.emit()


@main.command("nonsimple-between")
@click.option("--beta1", required=True)
@click.option("--beta2", required=True)
@click.option("--prefix", type=int, default=64, show_default=True)
@click.pass_context
def nonsimple_between_cmd(ctx, beta1, beta2, prefix):
    """A non-simple beta-number strictly between two parameters."""
    gamma = nonsimple_between(parse_beta(beta1), parse_beta(beta2), prefix)
    r = Report(ctx, "nonsimple-between", {"beta1": beta1, "beta2": beta2, "prefix": prefix})
    r.results = {"beta": float(gamma), "expansion": gamma.expansion.notation(), "kind": gamma.kind}
    r.emit()


@main.command("orbits")
@beta_opt
@click.option("--max-period", type=int, default=8, show_default=True)
@click.option("--map", "map_tag", type=click.Choice(["T", "U"]), default="T", show_default=True)
@budget_opt
@click.pass_context
def orbits_cmd(ctx, beta_spec, max_period, map_tag, budget):
    """Enumerate periodic orbits."""
    beta = parse_beta(beta_spec)
    orbits = enumerate_periodic_orbits(beta, max_period, map_tag, budget)
    r = Report(ctx, "orbits", {"beta": beta_spec, "max_period": max_period, "map": map_tag, "budget": budget})
    counts: dict = {}
    for o in orbits:
        counts[o.period] = counts.get(o.period, 0) + 1
    r.results = {"count": len(orbits), "by_period": counts, "orbits": [o.label for o in orbits[:200]]}
    r.diagnostics = {"listed": min(200, len(orbits))}
    r.emit()


def _bracket_dict(b) -> dict:
    return {
        "lower": [float(b.lower.lo), float(b.lower.hi)],
        "upper": [float(b.upper.lo), float(b.upper.hi)],
        "width": b.width,
        "witness": b.witness.label if b.witness else None,
        "lower_T": None if b.lower_T is None else float(b.lower_T.mid()),
        "witness_T": b.witness_T.label if b.witness_T else None,
        "depth_used": b.n_used,
        "period_used": b.P_used,
    }


@main.command("q-bracket")
@beta_opt
@phi_opt
@alpha_opt
@click.option("--depth", type=int, default=16, show_default=True)
@click.option("--max-period", type=int, default=12, show_default=True)
@budget_opt
@click.pass_context
def q_bracket_cmd(ctx, beta_spec, phi_spec, alpha, depth, max_period, budget):
    """Two-sided bracket on the ergodic supremum."""
    beta = parse_beta(beta_spec)
    phi = potential_from_spec(phi_spec, alpha, beta)
    b = q_bracket(beta, phi, depth, max_period, budget)
    r = Report(ctx, "q-bracket", {"beta": beta_spec, "phi": phi_spec, "alpha": alpha, "depth": depth,
                                  "max_period": max_period, "budget": budget})
    r.results = _bracket_dict(b)
    r.diagnostics = {k: v for k, v in b.diagnostics.items() if k not in ("subadditive_by_depth", "graph_by_depth")}
    r.emit()


def _subaction(ctx, command, beta_spec, phi_spec, alpha, grid, depth, max_period, budget, csv_path):
    beta = parse_beta(beta_spec)
    phi = potential_from_spec(phi_spec, alpha, beta)
    bracket = q_bracket(beta, phi, depth, max_period, budget)
    u, report = calibrated_subaction(beta, phi, grid_size=grid, bracket=bracket)
    r = Report(ctx, command, {"beta": beta_spec, "phi": phi_spec, "alpha": alpha, "grid": grid, "depth": depth,
                              "max_period": max_period, "budget": budget})
    return beta, phi, bracket, u, report, r


grid_opts = [
    click.option("--grid", type=int, default=4096, show_default=True),
    click.option("--depth", type=int, default=16, show_default=True),
    click.option("--max-period", type=int, default=12, show_default=True),
    click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None),
]


def _with(opts):
    def deco(f):
        for o in reversed(opts):
            f = o(f)
        return f

    return deco


@main.command("subaction")
@beta_opt
@phi_opt
@alpha_opt
@_with(grid_opts)
@budget_opt
@click.pass_context
def subaction_cmd(ctx, beta_spec, phi_spec, alpha, grid, depth, max_period, csv_path, budget):
    """Calibrated sub-action on the breakpoint grid."""
    _, _, bracket, u, report, r = _subaction(ctx, "subaction", beta_spec, phi_spec, alpha, grid, depth, max_period,
                                              budget, csv_path)
    r.results = {
        "residual": report.residual,
        "iterations": report.iterations,
        "converged": report.converged,
        "sup_abs_u": report.subaction_sup,
        "bound": report.subaction_bound,
        "bracket": _bracket_dict(bracket),
    }
    if csv_path:
        write_grid_csv(csv_path, u.to_rows())
    r.emit()


@main.command("revealed")
@beta_opt
@phi_opt
@alpha_opt
@_with(grid_opts)
@budget_opt
@click.option("--side", type=click.Choice(["minus", "plus"]), default="minus", show_default=True)
@click.pass_context
def revealed_cmd(ctx, beta_spec, phi_spec, alpha, grid, depth, max_period, csv_path, budget, side):
    """Revealed versions and the Mañé checks."""
    beta, phi, bracket, u, report, r = _subaction(ctx, "revealed", beta_spec, phi_spec, alpha, grid, depth,
                                                  max_period, budget, csv_path)
    u_minus, u_plus = regularize(u, beta, phi.shifted(bracket.midpoint))
    t_minus, t_plus, rep = revealed_versions(phi, bracket.midpoint, u_minus, u_plus, beta, bracket=bracket)
    rep.residual, rep.iterations, rep.converged = report.residual, report.iterations, report.converged
    r.results = rep.as_dict()
    r.config["side"] = side
    if csv_path:
        write_grid_csv(csv_path, (t_minus if side == "minus" else t_plus).to_rows())
    r.emit()


def _orbit(beta, word: str, map_tag: str = "U"):
    return make_orbit(beta, tuple(int(c) for c in word), map_tag)


@main.command("shadow")
@beta_opt
@click.option("--orbit-word", required=True)
@click.option("--gamma-offset", type=float, default=1e-3, show_default=True)
@click.pass_context
def shadow_cmd(ctx, beta_spec, orbit_word, gamma_offset):
    """Carry an orbit to gamma = beta − offset."""
    beta = parse_beta(beta_spec)
    gamma = beta_near(float(beta) - gamma_offset)
    rep = shadow_orbit(beta, gamma, _orbit(beta, orbit_word))
    r = Report(ctx, "shadow", {"beta": beta_spec, "orbit_word": orbit_word, "gamma_offset": gamma_offset})
    r.results = dict(rep.as_dict(), gamma=float(gamma))
    r.emit()


@main.command("perturb-constants")
@beta_opt
@click.option("--orbit-word", required=True)
@alpha_opt
@click.pass_context
def perturb_constants_cmd(ctx, beta_spec, orbit_word, alpha):
    """Joint-perturbation constants for a periodic orbit."""
    beta = parse_beta(beta_spec)
    consts = perturbation_constants_beta(beta, _orbit(beta, orbit_word), alpha)
    r = Report(ctx, "perturb-constants", {"beta": beta_spec, "orbit_word": orbit_word, "alpha": alpha})
    d = consts.as_dict()
    r.diagnostics = d.pop("pieces")
    r.results = d
    r.emit()


@main.command("perturb-run")
@beta_opt
@click.option("--orbit-word", required=True)
@click.option("--gamma-offset", type=float, default=None, help="Defaults to min(1e-3, C2/2).")
@alpha_opt
@click.option("--max-period", type=int, default=12, show_default=True)
@click.option("--depth", type=int, default=16, show_default=True)
@budget_opt
@click.pass_context
def perturb_run_cmd(ctx, beta_spec, orbit_word, gamma_offset, alpha, max_period, depth, budget):
    """Shadow, perturb −d(·, O)^α and verify the shadowed orbit maximizes."""
    beta = parse_beta(beta_spec)
    orbit = _orbit(beta, orbit_word)
    consts = perturbation_constants_beta(beta, orbit, alpha)
    offset = gamma_offset if gamma_offset is not None else min(1e-3, consts.C2 / 2)
    if not 0 < offset < consts.C2:
        raise PreconditionFailed(f"gamma offset {offset} is outside (0, C2 = {consts.C2})")
    gamma = beta_near(float(beta) - offset)
    shadow = shadow_orbit(beta, gamma, orbit)
    phi = DistancePower(tuple(float(v) for v in orbit.values), -1.0, alpha)
    perturbed = build_perturbed(phi, consts, beta, gamma, shadow.orbit_gamma)
    verdict = verify_maximizer(gamma, perturbed, shadow.orbit_gamma, max_period, depth, "U", budget)
    r = Report(ctx, "perturb-run", {"beta": beta_spec, "orbit_word": orbit_word, "gamma_offset": offset,
                                    "alpha": alpha, "max_period": max_period, "depth": depth, "budget": budget})
    r.results = {"gamma": float(gamma), "C1": consts.C1, "C2": consts.C2, **verdict.as_dict()}
    r.diagnostics = {"shadow": shadow.as_dict()}
    if verdict.verdict == INCONCLUSIVE:
        r.status = EXIT_INCONCLUSIVE
    r.emit()


@main.command("lock-check")
@beta_opt
@click.option("--orbit-word", required=True)
@click.option("--t", "t", type=float, default=1.0, show_default=True)
@click.option("--delta-norm", type=float, default=0.05, show_default=True)
@click.option("--trials", type=int, default=50, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@alpha_opt
@click.option("--max-period", type=int, default=10, show_default=True)
@click.option("--depth", type=int, default=12, show_default=True)
@budget_opt
@click.pass_context
def lock_check_cmd(ctx, beta_spec, orbit_word, t, delta_norm, trials, seed, alpha, max_period, depth, budget):
    """Locking stability of −t·d(·, O)^α under random perturbations."""
    from .potentials import Constant

    beta = parse_beta(beta_spec)
    orbit = _orbit(beta, orbit_word)
    phi_t = locking_potential(Constant(0.0, alpha), orbit, t)
    rep = locking_check(beta, phi_t, orbit, delta_norm, trials, seed, t=t, max_period=max_period, depth=depth,
                        budget=budget)
    r = Report(ctx, "lock-check", {"beta": beta_spec, "orbit_word": orbit_word, "t": t, "delta_norm": delta_norm,
                                   "trials": trials, "seed": seed, "alpha": alpha, "max_period": max_period,
                                   "depth": depth, "budget": budget})
    r.results = rep.as_dict()
    r.emit()


@main.command("expanding-subaction")
@click.option("--k", type=int, default=2, show_default=True)
@phi_opt
@alpha_opt
@click.option("--depth", type=int, default=24, show_default=True)
@click.option("--grid", type=int, default=4096, show_default=True)
@click.option("--orbit", "orbit_spec", default=None, help="Comma-separated rational orbit points for the constant pack.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def expanding_subaction_cmd(ctx, k, phi_spec, alpha, depth, grid, orbit_spec, csv_path):
    """Sub-action for x ↦ kx mod 1 and, optionally, the joint-perturbation constants."""
    phi = potential_from_spec(phi_spec, alpha)
    u, rep = expanding_subaction(k, phi, depth, grid)
    r = Report(ctx, "expanding-subaction", {"k": k, "phi": phi_spec, "alpha": alpha, "depth": depth, "grid": grid,
                                           "orbit": orbit_spec})
    r.results = rep.as_dict()
    if orbit_spec:
        pts = [Fraction(p) for p in orbit_spec.split(",")]
        r.results["constants"] = perturbation_constants_expanding(k, pts, alpha, rep.L).as_dict()
    if csv_path:
        write_grid_csv(csv_path, [(x, v, v) for x, v in zip(u.nodes, u.values)])
    r.emit()


if __name__ == "__main__":  # pragma: no cover
    main()
