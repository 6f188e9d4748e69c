"""Manifest-driven experiment runners.

Each runner interprets a parsed Manifest, executes one experiment kind
over the declared sweep grid, and writes CSV artifacts: header always
present, UTF-8, LF endings, one row per sweep point, rows sorted by the
sweep key.  Sweep points run sequentially; replication-level threading
happens inside the payoff evaluators, whose preallocated per-rep arrays
make results independent of the thread count.
"""

from __future__ import annotations

import itertools
import math
import os
from typing import Callable, Optional, Sequence

import numpy as np

from .analytics import giant_share, optimal_patent_share, patent_profit_curve, budget_phase
from .bitset import popcount
from .config import CostSpec, FirmProfile, PayoffSpec, WorldConfig, uniform_profiles
from .equilibrium import (EquilibriumResult, SolverConfig, best_response_q,
                          intervention_scan, variant_equilibrium)
from .errors import ConfigError, ManifestError, NonConvergence
from .knowledge import knowledge_closure
from .manifest import Manifest
from .montecarlo import expected_payoffs, rep_rng
from .network import arc_probability, load_replay, sample_learning_network
from .payoffs import payoff_profile

# sweep axes, in the order that defines the row sort key
SWEEP_AXES = ("n", "k", "delta", "c", "b", "lambda_b", "f", "rho", "factors")
_INT_AXES = {"n", "k"}

BETA_KEY = 23


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isfinite(v) and v == int(v) and abs(v) < 1e15:
            return str(int(v))
        return f"{v:.10g}"
    return str(v)


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def sweep_points(m: Manifest) -> tuple[list[str], list[dict]]:
    """Expand sweep.* axes into a sorted cartesian grid.

    Returns the active axis names (in canonical order) and one dict per
    point.  No sweep axes means a single empty point.
    """
    for key in m.section("sweep"):
        if key not in SWEEP_AXES:
            raise ManifestError(f"sweep.{key}: unknown sweep axis")
    axes = [a for a in SWEEP_AXES if f"sweep.{a}" in m.entries]
    values: list[list] = []
    for a in axes:
        vals = m.get_ints(f"sweep.{a}") if a in _INT_AXES else m.get_floats(f"sweep.{a}")
        if not vals:
            raise ManifestError(f"sweep.{a}: empty axis")
        values.append(sorted(set(vals)))
    points = [dict(zip(axes, combo)) for combo in itertools.product(*values)]
    return axes, points


def build_world(m: Manifest, point: Optional[dict] = None) -> WorldConfig:
    point = point or {}
    n = point.get("n", m.get_int("world.n"))
    k = point.get("k", m.get_int("world.k"))
    if n is None:
        raise ManifestError("world.n: required (directly or as sweep.n)")
    if k is None:
        raise ManifestError("world.k: required (directly or as sweep.k)")
    delta = point.get("delta", m.get_float("world.delta"))
    if delta is None:
        raise ManifestError("world.delta: required (directly or as sweep.delta)")
    cost = CostSpec(family=m.get("cost.family", "barrier"),
                    c0=m.get_float("cost.c0", 1.0))
    variant = m.get("payoff.variant", "baseline")
    kw: dict = {}
    if "f" in point:
        variant = "competition"
        kw["f_table"] = (float(point["f"]),)
    elif m.get("payoff.f"):
        kw["f_table"] = tuple(m.get_floats("payoff.f"))
    if "rho" in point:
        variant = "rho"
        kw["rho"] = float(point["rho"])
    elif "payoff.rho" in m.entries:
        kw["rho"] = m.require_float("payoff.rho")
    if m.get("payoff.phi"):
        kw["phi_table"] = tuple(m.get_floats("payoff.phi"))
    share = point.get("b", m.get_float("payoff.patent_share"))
    if variant == "patents" and share is not None:
        kw["patent_share"] = float(share)
    try:
        payoff = PayoffSpec(variant=variant, **kw)
        return WorldConfig(n=int(n), k=int(k), delta=float(delta), cost=cost,
                           payoff=payoff,
                           link_cost=m.get_float("world.link_cost", 0.0))
    except ConfigError as exc:
        raise ManifestError(f"world: {exc}") from None


def build_solver(m: Manifest, overrides: Optional[dict] = None) -> SolverConfig:
    overrides = overrides or {}
    seed = overrides.get("seed", m.get_int("seed"))
    if seed is None:
        raise ManifestError("seed: required key is missing")
    reps = overrides.get("reps", m.get_int("solver.reps", m.get_int("reps", 500)))
    kw = dict(
        seed=int(seed), reps=int(reps),
        threads=int(overrides.get("threads", m.get_int("threads", 1))),
        grid_points=m.get_int("solver.grid_points", 13),
        grid_lo=m.get_float("solver.grid_lo", 0.2),
        grid_hi=m.get_float("solver.grid_hi", 5.0),
        damping=m.get_float("solver.damping", 0.5),
        max_iters=m.get_int("solver.max_iters", 25),
        q_tol=m.get_float("solver.q_tol", 0.03),
        p_tol=m.get_float("solver.p_tol", 0.03),
        init_p=m.get_float("solver.init_p", 0.9),
        init_q=m.get_float("solver.init_q"),
        cert_tol=m.get_float("solver.cert_tol", 0.15),
        polish_factor=m.get_int("solver.polish_factor", 4),
        polish_iters=m.get_int("solver.polish_iters", 6),
        refine=m.get_bool("solver.refine", True),
    )
    try:
        return SolverConfig(**kw)
    except ConfigError as exc:
        raise ManifestError(f"solver: {exc}") from None


def _profile(m: Manifest) -> FirmProfile:
    p = m.get_float("profile.p")
    q = m.get_float("profile.q")
    if p is None or q is None:
        raise ManifestError("profile.p and profile.q: required for this experiment")
    try:
        return FirmProfile(p=p, q=q, sigma=m.get_int("profile.sigma", 1),
                           beta=m.get_float("profile.beta", 1.0))
    except ConfigError as exc:
        raise ManifestError(f"profile: {exc}") from None


def _out_path(m: Manifest, out_dir: str, suffix: str = ".csv") -> str:
    name = m.get("id") or m.require("experiment")
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, name + suffix)


# ---------------------------------------------------------------------------
# Runners
# ---------------------------------------------------------------------------


def run_simulate(m: Manifest, out_dir: str, overrides: dict) -> list[str]:
    solver = build_solver(m, overrides)
    axes, points = sweep_points(m)
    rows = []
    for pt in points:
        world = build_world(m, pt)
        prof = _profile(m)
        profiles = [prof] * world.n
        summary = expected_payoffs(world, profiles, solver.reps, solver.seed,
                                   threads=solver.threads)
        lam = world.delta * arc_probability(prof, prof) * (world.n - 1)
        rows.append([pt[a] for a in axes]
                    + [prof.p, prof.q, lam, summary.reps, summary.mean_net,
                       summary.mean_net_se, float(np.mean(summary.pt_mean)),
                       float(np.mean(summary.gross_mean))])
    path = _out_path(m, out_dir)
    _write_csv(path, list(axes) + ["p", "q", "lambda", "reps", "net_mean",
                                   "net_se", "pt_mean", "gross_mean"], rows)
    return [path]


def run_best_response(m: Manifest, out_dir: str, overrides: dict) -> list[str]:
    solver = build_solver(m, overrides)
    axes, points = sweep_points(m)
    rows = []
    for pt in points:
        world = build_world(m, pt)
        prof = _profile(m)
        opponents = [prof] * (world.n - 1)
        br = best_response_q(world, opponents, solver)
        rows.append([pt[a] for a in axes]
                    + [prof.p, prof.q, br.q_star, br.point.payoff,
                       br.point.payoff_se, br.indifferent])
    path = _out_path(m, out_dir)
    _write_csv(path, list(axes) + ["p", "q_opp", "q_br", "payoff", "payoff_se",
                                   "indifferent"], rows)
    return [path]


EQ_COLUMNS = ["variant", "p_star", "q_star", "lambda_hat", "class",
              "payoff_mean", "payoff_se", "tau_mean", "converged",
              "certificate", "iterations"]


def _eq_cells(eq) -> list:
    return [eq.variant, eq.p_star, eq.q_star, eq.lambda_hat,
            eq.classification, eq.payoff_mean, eq.payoff_se, eq.tau_mean,
            eq.converged, eq.certificate, eq.iterations]


def _solve_point(m: Manifest, world: WorldConfig, solver: SolverConfig,
                 point: dict):
    kw: dict = {}
    if "lambda_b" in point:
        kw["budget_rate"] = float(point["lambda_b"])
    elif "budget.rate" in m.entries:
        kw["budget_rate"] = m.require_float("budget.rate")
    if world.payoff.variant == "public":
        share = m.get_float("public.share")
        count = m.get_int("public.count")
        if count is None:
            if share is None:
                raise ManifestError("public.share or public.count: required "
                                    "for the public variant")
            count = int(round(share * world.n))
        kw["n_public"] = count
        kw["directed"] = m.get_bool("public.directed", False)
    if world.payoff.variant == "patents":
        kw["n_patented"] = int(round(world.payoff.patent_share * world.n))
    if "beta.low" in m.entries or "beta.high" in m.entries:
        lo = m.get_float("beta.low", 0.5)
        hi = m.get_float("beta.high", 1.0)
        bseed = m.get_int("beta.seed", solver.seed)
        rng = rep_rng(bseed, 0, (BETA_KEY,))
        kw["betas"] = rng.uniform(lo, hi, size=world.n)
        kw["beta_groups"] = m.get_int("beta.groups", 4)
    return variant_equilibrium(world, solver, **kw)


def run_equilibrium(m: Manifest, out_dir: str, overrides: dict) -> list[str]:
    solver = build_solver(m, overrides)
    axes, points = sweep_points(m)
    rows = []
    failures = []
    for pt in points:
        world = build_world(m, pt)
        eq = _solve_point(m, world, solver, pt)
        rows.append([pt[a] for a in axes] + [world.n, world.k, world.delta]
                    + _eq_cells(eq))
        if not eq.converged:
            failures.append((pt, eq))
    path = _out_path(m, out_dir)
    _write_csv(path, list(axes) + ["world_n", "world_k", "world_delta"]
               + EQ_COLUMNS, rows)
    out = [path]
    if failures:
        trace_path = _out_path(m, out_dir, suffix=".trace.txt")
        with open(trace_path, "w", encoding="utf-8", newline="\n") as fh:
            for pt, eq in failures:
                fh.write(f"# sweep point {pt}\n{eq.trace_log()}\n\n")
        raise NonConvergence(
            f"{len(failures)} of {len(points)} sweep points did not converge; "
            f"trace at {trace_path}")
    return out


def run_budget(m: Manifest, out_dir: str, overrides: dict) -> list[str]:
    solver = build_solver(m, overrides)
    axes, points = sweep_points(m)
    rows = []
    failures = []
    for pt in points:
        world = build_world(m, pt)
        rate = pt.get("lambda_b", m.get_float("budget.rate"))
        if rate is None:
            raise ManifestError("budget.rate: required (directly or as sweep.lambda_b)")
        eq = variant_equilibrium(world, solver, budget_rate=float(rate))
        rows.append([pt[a] for a in axes]
                    + [rate, budget_phase(float(rate), world.delta)]
                    + _eq_cells(eq))
        if not eq.converged:
            failures.append((pt, eq))
    path = _out_path(m, out_dir)
    _write_csv(path, list(axes) + ["rate", "phase_pred"] + EQ_COLUMNS, rows)
    if failures:
        trace_path = _out_path(m, out_dir, suffix=".trace.txt")
        with open(trace_path, "w", encoding="utf-8", newline="\n") as fh:
            for pt, eq in failures:
                fh.write(f"# sweep point {pt}\n{eq.trace_log()}\n\n")
        raise NonConvergence(
            f"{len(failures)} of {len(points)} sweep points did not converge; "
            f"trace at {trace_path}")
    return [path]


def run_patents(m: Manifest, out_dir: str, overrides: dict) -> list[str]:
    axes, points = sweep_points(m)
    analytic = m.get_bool("patents.analytic", True)
    rows = []
    if analytic:
        for pt in points:
            k = pt.get("k", m.get_int("world.k"))
            if k is None:
                raise ManifestError("world.k: required (directly or as sweep.k)")
            b = pt.get("b")
            if b is None:
                raise ManifestError("sweep.b: required for the analytic patent curve")
            rows.append([pt[a] for a in axes]
                        + [patent_profit_curve(float(b), int(k)),
                           optimal_patent_share(int(k))])
        path = _out_path(m, out_dir)
        _write_csv(path, list(axes) + ["profit", "opt_share"], rows)
        return [path]
    solver = build_solver(m, overrides)
    for pt in points:
        world = build_world(m, pt)
        if world.payoff.variant != "patents":
            raise ManifestError("payoff.variant: must be patents for "
                                "equilibrium-mode patent sweeps")
        eq = _solve_point(m, world, solver, pt)
        rows.append([pt[a] for a in axes] + _eq_cells(eq))
    path = _out_path(m, out_dir)
    _write_csv(path, list(axes) + EQ_COLUMNS, rows)
    return [path]


def run_phase_scan(m: Manifest, out_dir: str, overrides: dict) -> list[str]:
    """Sample networks along a mean-connectivity axis and measure how many
    discovered ideas spread widely (to at least n^(2/3) firms)."""
    solver = build_solver(m, overrides)
    axes, points = sweep_points(m)
    if "c" not in axes:
        raise ManifestError("sweep.c: required for phase-scan")
    p = m.get_float("profile.p", 0.9)
    reps = m.get_int("reps", solver.reps)
    rows = []
    for pt in points:
        world = build_world(m, pt)
        if world.delta <= 0.0:
            raise ManifestError("world.delta: phase-scan needs delta > 0")
        c = float(pt["c"])
        q = math.sqrt(c / (world.delta * world.n))
        prof = FirmProfile(p=p, q=min(q, 1.0))
        profiles = [prof] * world.n
        wide = np.empty(reps, dtype=float)
        cut = world.n ** (2.0 / 3.0)
        for rep in range(reps):
            rng = rep_rng(solver.seed, rep, (29,))
            net = sample_learning_network(world, profiles, rng)
            ks = knowledge_closure(net)
            cnt = 0
            for i in range(world.n):
                if net.discovered[i] and popcount(ks.coreach_incl(i)) - 1 >= cut:
                    cnt += 1
            wide[rep] = cnt
        alpha = giant_share(c)
        mean = float(np.mean(wide))
        se = float(np.std(wide, ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
        rows.append([pt[a] for a in axes]
                    + [p, prof.q, alpha, alpha * p * world.n, mean, se,
                       mean / (p * world.n)])
    path = _out_path(m, out_dir)
    _write_csv(path, list(axes) + ["p", "q", "alpha_pred", "wide_pred",
                                   "wide_mean", "wide_se", "share_mc"], rows)
    return [path]


def run_intervention(m: Manifest, out_dir: str, overrides: dict) -> list[str]:
    solver = build_solver(m, overrides)
    axes, points = sweep_points(m)
    factors = m.get_floats("sweep.factors") or [0.75, 1.0, 1.25]
    factors = sorted(set(factors) | {1.0})
    other_axes = [a for a in axes if a != "factors"]
    seen = set()
    rows = []
    failures = []
    for pt in points:
        outer = tuple(pt[a] for a in other_axes)
        if outer in seen:
            continue
        seen.add(outer)
        world = build_world(m, pt)
        p = m.get_float("profile.p")
        q = m.get_float("profile.q")
        if p is not None and q is not None:
            eq = EquilibriumResult(
                variant=world.payoff.variant, n=world.n, k=world.k,
                delta=world.delta, p_star=p, q_star=q, lambda_hat=math.nan,
                classification="given", payoff_mean=math.nan,
                payoff_se=math.nan, tau_mean=math.nan, converged=True,
                investment=p > 0, certificate=0.0, iterations=0)
        else:
            eq = _solve_point(m, world, solver, pt)
            if not eq.converged:
                failures.append((pt, eq))
                continue
        for ip in intervention_scan(world, eq, factors, solver,
                                    reps=m.get_int("reps", solver.reps)):
            rows.append(list(outer)
                        + [ip.factor, eq.p_star, ip.q, ip.payoff, ip.payoff_se,
                           "" if ip.ratio is None else ip.ratio,
                           ip.p_derivative,
                           "" if ip.derivative_ratio is None else ip.derivative_ratio])
    path = _out_path(m, out_dir)
    _write_csv(path, other_axes + ["factor", "p", "q", "payoff", "payoff_se",
                                   "ratio", "p_derivative", "derivative_ratio"],
               rows)
    if failures:
        trace_path = _out_path(m, out_dir, suffix=".trace.txt")
        with open(trace_path, "w", encoding="utf-8", newline="\n") as fh:
            for pt, eq in failures:
                fh.write(f"# sweep point {pt}\n{eq.trace_log()}\n\n")
        raise NonConvergence(
            f"{len(failures)} equilibrium solves did not converge; "
            f"trace at {trace_path}")
    return [path]


def run_replay(m: Manifest, out_dir: str, overrides: dict) -> list[str]:
    rel = m.get("replay.file")
    if not rel:
        raise ManifestError("replay.file: required for replay")
    k = m.get_int("world.k")
    if k is None:
        raise ManifestError("world.k: required for replay")
    net = load_replay(rel)
    world = WorldConfig(n=net.n, k=int(k), delta=m.get_float("world.delta", 1.0))
    profiles = uniform_profiles(net.n, p=0.0, q=0.0)
    report = payoff_profile(knowledge_closure(net), net, world, profiles)
    path = _out_path(m, out_dir)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report.to_csv())
    return [path]


RUNNERS: dict[str, Callable[[Manifest, str, dict], list[str]]] = {
    "simulate": run_simulate,
    "best-response": run_best_response,
    "equilibrium": run_equilibrium,
    "phase-scan": run_phase_scan,
    "intervention": run_intervention,
    "patents": run_patents,
    "budget": run_budget,
    "replay": run_replay,
}


def run_manifest(m: Manifest, out_dir: str,
                 overrides: Optional[dict] = None) -> list[str]:
    kind = m.require("experiment")
    runner = RUNNERS.get(kind)
    if runner is None:
        raise ManifestError(f"experiment: unknown kind {kind!r} "
                            f"(one of {', '.join(sorted(RUNNERS))})")
    if "seed" not in m.entries and not (overrides and "seed" in overrides):
        raise ManifestError("seed: required key is missing")
    return runner(m, out_dir, dict(overrides or {}))
