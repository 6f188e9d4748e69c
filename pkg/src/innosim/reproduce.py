"""Registered reproduction checks with pinned seeds and tolerances.

Each check runs a canonical configuration, compares against its registered
expectation, and reports pass/fail with the measured numbers.  Checks are
standalone: invoking one never depends on artifacts from another, though
equilibrium solves are memoized within a process so checks sharing a
configuration pay for it once.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .analytics import budget_phase, giant_share, optimal_patent_share, spectral_radius
from .analytics import borel_mass
from .config import FirmProfile, PayoffSpec, WorldConfig, uniform_profiles
from .counting import count_proprietary_exact, count_proprietary_ie, enumerate_proprietary
from .equilibrium import (CSV_HEADER, EquilibriumResult, SolverConfig,
                          beta_equilibrium, best_response_q, budget_equilibrium,
                          intervention_scan, public_equilibrium,
                          symmetric_equilibrium, tau_summary)
from .errors import ManifestError
from .experiments import BETA_KEY, run_manifest
from .knowledge import knowledge_closure
from .manifest import Manifest
from .errors import CompetitorCapExceeded, EnumerationBudgetExceeded
from .montecarlo import exact_expected_payoffs, expected_payoffs, rep_rng
from .network import parse_replay, sample_learning_network

ACC_SEED = 7

# Worked four-firm example: firm ids are zero-based, so the discovering
# firms are {0, 2, 3} and the only candidate technology is {0, 2, 3}.
FIG1_REPLAY = """\
FIRMS 4
DISCOVERED
0
2
3
DIRECT
0 1
0 2
2 0
2 3
INDIRECT
0 1
2 0
"""

# same world, but firm 0 now also learns indirectly through firm 2
FIG2_REPLAY = FIG1_REPLAY + "0 2\n"


@dataclass
class CheckResult:
    check: str
    ok: bool
    lines: list[str] = field(default_factory=list)
    artifacts: list[str] = field(default_factory=list)

    def report(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        body = "\n".join("  " + ln for ln in self.lines)
        return f"[{status}] {self.check}\n{body}" if body else f"[{status}] {self.check}"


_EQ_CACHE: dict = {}


def baseline_equilibrium(n: int, seed: int = ACC_SEED,
                         threads: int = 1) -> EquilibriumResult:
    """Symmetric equilibrium of the reference world (k=3, delta=1, c0=1)."""
    key = (n, seed)
    if key not in _EQ_CACHE:
        world = WorldConfig(n=n, k=3, delta=1.0)
        _EQ_CACHE[key] = symmetric_equilibrium(
            world, SolverConfig(seed=seed, threads=threads))
    return _EQ_CACHE[key]


def _write_lines(path: str, text: str) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _read_csv(path: str) -> tuple[list[str], list[list[str]]]:
    with open(path, encoding="utf-8") as fh:
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    return rows[0], rows[1:]


def _eq_csv(path: str, results: list[EquilibriumResult]) -> str:
    body = "\n".join([CSV_HEADER] + [eq.csv_row() for eq in results]) + "\n"
    return _write_lines(path, body)


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------


def check_example_2_2(out_dir: str, overrides: dict) -> CheckResult:
    """The worked four-firm example: monopoly in the first network, rent
    dissipation in the second."""
    lines = []
    artifacts = []
    ok = True
    expected = {"fig1": [0.0, 0.0, 1.0, 0.0], "fig2": [0.0, 0.0, 0.0, 0.0]}
    for tag, text in (("fig1", FIG1_REPLAY), ("fig2", FIG2_REPLAY)):
        rfile = _write_lines(os.path.join(out_dir, f"example-2-2-{tag}.replay"), text)
        m = Manifest()
        m.set("manifest_version", 1).set("experiment", "replay")
        m.set("id", f"example-2-2-{tag}").set("seed", 0)
        m.set("world.k", 3).set("replay.file", rfile)
        m.save(os.path.join(out_dir, f"example-2-2-{tag}.manifest"))
        paths = run_manifest(m, out_dir)
        artifacts += paths
        _, data = _read_csv(paths[0])
        gross = [float(row[4]) for row in data]
        good = gross == expected[tag]
        ok = ok and good
        lines.append(f"{tag}: gross payoffs {gross} expected {expected[tag]}")
    net = parse_replay(FIG1_REPLAY)
    ks = knowledge_closure(net)
    world = WorldConfig(n=4, k=3, delta=1.0)
    pts = {i: enumerate_proprietary(ks, net, world, i) for i in range(4)}
    good = pts == {0: [], 1: [], 2: [(0, 2, 3)], 3: []}
    ok = ok and good
    lines.append(f"proprietary sets: {pts}")
    return CheckResult("example-2-2", ok, lines, artifacts)


def check_criticality(out_dir: str, overrides: dict) -> CheckResult:
    """Solved symmetric equilibria sit near the critical connectivity and
    tighten with population size."""
    threads = int(overrides.get("threads", 1))
    results = []
    lines = []
    ok = True
    lams = {}
    for n in (250, 500, 1000):
        eq = baseline_equilibrium(n, threads=threads)
        results.append(eq)
        lams[n] = eq.lambda_hat
        good = 0.5 <= eq.lambda_hat <= 2.0 and eq.converged
        ok = ok and good
        lines.append(f"n={n}: lambda={eq.lambda_hat:.4f} p*={eq.p_star:.4f} "
                     f"q*={eq.q_star:.5f} converged={eq.converged} "
                     f"certificate={eq.certificate:.3f}")
    trend = abs(lams[1000] - 1.0) <= abs(lams[250] - 1.0) + 0.1
    ok = ok and trend
    lines.append(f"trend |lambda-1|: n=1000 {abs(lams[1000]-1):.4f} vs "
                 f"n=250 {abs(lams[250]-1):.4f} + 0.1 -> {trend}")
    artifacts = [_eq_csv(os.path.join(out_dir, "criticality.csv"), results)]
    return CheckResult("criticality", ok, lines, artifacts)


def check_direct_learning(out_dir: str, overrides: dict) -> CheckResult:
    """With no relaying the equilibrium interaction rate follows the
    ((k-1)/n)^(1/k) scale."""
    threads = int(overrides.get("threads", 1))
    results = []
    lines = []
    ok = True
    for k in (2, 3):
        world = WorldConfig(n=2000, k=k, delta=0.0)
        eq = symmetric_equilibrium(world, SolverConfig(seed=ACC_SEED,
                                                      threads=threads))
        results.append(eq)
        iota = eq.q_star ** 2
        got = iota * 2000 ** (1.0 / k)
        target = (k - 1) ** (1.0 / k)
        good = abs(got / target - 1.0) <= 0.2
        ok = ok and good
        lines.append(f"k={k}: iota*n^(1/k)={got:.4f} target={target:.4f} "
                     f"ratio={got / target:.3f}")
    artifacts = [_eq_csv(os.path.join(out_dir, "direct-learning.csv"), results)]
    return CheckResult("direct-learning", ok, lines, artifacts)


def check_giant_component(out_dir: str, overrides: dict) -> CheckResult:
    """Wide idea spread matches the branching-survival share: absent below
    the threshold, alpha*p*n above it."""
    m = Manifest()
    m.set("manifest_version", 1).set("experiment", "phase-scan")
    m.set("id", "giant-component").set("seed", ACC_SEED).set("reps", 100)
    m.set("world.n", 2000).set("world.k", 3).set("world.delta", 1.0)
    m.set("profile.p", 0.9)
    m.set("sweep.c", [0.5, 1.0, 2.0])
    m.save(os.path.join(out_dir, "giant-component.manifest"))
    paths = run_manifest(m, out_dir)
    header, data = _read_csv(paths[0])
    col = {h: i for i, h in enumerate(header)}
    lines = []
    ok = True
    for row in data:
        c = float(row[col["c"]])
        share = float(row[col["share_mc"]])
        wide = float(row[col["wide_mean"]])
        pred = float(row[col["wide_pred"]])
        if c <= 1.0:
            good = share <= 0.10
            lines.append(f"c={c}: share={share:.4f} (expect ~0)")
        else:
            good = abs(wide - pred) <= 0.06 * pred
            lines.append(f"c={c}: wide ideas {wide:.1f} predicted {pred:.1f} "
                         f"(tolerance 6%)")
        ok = ok and good
    return CheckResult("giant-component", ok, lines, paths)


def check_intervention_gain(out_dir: str, overrides: dict) -> CheckResult:
    """Scaling everyone's openness 25% above equilibrium multiplies payoffs,
    and the multiplier grows with n."""
    threads = int(overrides.get("threads", 1))
    ratios = {}
    lines = []
    rows = []
    for n in (500, 1000):
        eq = baseline_equilibrium(n, threads=threads)
        world = WorldConfig(n=n, k=3, delta=1.0)
        pts = intervention_scan(world, eq, [1.0, 1.25],
                                SolverConfig(seed=ACC_SEED, threads=threads))
        ratios[n] = pts[1].ratio
        for ip in pts:
            rows.append(f"{n},{ip.factor},{ip.q:.6g},{ip.payoff:.6g},"
                        f"{'' if ip.ratio is None else round(ip.ratio, 4)}")
        lines.append(f"n={n}: U(1.25q*)/U(q*) = {ratios[n]:.3f}")
    ok = (ratios[1000] is not None and ratios[1000] >= 3.0
          and ratios[500] is not None and ratios[1000] > ratios[500])
    lines.append("require ratio(1000) >= 3 and ratio(1000) > ratio(500)")
    path = _write_lines(os.path.join(out_dir, "intervention-gain.csv"),
                        "\n".join(["n,factor,q,payoff,ratio"] + rows) + "\n")
    return CheckResult("intervention-gain", ok, lines, [path])


def check_p_sensitivity(out_dir: str, overrides: dict) -> CheckResult:
    """The marginal value of investment is far larger on a supercritical
    network than at the equilibrium point."""
    threads = int(overrides.get("threads", 1))
    eq = baseline_equilibrium(1000, threads=threads)
    world = WorldConfig(n=1000, k=3, delta=1.0)
    pts = intervention_scan(world, eq, [1.0, 1.5],
                            SolverConfig(seed=ACC_SEED, threads=threads))
    dr = pts[1].derivative_ratio
    ok = dr is not None and dr >= 2.0
    lines = [f"dU/dp at 1.5q* vs q*: {pts[1].p_derivative:.4g} / "
             f"{pts[0].p_derivative:.4g} = {dr if dr is None else round(dr, 3)}",
             "require ratio >= 2"]
    path = _write_lines(os.path.join(out_dir, "p-sensitivity.csv"),
                        "factor,p_derivative,derivative_ratio\n"
                        + "\n".join(f"{ip.factor},{ip.p_derivative:.6g},"
                                    f"{'' if ip.derivative_ratio is None else round(ip.derivative_ratio, 4)}"
                                    for ip in pts) + "\n")
    return CheckResult("p-sensitivity", ok, lines, [path])


def check_patent_share(out_dir: str, overrides: dict) -> CheckResult:
    """Analytic large-n patent curve: interior optimum for low complexity,
    zero share optimal for k >= 4."""
    m = Manifest()
    m.set("manifest_version", 1).set("experiment", "patents")
    m.set("id", "patent-share").set("seed", 0)
    m.set("sweep.k", [2, 3, 5, 10])
    m.set("sweep.b", [round(0.05 * i, 2) for i in range(20)])
    m.save(os.path.join(out_dir, "patent-share.manifest"))
    paths = run_manifest(m, out_dir)
    lines = []
    ok = True
    targets = {2: 1.0 / 3.0, 3: 1.0 / 9.0, 4: 0.0, 10: 0.0}
    for k, target in targets.items():
        got = optimal_patent_share(k)
        good = abs(got - target) <= 1e-3
        ok = ok and good
        lines.append(f"k={k}: argmax share {got:.4f} expected {target:.4f}")
    return CheckResult("patent-share", ok, lines, paths)


def check_competition(out_dir: str, overrides: dict) -> CheckResult:
    """Rewarding shared production pushes equilibria supercritical;
    penalizing it pushes them subcritical."""
    threads = int(overrides.get("threads", 1))
    solver = SolverConfig(seed=ACC_SEED, reps=250, polish_factor=2,
                          polish_iters=5, threads=threads)
    results = []
    lines = []
    lams = {}
    for f in (0.5, -0.5):
        world = WorldConfig(n=1000, k=3, delta=1.0,
                            payoff=PayoffSpec(variant="competition",
                                              f_table=(f,)))
        eq = symmetric_equilibrium(world, solver)
        results.append(eq)
        lams[f] = eq.lambda_hat
        lines.append(f"f={f}: lambda={eq.lambda_hat:.3f} "
                     f"class={eq.classification} p*={eq.p_star:.4f}")
    ok = lams[0.5] > 1.2 and lams[-0.5] < 0.8
    lines.append("require lambda(f=0.5) > 1.2 and lambda(f=-0.5) < 0.8")
    artifacts = [_eq_csv(os.path.join(out_dir, "competition.csv"), results)]
    return CheckResult("competition", ok, lines, artifacts)


def check_budget(out_dir: str, overrides: dict) -> CheckResult:
    """Budget-line thresholds as registered.

    The registered directions (low rate subcritical, high rate supercritical)
    disagree with the solved best-response dynamics: cheap interaction buys
    more of it, so rates below delta/2 land supercritical.  The check reports
    the measured side of each threshold and fails while that conflict stands.
    """
    threads = int(overrides.get("threads", 1))
    solver = SolverConfig(seed=ACC_SEED, reps=300, polish_factor=2,
                          polish_iters=5, threads=threads)
    results = []
    lines = []
    lams = {}
    for rate in (0.3, 0.7):
        world = WorldConfig(n=1000, k=3, delta=1.0)
        eq = budget_equilibrium(world, solver, rate)
        results.append(eq)
        lams[rate] = eq.lambda_hat
        lines.append(f"rate={rate}: lambda={eq.lambda_hat:.3f} "
                     f"class={eq.classification} predicted "
                     f"{budget_phase(rate, 1.0)} p*={eq.p_star:.4f}")
    ok = lams[0.3] < 0.8 and lams[0.7] > 1.2
    lines.append("require lambda(0.3) < 0.8 and lambda(0.7) > 1.2")
    artifacts = [_eq_csv(os.path.join(out_dir, "budget.csv"), results)]
    return CheckResult("budget", ok, lines, artifacts)


def check_beta_heterogeneity(out_dir: str, overrides: dict) -> CheckResult:
    """Drawn learning-rate heterogeneity keeps equilibria near the critical
    spectral radius, tightening with n."""
    threads = int(overrides.get("threads", 1))
    solver = SolverConfig(seed=ACC_SEED, reps=250, polish_factor=2,
                          polish_iters=4, max_iters=15, threads=threads)
    results = []
    lines = []
    lams = {}
    for n in (500, 1000):
        world = WorldConfig(n=n, k=3, delta=1.0)
        betas = rep_rng(ACC_SEED, 0, (BETA_KEY,)).uniform(0.5, 1.0, size=n)
        eq = beta_equilibrium(world, solver, betas)
        results.append(eq)
        lams[n] = eq.lambda_hat
        good = 0.5 <= eq.lambda_hat <= 2.0
        lines.append(f"n={n}: spectral index {eq.lambda_hat:.4f} "
                     f"converged={eq.converged}")
        if not good:
            lines[-1] += "  outside [0.5, 2.0]"
    trend = abs(lams[1000] - 1.0) <= abs(lams[500] - 1.0) + 0.1
    ok = all(0.5 <= v <= 2.0 for v in lams.values()) and trend
    lines.append(f"trend toward 1: |{lams[1000]:.3f}-1| <= "
                 f"|{lams[500]:.3f}-1| + 0.1 -> {trend}")
    artifacts = [_eq_csv(os.path.join(out_dir, "beta-heterogeneity.csv"),
                         results)]
    return CheckResult("beta-heterogeneity", ok, lines, artifacts)


def check_public_innovators(out_dir: str, overrides: dict) -> CheckResult:
    """A 20% public block keeps private payoffs a firm fraction of the
    technology space, without collapse as n grows."""
    threads = int(overrides.get("threads", 1))
    solver = SolverConfig(seed=ACC_SEED, reps=250, polish_factor=2,
                          polish_iters=4, threads=threads)
    results = []
    lines = []
    vals = {}
    for n in (500, 1000):
        world = WorldConfig(n=n, k=3, delta=1.0,
                            payoff=PayoffSpec(variant="public"))
        eq = public_equilibrium(world, solver, n_public=n // 5)
        results.append(eq)
        vals[n] = eq.payoff_mean / comb(n - 1, 2)
        lines.append(f"n={n}: private mean payoff {eq.payoff_mean:.1f} "
                     f"/ C(n-1,2) = {vals[n]:.4f}")
    ok = (vals[500] >= 0.01 and vals[1000] >= 0.01
          and vals[1000] >= 0.5 * vals[500])
    lines.append("require both >= 0.01 and no collapse at n=1000")
    artifacts = [_eq_csv(os.path.join(out_dir, "public-innovators.csv"),
                         results)]
    return CheckResult("public-innovators", ok, lines, artifacts)


def check_tau_diagnostics(out_dir: str, overrides: dict) -> CheckResult:
    """Minimal-cover statistics: tau tracks the criticality index at solved
    equilibria and concentrates at 1 on a large critical profile."""
    threads = int(overrides.get("threads", 1))
    lines = []
    ok = True
    for n in (250, 500, 1000):
        eq = baseline_equilibrium(n, threads=threads)
        if eq.lambda_hat <= 1.2 and not math.isnan(eq.tau_mean):
            good = abs(eq.lambda_hat - eq.tau_mean) <= 0.3
            ok = ok and good
            lines.append(f"n={n}: lambda={eq.lambda_hat:.3f} "
                         f"tau mean={eq.tau_mean:.3f} gap ok={good}")
        else:
            lines.append(f"n={n}: skipped (lambda={eq.lambda_hat:.3f})")
    world = WorldConfig(n=2000, k=3, delta=1.0)
    q = 1.0 / math.sqrt(world.delta * world.n)
    profiles = uniform_profiles(world.n, p=0.9, q=q)
    stats = tau_summary(world, profiles, SolverConfig(seed=ACC_SEED))
    good = (not stats.empty) and stats.mean() <= 1.3
    ok = ok and good
    lines.append(f"forced critical n=2000: tau mean={stats.mean():.3f} "
                 f"(require <= 1.3)")
    return CheckResult("tau-diagnostics", ok, lines, [])


def check_oracle_equivalence(out_dir: str, overrides: dict) -> CheckResult:
    """Exact enumeration and inclusion-exclusion agree everywhere; the
    Monte Carlo mean matches full state enumeration on the tiny world."""
    rng = np.random.default_rng(20260822)
    mismatches = 0
    done = 0
    skipped = 0
    while done < 500 and skipped < 2000:
        n = int(rng.integers(4, 31))
        k = int(rng.integers(2, 5))
        delta = float(rng.choice([0.0, 0.4, 0.8, 1.0]))
        world = WorldConfig(n=n, k=k, delta=delta)
        prof = FirmProfile(p=float(rng.uniform(0.3, 0.95)),
                           q=float(rng.uniform(0.08, 0.5)))
        net = sample_learning_network(world, [prof] * n, rng)
        ks = knowledge_closure(net)
        i = int(rng.integers(0, n))
        try:
            exact = count_proprietary_exact(ks, net, world, i)
            ie = count_proprietary_ie(ks, net, world, i)
        except (CompetitorCapExceeded, EnumerationBudgetExceeded):
            # instance outside one method's designed envelope; redraw
            skipped += 1
            continue
        if exact != ie:
            mismatches += 1
        done += 1
    lines = [f"exact vs inclusion-exclusion: {mismatches} mismatches in "
             f"{done} instances ({skipped} redrawn)"]
    ok = mismatches == 0 and done == 500

    world = WorldConfig(n=4, k=3, delta=1.0)
    profiles = uniform_profiles(4, p=0.55, q=0.45)
    exact = exact_expected_payoffs(world, profiles)
    mc = expected_payoffs(world, profiles, reps=3000, seed=ACC_SEED)
    worst = 0.0
    for i in range(4):
        se = max(mc.net_se[i], 1e-9)
        worst = max(worst, abs(mc.net_mean[i] - exact[i]) / se)
    good = worst <= 3.0
    ok = ok and good
    lines.append(f"MC vs enumeration on the four-firm world: worst deviation "
                 f"{worst:.2f} standard errors (require <= 3)")
    return CheckResult("oracle-equivalence", ok, lines, [])


def check_numerics(out_dir: str, overrides: dict) -> CheckResult:
    """Closed-form anchors for the spectral radius, branching-mass and
    giant-share computations."""
    lines = []
    ok = True
    for n in (2, 10, 500):
        world = WorldConfig(n=n, k=3, delta=0.7)
        profiles = uniform_profiles(n, p=0.5, q=0.2)
        lam = spectral_radius(world, profiles)
        target = 0.7 * 0.2 * 0.2 * (n - 1)
        good = abs(lam - target) <= 1e-10
        ok = ok and good
        lines.append(f"spectral radius n={n}: {lam:.12f} vs {target:.12f}")
    for cp in (1.5, 2.0):
        mass = borel_mass(cp)
        target = 1.0 - giant_share(cp)
        good = abs(mass - target) <= 1e-6
        ok = ok and good
        lines.append(f"branching mass C'={cp}: {mass:.8f} vs 1-alpha "
                     f"{target:.8f}")
    alpha = giant_share(2.0)
    good = abs(alpha - 0.796812) <= 1e-6
    ok = ok and good
    lines.append(f"giant share alpha(2) = {alpha:.7f} (expect 0.796812)")
    return CheckResult("numerics", ok, lines, [])


def check_determinism(out_dir: str, overrides: dict) -> CheckResult:
    """Byte-identical CSV from the same manifest across thread counts."""
    lines = []
    artifacts = []
    ok = True
    specs = [
        ("determinism-sim", {"experiment": "simulate", "world.n": 80,
                             "world.k": 3, "world.delta": 0.8,
                             "profile.p": 0.7, "profile.q": 0.08,
                             "reps": 300, "seed": 11}),
        ("determinism-br", {"experiment": "best-response", "world.n": 60,
                            "world.k": 3, "world.delta": 1.0,
                            "profile.p": 0.8, "profile.q": 0.1,
                            "reps": 200, "seed": 11}),
    ]
    for name, entries in specs:
        blobs = []
        for threads in (1, 2, 8):
            m = Manifest()
            m.set("manifest_version", 1).set("id", f"{name}-t{threads}")
            for k, v in entries.items():
                m.set(k, v)
            paths = run_manifest(m, out_dir, {"threads": threads})
            with open(paths[0], "rb") as fh:
                blobs.append(fh.read())
            artifacts += paths
        good = blobs[0] == blobs[1] == blobs[2]
        ok = ok and good
        lines.append(f"{name}: threads 1/2/8 byte-identical = {good}")
    return CheckResult("determinism", ok, lines, artifacts)


def check_table1(out_dir: str, overrides: dict) -> CheckResult:
    """Qualitative regimes: the best response falls across subcritical,
    critical and supercritical populations and points back toward the
    threshold; payoffs and investment sensitivity rise across regimes while
    the openness intervention loses its bite."""
    threads = int(overrides.get("threads", 1))
    n, p = 500, 0.9
    world = WorldConfig(n=n, k=3, delta=1.0)
    solver = SolverConfig(seed=ACC_SEED, reps=400, threads=threads)
    regimes = [("subcritical", 0.5), ("critical", 1.0), ("supercritical", 2.5)]
    rows = []
    for name, lam in regimes:
        q = math.sqrt(lam / (world.delta * (n - 1)))
        prof = FirmProfile(p=p, q=q)
        br = best_response_q(world, [prof] * (n - 1), solver)
        eq = EquilibriumResult(
            variant="baseline", n=n, k=3, delta=1.0, p_star=p, q_star=q,
            lambda_hat=lam, classification=name, payoff_mean=math.nan,
            payoff_se=math.nan, tau_mean=math.nan, converged=True,
            investment=True, certificate=0.0, iterations=0)
        pts = intervention_scan(world, eq, [1.0, 1.25], solver)
        gain = pts[1].ratio if pts[1].ratio is not None else math.nan
        rows.append({"regime": name, "lam": lam, "q": q, "br": br.q_star,
                     "payoff": pts[0].payoff, "gain": gain,
                     "dp": pts[0].p_derivative})
    lines = [f"{r['regime']}: q={r['q']:.5f} br={r['br']:.5f} "
             f"payoff={r['payoff']:.4g} q-gain={r['gain']:.3g} "
             f"dU/dp={r['dp']:.4g}" for r in rows]
    sub, crit, sup = rows
    checks = {
        "best response falls across regimes":
            sub["br"] > crit["br"] > sup["br"],
        "best response points toward the threshold":
            sub["br"] > sub["q"] and sup["br"] < sup["q"],
        "payoffs rise across regimes":
            sub["payoff"] < crit["payoff"] < sup["payoff"],
        "openness gain large below and at the threshold":
            sub["gain"] >= 1.5 and crit["gain"] >= 1.5,
        "investment sensitivity largest supercritical":
            sup["dp"] >= 2.0 * sub["dp"],
    }
    ok = all(checks.values())
    for desc, good in checks.items():
        lines.append(f"{desc}: {good}")
    path = _write_lines(
        os.path.join(out_dir, "table1.csv"),
        "regime,lambda,q,br_q,payoff,q_gain,p_derivative\n"
        + "\n".join(f"{r['regime']},{r['lam']},{r['q']:.6g},{r['br']:.6g},"
                    f"{r['payoff']:.6g},{r['gain']:.4g},{r['dp']:.6g}"
                    for r in rows) + "\n")
    return CheckResult("table1", ok, lines, [path])


CHECKS = {
    "example-2-2": check_example_2_2,
    "criticality": check_criticality,
    "direct-learning": check_direct_learning,
    "giant-component": check_giant_component,
    "intervention-gain": check_intervention_gain,
    "p-sensitivity": check_p_sensitivity,
    "patent-share": check_patent_share,
    "competition": check_competition,
    "budget": check_budget,
    "beta-heterogeneity": check_beta_heterogeneity,
    "public-innovators": check_public_innovators,
    "tau-diagnostics": check_tau_diagnostics,
    "oracle-equivalence": check_oracle_equivalence,
    "numerics": check_numerics,
    "determinism": check_determinism,
    "table1": check_table1,
}


def run_check(name: str, out_dir: str, overrides=None) -> CheckResult:
    fn = CHECKS.get(name)
    if fn is None:
        raise ManifestError(f"unknown reproduce id {name!r} "
                            f"(one of {', '.join(sorted(CHECKS))})")
    os.makedirs(out_dir, exist_ok=True)
    return fn(out_dir, dict(overrides or {}))
