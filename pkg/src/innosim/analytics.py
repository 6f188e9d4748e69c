"""Closed-form predictions used to cross-check the simulator.

Branching-process approximations for the learning network: criticality index,
giant-component share, subcritical component-size law, and the asymptotic
payoff formulas for the baseline model and its variants.  Everything here is
deterministic math; agreement with Monte Carlo is what the acceptance suite
is for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config import CostSpec, FirmProfile, WorldConfig
from .errors import NonConvergence
from .network import arc_prob_matrix

TOL = 1e-10
CRITICAL_BAND = (0.9, 1.1)


# ---------------------------------------------------------------------------
# Criticality
# ---------------------------------------------------------------------------


@dataclass
class CriticalityReport:
    criticality_index: float
    classification: str
    row_sums: np.ndarray


def classify_lambda(lam: float, band: tuple[float, float] = CRITICAL_BAND) -> str:
    lo, hi = band
    if lam < lo:
        return "subcritical"
    if lam > hi:
        return "supercritical"
    return "critical-band"


def indirect_prob_matrix(world: WorldConfig, profiles: Sequence[FirmProfile]) -> np.ndarray:
    return world.delta * arc_prob_matrix(world, profiles)


def spectral_radius(world: WorldConfig, profiles: Sequence[FirmProfile],
                    tol: float = TOL, max_iter: int = 20_000) -> float:
    """Largest eigenvalue of the indirect-link-probability matrix.

    Power iteration from the uniform vector; the matrix is nonnegative with
    zero diagonal, so the dominant eigenvalue is real and nonnegative.
    """
    m = indirect_prob_matrix(world, profiles)
    n = m.shape[0]
    v = np.full(n, 1.0 / math.sqrt(n))
    lam = 0.0
    for _ in range(max_iter):
        w = m @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v_new = w / norm
        lam_new = float(v_new @ (m @ v_new))
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-300):
            return lam_new
        lam, v = lam_new, v_new
    raise NonConvergence("power iteration did not converge")


def criticality_report(world: WorldConfig, profiles: Sequence[FirmProfile],
                       band: tuple[float, float] = CRITICAL_BAND) -> CriticalityReport:
    m = indirect_prob_matrix(world, profiles)
    lam = spectral_radius(world, profiles)
    return CriticalityReport(criticality_index=lam,
                             classification=classify_lambda(lam, band),
                             row_sums=m.sum(axis=1))


# ---------------------------------------------------------------------------
# Giant component
# ---------------------------------------------------------------------------


@dataclass
class GiantPrediction:
    c: float
    alpha: float
    ideas_learned: float


def giant_share(c: float) -> float:
    """Positive root of alpha = 1 - exp(-c*alpha); zero at or below c=1."""
    if c <= 1.0:
        return 0.0
    lo, hi = 1e-12, 1.0
    # f(lo) > 0 since f'(0) = c - 1 > 0; f(1) = -exp(-c) < 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f = 1.0 - math.exp(-c * mid) - mid
        if f > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= TOL:
            break
    return 0.5 * (lo + hi)


def giant_prediction(c: float, p: float, n: int) -> GiantPrediction:
    alpha = giant_share(c)
    return GiantPrediction(c=c, alpha=alpha, ideas_learned=p * alpha * n)


def borel_total_progeny_pmf(cprime: float, y: int) -> float:
    """P(total progeny = y) for a Poisson(cprime) branching process."""
    if y < 1:
        return 0.0
    log_p = -cprime * y + (y - 1) * math.log(cprime * y) - math.lgamma(y + 1)
    return math.exp(log_p)


def borel_mass(cprime: float, terms: int = 10_000) -> float:
    return sum(borel_total_progeny_pmf(cprime, y) for y in range(1, terms + 1))


def multitype_extinction(m: np.ndarray, tol: float = 1e-12,
                         max_iter: int = 100_000) -> np.ndarray:
    """Extinction probabilities for a multitype Poisson branching process.

    m[i, j] is the mean number of type-j children of a type-i node; the fixed
    point s = exp(-m (1-s)) is approached monotonically from zero.
    """
    k = m.shape[0]
    s = np.zeros(k)
    for _ in range(max_iter):
        s_new = np.exp(-m @ (1.0 - s))
        if np.max(np.abs(s_new - s)) <= tol:
            return s_new
        s = s_new
    raise NonConvergence("multitype extinction iteration did not converge")


# ---------------------------------------------------------------------------
# Asymptotic payoffs
# ---------------------------------------------------------------------------


def gen_binom(x: float, k: int) -> float:
    """C(x, k) through the gamma function, for real x >= k; zero below."""
    if x < k:
        return 0.0
    return math.exp(math.lgamma(x + 1) - math.lgamma(k + 1) - math.lgamma(x - k + 1))


@dataclass
class SupercriticalPayoff:
    gross: float
    net: float
    degenerate: bool


def supercritical_payoff(world: WorldConfig, p: float, q: float,
                         alpha: Optional[float] = None) -> SupercriticalPayoff:
    """Asymptotic expected payoff for a symmetric supercritical profile.

    Gross term: p^k * alpha * C(alpha*n, k-1) * (1 - delta*iota
    - (1-delta)*iota*alpha)^(n-1).  The survivor factor is the chance that no
    other firm learns the whole technology: an indirect arc out always kills
    it, a direct-only arc kills it when the learner sits in the giant.
    """
    n, k, delta = world.n, world.k, world.delta
    iota = q * q
    if alpha is None:
        alpha = giant_share(delta * iota * (n - 1))
    cost = world.cost.value(p)
    combos = gen_binom(alpha * n, k - 1)
    if combos == 0.0:
        return SupercriticalPayoff(gross=0.0, net=-cost, degenerate=True)
    survive = (1.0 - delta * iota - (1.0 - delta) * iota * alpha) ** (n - 1)
    gross = (p ** k) * alpha * combos * survive
    return SupercriticalPayoff(gross=gross, net=gross - cost, degenerate=False)


def direct_eq_rate(n: int, k: int) -> float:
    """Equilibrium interaction rate with direct learning only."""
    return ((k - 1) / (n - 1)) ** (1.0 / k)


def patent_profit_curve(b: float, k: int) -> float:
    """Large-n average profit from monopoly products at patent share b,
    normalized by n^(k-1)."""
    return ((1.0 - b) / 2.0) ** (k - 1) * (b + (1.0 - b) / 4.0)


def optimal_patent_share(k: int, resolution: float = 1e-3) -> float:
    grid = np.arange(0.0, 1.0 + resolution / 2, resolution)
    vals = [patent_profit_curve(float(b), k) for b in grid]
    best = int(np.argmax(vals))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]
    return _golden_max(lambda b: patent_profit_curve(b, k), float(lo), float(hi))


def _golden_max(f, lo: float, hi: float, tol: float = 1e-9) -> float:
    g = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - g * (b - a)
    x2 = a + g * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + g * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - g * (b - a)
            f1 = f(x1)
    return 0.5 * (a + b)


def budget_phase(lambda_b: float, delta: float) -> str:
    """Predicted regime as the budget rate crosses half the relay rate."""
    half = delta / 2.0
    if abs(lambda_b - half) <= 1e-12 * max(half, 1.0):
        return "critical"
    return "subcritical" if lambda_b < half else "supercritical"


# ---------------------------------------------------------------------------
# Investment first-order condition
# ---------------------------------------------------------------------------


def investment_foc_residual(p: float, k: int, e_ppt: float, cost: CostSpec) -> float:
    """c'(p) minus the marginal gross payoff p^(k-1) * E|PPT|."""
    return cost.derivative(p) - (p ** (k - 1)) * e_ppt


@dataclass
class InvestmentSolution:
    p: float
    corner: bool
    residual: float


def solve_investment(k: int, e_ppt: float, cost: CostSpec,
                     grid_points: int = 4000) -> InvestmentSolution:
    """Stable root of the investment FOC via bisection.

    The residual starts at 0, and an interior equilibrium is the last
    crossing from negative (marginal payoff exceeds marginal cost) back to
    positive.  No negative region means the corner p*=0.
    """
    if e_ppt <= 0.0:
        return InvestmentSolution(p=0.0, corner=True, residual=0.0)
    grid = np.linspace(1e-9, 1.0 - 1e-9, grid_points)
    res = np.array([investment_foc_residual(float(p), k, e_ppt, cost) for p in grid])
    crossing = None
    for idx in range(len(grid) - 1, 0, -1):
        if res[idx - 1] < 0.0 <= res[idx]:
            crossing = idx
            break
    if crossing is None:
        return InvestmentSolution(p=0.0, corner=True, residual=0.0)
    lo, hi = float(grid[crossing - 1]), float(grid[crossing])
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if investment_foc_residual(mid, k, e_ppt, cost) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15:
            break
    p = 0.5 * (lo + hi)
    return InvestmentSolution(p=p, corner=False,
                              residual=investment_foc_residual(p, k, e_ppt, cost))
