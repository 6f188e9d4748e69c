"""Domain configuration types: world parameters, firm profiles, cost and payoff rules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

from .errors import ConfigError

# ---------------------------------------------------------------------------
# Investment cost families
# ---------------------------------------------------------------------------

# family name -> (value, derivative), both taking (p, c0)
_COST_FAMILIES: dict[str, tuple[Callable[[float, float], float], Callable[[float, float], float]]] = {}


def register_cost_family(name: str, value: Callable[[float, float], float],
                         derivative: Callable[[float, float], float]) -> None:
    """Register a cost family c(p).  Must satisfy c(0)=0, c increasing and convex
    on [0,1), c(p) -> inf as p -> 1, and c'(0+) >= 0.  Checked numerically on a
    grid the first time the family is used by a CostSpec."""
    _COST_FAMILIES[name] = (value, derivative)


def _barrier_value(p: float, c0: float) -> float:
    return c0 * (1.0 / (1.0 - p) - 1.0 - p)


def _barrier_derivative(p: float, c0: float) -> float:
    return c0 * (1.0 / (1.0 - p) ** 2 - 1.0)


register_cost_family("barrier", _barrier_value, _barrier_derivative)

_CHECKED_FAMILIES: set[str] = set()


def _check_family(name: str) -> None:
    if name in _CHECKED_FAMILIES:
        return
    value, derivative = _COST_FAMILIES[name]
    grid = [i / 200.0 for i in range(0, 199)]  # 0 .. 0.99
    v0 = value(0.0, 1.0)
    if abs(v0) > 1e-12:
        raise ConfigError(f"cost family {name!r}: c(0) must be 0, got {v0}")
    vals = [value(p, 1.0) for p in grid]
    for a, b in zip(vals, vals[1:]):
        if b < a - 1e-12:
            raise ConfigError(f"cost family {name!r} is not nondecreasing")
    # discrete convexity
    for a, b, c in zip(vals, vals[1:], vals[2:]):
        if (c - b) < (b - a) - 1e-9:
            raise ConfigError(f"cost family {name!r} is not convex")
    if value(1.0 - 1e-9, 1.0) < 1e6:
        raise ConfigError(f"cost family {name!r} does not blow up near p=1")
    if derivative(0.0, 1.0) < -1e-12:
        raise ConfigError(f"cost family {name!r} has negative marginal cost at 0")
    _CHECKED_FAMILIES.add(name)


@dataclass(frozen=True)
class CostSpec:
    """Investment cost c(p) for discovering one's own idea.

    The default family is c(p) = c0 * (1/(1-p) - 1 - p): zero at p=0, smooth,
    strictly convex, and divergent as p -> 1, so interior first-order conditions
    are well posed whenever the marginal value of discovery is large enough.
    """

    family: str = "barrier"
    c0: float = 1.0

    def __post_init__(self):
        if self.family not in _COST_FAMILIES:
            raise ConfigError(f"unknown cost family {self.family!r}")
        if not (self.c0 >= 0.0 and math.isfinite(self.c0)):
            raise ConfigError(f"c0 must be finite and >= 0, got {self.c0}")
        _check_family(self.family)

    def value(self, p: float) -> float:
        return _COST_FAMILIES[self.family][0](p, self.c0)

    def derivative(self, p: float) -> float:
        return _COST_FAMILIES[self.family][1](p, self.c0)


# ---------------------------------------------------------------------------
# Payoff rules
# ---------------------------------------------------------------------------

PAYOFF_VARIANTS = ("baseline", "rho", "phi", "competition", "patents", "public")


@dataclass(frozen=True)
class PayoffSpec:
    """Which payoff rule firms face.

    baseline     one unit per proprietary technology
    rho          |PT_i| ** rho (curvature in the count of monopolized technologies)
    phi          phi(|learned ideas|), paid when the firm discovers its own idea
                 and nobody learns from it; phi given as a table phi(0), phi(1), ...
                 extended linearly past the end of the table
    competition  payoff f(m) per produced technology with m rival producers,
                 f(0) = 1, weakly decreasing, given as a table f(1), f(2), ...
                 (the last entry extends to larger m)
    patents      a fraction of firms holds patents; a technology pays only if it
                 contains no *other* firm's patented idea, and patent holders are
                 exempt from the uniqueness requirement on their own anchored
                 technologies
    public       firms flagged public are paid for every technology they can
                 produce, with no uniqueness requirement; unflagged firms keep
                 the baseline rule
    """

    variant: str = "baseline"
    rho: float = 1.0
    phi_table: Optional[tuple[float, ...]] = None
    f_table: Optional[tuple[float, ...]] = None
    patent_share: float = 0.0

    def __post_init__(self):
        if self.variant not in PAYOFF_VARIANTS:
            raise ConfigError(f"unknown payoff variant {self.variant!r}")
        if self.variant == "rho":
            if not (self.rho > 0 and math.isfinite(self.rho)):
                raise ConfigError("rho must be positive and finite")
        if self.variant == "phi":
            if not self.phi_table or len(self.phi_table) < 2:
                raise ConfigError("phi variant needs a table with at least two values")
            diffs = [b - a for a, b in zip(self.phi_table, self.phi_table[1:])]
            if any(d <= 0 for d in diffs):
                raise ConfigError("phi table must be strictly increasing")
        if self.variant == "competition":
            if not self.f_table:
                raise ConfigError("competition variant needs a table f(1), f(2), ...")
            prev = 1.0  # f(0) is fixed at 1
            for v in self.f_table:
                if v > prev + 1e-12:
                    raise ConfigError("f table must be weakly decreasing from f(0)=1")
                prev = v
        if self.variant == "patents":
            if not (0.0 <= self.patent_share <= 1.0):
                raise ConfigError("patent_share must lie in [0, 1]")

    def phi(self, count: int) -> float:
        table = self.phi_table
        assert table is not None
        if count < len(table):
            return table[count]
        # extend with the table's final increment
        step = table[-1] - table[-2]
        return table[-1] + step * (count - len(table) + 1)

    def f(self, m: int) -> float:
        if m <= 0:
            return 1.0
        table = self.f_table
        assert table is not None
        return table[min(m, len(table)) - 1]


# ---------------------------------------------------------------------------
# World and firms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WorldConfig:
    """Shared environment: population size n, technology complexity k (how many
    distinct ideas a technology combines), indirect transmission probability
    delta, cost and payoff rules, and an optional per-arc link cost charged to
    the learning side of each realized direct arc."""

    n: int
    k: int
    delta: float
    cost: CostSpec = field(default_factory=CostSpec)
    payoff: PayoffSpec = field(default_factory=PayoffSpec)
    link_cost: float = 0.0

    def __post_init__(self):
        if not (isinstance(self.n, int) and self.n >= 2):
            raise ConfigError(f"n must be an integer >= 2, got {self.n!r}")
        if not (isinstance(self.k, int) and self.k >= 2):
            raise ConfigError(f"k must be an integer >= 2, got {self.k!r}")
        if not (0.0 <= self.delta <= 1.0):
            raise ConfigError(f"delta must lie in [0, 1], got {self.delta!r}")
        if not (self.link_cost >= 0.0 and math.isfinite(self.link_cost)):
            raise ConfigError(f"link_cost must be finite and >= 0, got {self.link_cost!r}")
        if self.payoff.variant == "phi" and self.delta != 1.0:
            # the learning-volume payoff is defined for full relaying only
            raise ConfigError("phi payoff variant requires delta = 1")


@dataclass(frozen=True)
class FirmProfile:
    """One firm's choices and fixed attributes.

    p            probability each of the firm's sigma idea slots is discovered
    q            openness; baseline interaction rate with j is q_i * q_j
    beta         learner-side scaling of the direct-learning probability
    patented     firm holds patents on its own ideas (patents payoff variant)
    public       firm is paid without a uniqueness requirement (public variant)
    sigma        number of own idea slots
    q0, q1       class-directed rates (toward public / toward private partners);
                 when set they replace q on both sides of the interaction
    budget_mode  p is tied to q through p + budget_rate * q * n = 1 and the
                 learning probability is q_i alone (no product with the partner)
    budget_rate  the tying constant
    """

    p: float
    q: float = 0.0
    beta: float = 1.0
    patented: bool = False
    public: bool = False
    sigma: int = 1
    q0: Optional[float] = None
    q1: Optional[float] = None
    budget_mode: bool = False
    budget_rate: Optional[float] = None

    def __post_init__(self):
        if not (0.0 <= self.p < 1.0 or (self.budget_mode and self.p == 1.0)):
            raise ConfigError(f"p must lie in [0, 1), got {self.p!r}")
        if not (0.0 <= self.q <= 1.0):
            raise ConfigError(f"q must lie in [0, 1], got {self.q!r}")
        if not (0.0 < self.beta <= 1.0):
            raise ConfigError(f"beta must lie in (0, 1], got {self.beta!r}")
        if not (isinstance(self.sigma, int) and self.sigma >= 1):
            raise ConfigError(f"sigma must be an integer >= 1, got {self.sigma!r}")
        for name in ("q0", "q1"):
            v = getattr(self, name)
            if v is not None and not (0.0 <= v <= 1.0):
                raise ConfigError(f"{name} must lie in [0, 1], got {v!r}")
        if (self.q0 is None) != (self.q1 is None):
            raise ConfigError("q0 and q1 must be set together")
        if self.budget_mode and self.budget_rate is None:
            raise ConfigError("budget_mode firms need budget_rate")

    @property
    def directed(self) -> bool:
        return self.q0 is not None


def uniform_profiles(n: int, p: float, q: float, **kw) -> list[FirmProfile]:
    prof = FirmProfile(p=p, q=q, **kw)
    return [prof] * n


def budget_profile(world: WorldConfig, q: float, budget_rate: float) -> FirmProfile:
    """Profile on the budget line: p is what remains after q * n interactions."""
    p = 1.0 - budget_rate * q * world.n
    if p < 0.0:
        raise ConfigError(f"budget exceeded: q={q}, rate={budget_rate}, n={world.n}")
    return FirmProfile(p=p, q=q, budget_mode=True, budget_rate=budget_rate)


def validate_profiles(world: WorldConfig, profiles: Sequence[FirmProfile]) -> None:
    """Cross checks that depend on world and profiles together."""
    if len(profiles) != world.n:
        raise ConfigError(f"expected {world.n} profiles, got {len(profiles)}")
    budget_flags = {pr.budget_mode for pr in profiles}
    if budget_flags == {True, False}:
        raise ConfigError("budget_mode must be set for all firms or none")
    for i, pr in enumerate(profiles):
        if pr.budget_mode:
            lhs = pr.p + pr.budget_rate * pr.q * world.n
            if lhs != 1.0:
                raise ConfigError(f"firm {i}: budget identity violated, p + rate*q*n = {lhs!r}")
    if world.payoff.variant != "public" and any(pr.public for pr in profiles):
        raise ConfigError("public firms require the public payoff variant")
    if world.payoff.variant != "patents" and any(pr.patented for pr in profiles):
        raise ConfigError("patented firms require the patents payoff variant")


def with_q(profile: FirmProfile, q: float) -> FirmProfile:
    return replace(profile, q=q)
