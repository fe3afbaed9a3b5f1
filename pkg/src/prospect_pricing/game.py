"""Leader-follower pricing game: scenario model, utilities, equilibrium solver.

The provider offers every user the same rate and price and a per-user bandwidth
slice; a user accepts when weighted willingness to pay, benefit times the
(possibly probability-weighted) service guarantee, exceeds the price. The
solver locates the revenue-maximizing pure-strategy equilibrium by scanning
served-set sizes n from large to small: maximize n*(r(b) - c1*b) over rates b
whose n cheapest users fit in the band, then disqualify any n for which a
strictly larger set would also fit at that rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import _search
from .channel import UnattainableGuaranteeError, UserChannel, guarantee_supremum, \
    min_bandwidth, service_guarantee
from .weighting import IDENTITY, WeightingModel, weight

# strict "<" feasibility comparisons carry this relative slack for determinism
FEASIBILITY_SLACK = 1e-9


@dataclass(frozen=True)
class PricingFunction:
    """r(b) = coefficient * (b * 1e-3)^exponent, increasing and concave."""

    coefficient: float
    exponent: float

    def __post_init__(self) -> None:
        if self.coefficient <= 0.0:
            raise ValueError(f"coefficient must be > 0, got {self.coefficient}")
        if not (0.0 < self.exponent <= 1.0):
            raise ValueError(f"exponent must lie in (0, 1], got {self.exponent}")

    def __call__(self, rate_bps: float) -> float:
        if rate_bps == 0.0:
            return 0.0
        return self.coefficient * (rate_bps * 1e-3) ** self.exponent


@dataclass(frozen=True)
class BenefitFunction:
    """h(b) = coefficient * (b * 1e-3)^exponent with h(0) = 0."""

    coefficient: float
    exponent: float

    def __post_init__(self) -> None:
        if self.coefficient <= 0.0:
            raise ValueError(f"coefficient must be > 0, got {self.coefficient}")
        if not (0.0 < self.exponent <= 1.0):
            raise ValueError(f"exponent must lie in (0, 1], got {self.exponent}")

    def __call__(self, rate_bps: float) -> float:
        if rate_bps == 0.0:
            return 0.0
        return self.coefficient * (rate_bps * 1e-3) ** self.exponent


@dataclass(frozen=True)
class CostModel:
    """Provider cost per offered user: c1 per bps of rate plus c3 per Hz allocated."""

    c1: float
    c3: float

    def __post_init__(self) -> None:
        if self.c1 < 0.0 or self.c3 < 0.0:
            raise ValueError("cost coefficients must be >= 0")

    def per_user(self, rate_bps: float, bandwidth_hz: float) -> float:
        return self.c1 * rate_bps + self.c3 * bandwidth_hz


@dataclass(frozen=True)
class Scenario:
    """Users (channel, benefit) plus the shared pricing, cost and band endowment."""

    users: tuple[tuple[UserChannel, BenefitFunction], ...]
    pricing: PricingFunction
    cost: CostModel
    total_bandwidth_hz: float
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if len(self.users) == 0:
            raise ValueError("scenario needs at least one user")
        if self.total_bandwidth_hz <= 0.0:
            raise ValueError("total bandwidth must be > 0")

    @property
    def n_users(self) -> int:
        return len(self.users)

    def channel(self, i: int) -> UserChannel:
        return self.users[i][0]

    def benefit(self, i: int) -> BenefitFunction:
        return self.users[i][1]


@dataclass(frozen=True)
class Offer:
    """Rate, price at that rate, and the per-user bandwidth vector."""

    rate_bps: float
    price: float
    allocation: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.rate_bps < 0.0 or self.price < 0.0:
            raise ValueError("rate and price must be >= 0")
        if any(a < 0.0 for a in self.allocation):
            raise ValueError("allocation entries must be >= 0")

    def validate_against(self, scenario: Scenario) -> None:
        total = sum(self.allocation)
        if total > scenario.total_bandwidth_hz * (1.0 + 1e-9):
            raise ValueError(
                f"allocation sum {total:g} exceeds total bandwidth "
                f"{scenario.total_bandwidth_hz:g}")


@dataclass(frozen=True)
class NashResult:
    rate_bps: float
    served_set: tuple[int, ...]
    allocation: tuple[float, ...]
    price: float
    sp_revenue: float
    per_n_revenues: tuple[float, ...] = field(default=())
    equilibrium: bool = True

    @property
    def n_served(self) -> int:
        return len(self.served_set)


def user_utility(accept_prob: float, offer: Offer, user_index: int,
                 scenario: Scenario, model: WeightingModel = IDENTITY) -> float:
    """accept_prob * (benefit * weighted guarantee - price); declining yields 0."""
    if accept_prob == 0.0:
        return 0.0
    ch, h = scenario.users[user_index]
    guar = service_guarantee(offer.rate_bps, offer.allocation[user_index], ch)
    return accept_prob * (-offer.price + h(offer.rate_bps) * weight(guar, model))


def sp_utility(accept_probs: list[float] | tuple[float, ...], offer: Offer,
               scenario: Scenario) -> float:
    """Expected provider utility: price collected on acceptance, cost paid regardless."""
    if len(accept_probs) != len(offer.allocation):
        raise ValueError("need one acceptance probability per allocated user")
    total = 0.0
    for p, bw in zip(accept_probs, offer.allocation):
        c = scenario.cost.per_user(offer.rate_bps, bw)
        total += p * (offer.price - c) + (1.0 - p) * (-c)
    return total


def min_bandwidth_for_user(rate_bps: float, user_index: int, scenario: Scenario) -> float:
    """Bandwidth where the user is exactly indifferent: guarantee == r(b)/h_i(b)."""
    ch, h = scenario.users[user_index]
    target = scenario.pricing(rate_bps) / h(rate_bps)
    if target >= 1.0:
        raise UnattainableGuaranteeError(rate_bps, target, guarantee_supremum(rate_bps, ch))
    return min_bandwidth(rate_bps, target, ch)


def _requirements(scenario: Scenario, rate_bps: float) -> list[float]:
    """Per-user minimum bandwidths at a rate; inf marks users unservable there."""
    out = []
    for i in range(scenario.n_users):
        try:
            out.append(min_bandwidth_for_user(rate_bps, i, scenario))
        except UnattainableGuaranteeError:
            out.append(math.inf)
    return out


def _n_cheapest_total(scenario: Scenario, rate_bps: float, n: int) -> float:
    reqs = sorted(_requirements(scenario, rate_bps))
    return sum(reqs[:n])


def _feasible(total_required: float, budget: float) -> bool:
    return total_required < budget * (1.0 - FEASIBILITY_SLACK)


def _rate_feasibility_boundary(scenario: Scenario, n: int) -> float | None:
    """Largest rate at which the n cheapest users still fit in the band.

    The summed requirement grows with the rate for increasing r/h ratios, so the
    feasible rates form an interval anchored at 0.
    """
    budget = scenario.total_bandwidth_hz
    lo = 1.0
    if not _feasible(_n_cheapest_total(scenario, lo, n), budget):
        while lo > 1e-9 and not _feasible(_n_cheapest_total(scenario, lo, n), budget):
            lo *= 0.5
        if not _feasible(_n_cheapest_total(scenario, lo, n), budget):
            return None
    hi = lo
    while _feasible(_n_cheapest_total(scenario, hi, n), budget):
        hi *= 2.0
        if hi > 1e18:
            break
    lo, hi = _search.bisect_boundary(
        lambda b: _feasible(_n_cheapest_total(scenario, b, n), budget),
        lo, hi, rel_tol=1e-12)
    return lo


def solve_nash(scenario: Scenario) -> NashResult:
    """Locate the revenue-maximizing pure-strategy equilibrium.

    Scans served-set sizes n from all users down to one. For each n the margin
    n*(r(b) - c1*b) is concave in b and is maximized by golden section over the
    feasible rate interval; an n is disqualified when a larger set also fits at
    its optimal rate, since those users would accept too. Returns a
    no-equilibrium result (equilibrium=False) when every n earns <= 0.
    """
    n_users = scenario.n_users
    budget = scenario.total_bandwidth_hz
    price, c1, c3 = scenario.pricing, scenario.cost.c1, scenario.cost.c3

    best_rates: list[float | None] = [None] * (n_users + 1)
    per_n = [0.0] * (n_users + 1)
    for n in range(n_users, 0, -1):
        boundary = _rate_feasibility_boundary(scenario, n)
        if boundary is None:
            per_n[n] = -math.inf
            continue
        b_star, _ = _search.golden_max(
            lambda b: n * (price(b) - c1 * b), 0.0, boundary, rel_tol=1e-9)
        if b_star <= 0.0 or not _feasible(_n_cheapest_total(scenario, b_star, n), budget):
            # boundary end may sit epsilon outside the strict constraint
            b_star = boundary
        best_rates[n] = b_star
        per_n[n] = n * (price(b_star) - c1 * b_star) - c3 * budget
        if n < n_users and _feasible(_n_cheapest_total(scenario, b_star, n + 1), budget):
            per_n[n] = 0.0  # a larger set accepts at this rate, not an equilibrium

    n_star, best_rev = 0, 0.0
    for n in range(n_users, 0, -1):
        if per_n[n] > best_rev:
            n_star, best_rev = n, per_n[n]
    if n_star == 0:
        return NashResult(rate_bps=0.0, served_set=(), allocation=(0.0,) * n_users,
                          price=0.0, sp_revenue=max(x for x in per_n[1:]),
                          per_n_revenues=tuple(per_n[1:]), equilibrium=False)

    b_star = best_rates[n_star]
    reqs = _requirements(scenario, b_star)
    order = sorted(range(n_users), key=lambda i: (reqs[i], i))
    served = tuple(sorted(order[:n_star]))
    served_total = sum(reqs[i] for i in served)
    # hand the whole band to the served users: every acceptance strict, and the
    # reported revenue (which charges c3 on the full endowment) matches
    # sp_utility on the returned offer exactly
    pad = (budget - served_total) / n_star
    allocation = tuple(reqs[i] + pad if i in served else 0.0 for i in range(n_users))
    return NashResult(
        rate_bps=b_star,
        served_set=served,
        allocation=allocation,
        price=price(b_star),
        sp_revenue=n_star * (price(b_star) - c1 * b_star) - c3 * budget,
        per_n_revenues=tuple(per_n[1:]),
        equilibrium=True)


def brute_force_nash(scenario: Scenario, grid_resolution: int = 2000) -> NashResult:
    """Exhaustive oracle: enumerate served subsets on a dense rate grid.

    Each subset is allocated its per-user minimum bandwidths; the revenue
    maximizer wins. Only for small instances.
    """
    n_users = scenario.n_users
    if n_users > 4:
        raise ValueError(f"brute force limited to 4 users, got {n_users}")
    price, c1, c3 = scenario.pricing, scenario.cost.c1, scenario.cost.c3
    budget = scenario.total_bandwidth_hz

    # profitable rates live below the break-even point r(b) = c1*b
    hi = 1.0
    while price(hi) > c1 * hi and hi < 1e18:
        hi *= 2.0

    subsets = [tuple(i for i in range(n_users) if mask & (1 << i))
               for mask in range(1, 1 << n_users)]
    best_rev, best_n, best_subset, best_rate = -math.inf, 0, (), 0.0
    for k in range(1, grid_resolution + 1):
        b = hi * k / grid_resolution
        reqs = _requirements(scenario, b)
        margin = price(b) - c1 * b
        for subset in subsets:
            if not _feasible(sum(reqs[i] for i in subset), budget):
                continue
            rev = len(subset) * margin - c3 * budget
            if rev > best_rev or (rev == best_rev and len(subset) > best_n):
                best_rev, best_n = rev, len(subset)
                best_subset, best_rate = subset, b

    if best_n == 0 or best_rev <= 0.0:
        return NashResult(rate_bps=0.0, served_set=(), allocation=(0.0,) * n_users,
                          price=0.0, sp_revenue=best_rev,
                          equilibrium=False)
    reqs = _requirements(scenario, best_rate)
    allocation = tuple(reqs[i] if i in best_subset else 0.0 for i in range(n_users))
    return NashResult(rate_bps=best_rate, served_set=best_subset, allocation=allocation,
                      price=price(best_rate), sp_revenue=best_rev, equilibrium=True)
