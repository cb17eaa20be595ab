"""Price-of-autonomy bound and the empirical ratio it bounds.

For affine roads the per-road asymmetry is the ratio of the human to the
autonomous latency slope, which is exactly the road's ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .equilibrium import best_equilibrium, worst_equilibrium
from .model import Demand, DomainError, Network


def xi(sigma: float) -> float:
    if not math.isfinite(sigma) or sigma < 1:
        raise DomainError(f"sigma must be >= 1, got {sigma}")
    return sigma * (sigma + 1) ** (-(sigma + 1) / sigma)


def price_of_autonomy_bound(k: float, sigma: float = 1) -> float:
    """Upper bound ``k**sigma / (1 - xi(sigma))`` on the worst mixed-equilibrium cost
    relative to the all-human equilibrium cost at the same total demand."""
    if not math.isfinite(k) or k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    return k ** sigma / (1 - xi(sigma))


def network_asymmetry(network: Network) -> float:
    return max(r.k for r in network.roads)


@dataclass(frozen=True)
class AutonomyRatio:
    ratio: float
    mixed_cost: float
    human_cost: float


def empirical_autonomy_ratio(network: Network, total_demand: float, human_fraction: float) -> AutonomyRatio:
    """Worst mixed equilibrium cost over the all-human equilibrium cost.

    The mixed scenario splits ``total_demand`` into ``human_fraction`` human
    and the remainder autonomous flow.
    """
    if not total_demand > 0:
        raise DomainError(f"total demand must be positive, got {total_demand}")
    if not 0 <= human_fraction <= 1:
        raise DomainError(f"human fraction must lie in [0, 1], got {human_fraction}")
    # Single-class equilibrium costs are unique, so best == worst there.
    human_only = best_equilibrium(network, Demand(total_demand, 0.0))
    human = human_fraction * total_demand
    mixed = worst_equilibrium(network, Demand(human, total_demand - human))
    return AutonomyRatio(mixed.cost / human_only.cost, mixed.cost, human_only.cost)
