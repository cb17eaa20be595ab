"""Toll design for mixed-autonomy parallel networks.

Differentiated tolls keep each class off the roads it does not use in a
chosen optimal routing (prohibitive toll ``P``) and equalize the experienced
cost of every road it does use to a common level ``mu``. Undifferentiated
tolls, where both classes pay the same amount, are searched on a grid.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .equilibrium import SUPPORT_TOL, NoEquilibriumError, enumerate_equilibria
from .model import Demand, DomainError, Network, TollScheme, latency
from .social_optimum import OptimumResult, optimal_routing


@dataclass(frozen=True)
class TollSynthesisConfig:
    mu: float
    P: Optional[float] = None

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise DomainError(f"mu must be finite, got {self.mu!r}")
        if self.P is not None and not math.isfinite(self.P):
            raise DomainError(f"P must be finite, got {self.P!r}")


def default_mu(network: Network, optimum: OptimumResult) -> float:
    """Largest latency among the roads the optimum uses.

    With this choice every non-prohibitive toll is nonnegative.
    """
    flow = optimum.flow
    used = [
        latency(r, h, a)
        for r, h, a in zip(network.roads, flow.human, flow.autonomous)
        if h + a > SUPPORT_TOL
    ]
    return max(used)


def minimum_P(network: Network, mu: float) -> float:
    return mu - min(r.t for r in network.roads)


def default_P(network: Network, mu: float) -> float:
    """A prohibitive toll: any P-tolled road costs more than ``mu`` even when empty."""
    return max(0.0, minimum_P(network, mu)) + 1.0


def synthesize_differentiated_tolls(
    network: Network, optimum: OptimumResult, config: TollSynthesisConfig
) -> TollScheme:
    """Per-class tolls under which ``optimum.flow`` is an equilibrium with common cost ``mu``.

    Roads without human flow in the optimum charge humans ``P``; roads without
    autonomous flow charge autonomous vehicles ``P``. Empty roads charge both.
    Every other entry is ``mu`` minus the road's latency at the optimum.
    """
    if len(optimum.flow) != network.n:
        raise DomainError("optimum does not belong to this network")
    if not optimum.structure_guaranteed:
        raise DomainError(
            "more than one road has k == 1; toll synthesis needs at most one symmetric road"
        )
    mixed = [i for i, (h, a) in enumerate(optimum.flow.pairs()) if h > SUPPORT_TOL and a > SUPPORT_TOL]
    if len(mixed) > 1:
        raise DomainError(f"optimum mixes classes on {len(mixed)} roads; at most one is allowed")

    mu = config.mu
    P = config.P
    if P is None:
        P = default_P(network, mu)
    elif P < minimum_P(network, mu):
        raise DomainError(
            f"P = {P} is too small; it must be at least {minimum_P(network, mu)} (mu - min t)"
        )

    tau_h = []
    tau_a = []
    for road, h, a in zip(network.roads, optimum.flow.human, optimum.flow.autonomous):
        level = mu - latency(road, h, a)
        tau_h.append(P if h <= SUPPORT_TOL else level)
        tau_a.append(P if a <= SUPPORT_TOL else level)
    return TollScheme(tuple(tau_h), tuple(tau_a))


@dataclass(frozen=True)
class TollDesign:
    tolls: TollScheme
    optimum: OptimumResult
    mu: float
    P: float


def design_optimal_tolls(
    network: Network,
    demand: Demand,
    mu: Optional[float] = None,
    P: Optional[float] = None,
) -> TollDesign:
    """Optimal routing plus its differentiated tolls; ``None`` picks defaults."""
    optimum = optimal_routing(network, demand)
    if mu is None:
        mu = default_mu(network, optimum)
    if P is None:
        P = default_P(network, mu)
    tolls = synthesize_differentiated_tolls(network, optimum, TollSynthesisConfig(mu, P))
    return TollDesign(tolls, optimum, mu, P)


@dataclass(frozen=True)
class TwoRoadTollResult:
    human_on_road1: float
    toll_road1: float
    cost: float
    closed_form: float


def best_undifferentiated_toll_two_road(k: float) -> TwoRoadTollResult:
    """Best single toll on the two-road network ``k h + a`` / ``h + k a`` with unit demands.

    Under a toll on road 1 the worst equilibrium keeps only humans on road 1
    and sends everything else to road 2, so the cost as a function of the
    human flow on road 1 is the quadratic ``k f^2 + (2 - f)(1 - f + k)``.
    The toll that induces split ``f`` equalizes human costs:
    ``k f + toll = (1 - f) + k``.
    """
    if not math.isfinite(k) or k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    f = (k + 3) / (2 * (k + 1))
    cost = k * f * f + (2 - f) * (1 - f + k)
    closed = (7 * k + 3) / 4 - 1 / (k + 1)
    if not math.isclose(cost, closed, rel_tol=1e-12, abs_tol=1e-12):
        raise ArithmeticError(f"quadratic minimum {cost} disagrees with closed form {closed}")
    toll = (1 + k) * (1 - f)
    return TwoRoadTollResult(f, toll, cost, closed)


def parse_grid_spec(spec: str) -> tuple[float, float, float]:
    """Parse ``"lo:hi:step"``."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise DomainError(f"grid spec must look like lo:hi:step, got {spec!r}")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError as exc:
        raise DomainError(f"bad grid spec {spec!r}: {exc}") from None
    if hi < lo:
        raise DomainError(f"grid upper bound {hi} is below lower bound {lo}")
    if step <= 0 and hi > lo:
        raise DomainError(f"grid step must be positive, got {step}")
    return lo, hi, step


def _grid_values(lo: float, hi: float, step: float) -> np.ndarray:
    if hi == lo:
        return np.array([lo])
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


@dataclass(frozen=True)
class UndiffSearchResult:
    tolls: TollScheme
    cost: float
    evaluated: int
    skipped: tuple[tuple[float, ...], ...] = field(default=())


def undiff_toll_search(
    network: Network,
    demand: Demand,
    grid: tuple[float, float, float] = (0.0, 3.0, 0.01),
    max_roads: int = 4,
) -> UndiffSearchResult:
    """Minimize the worst-equilibrium cost over undifferentiated tolls on a grid.

    The last road's toll is pinned to zero; only toll differences between
    roads affect equilibria on a parallel network. Grid points with no
    isolated equilibrium are skipped and listed in ``skipped``.
    """
    if network.n > max_roads:
        raise DomainError(f"undifferentiated toll search is limited to {max_roads} roads, got {network.n}")
    values = _grid_values(*grid)
    best_key = None
    best: Optional[tuple[TollScheme, float]] = None
    skipped = []
    evaluated = 0
    for combo in itertools.product(values, repeat=network.n - 1):
        vec = tuple(float(v) for v in combo) + (0.0,)
        tolls = TollScheme.undifferentiated(vec)
        evaluated += 1
        report = enumerate_equilibria(network, demand, tolls)
        if not report.equilibria:
            skipped.append(vec)
            continue
        worst = max(e.cost for e in report.equilibria)
        key = (worst, vec)
        if best_key is None or key < best_key:
            best_key = key
            best = (tolls, worst)
    if best is None:
        raise NoEquilibriumError(report)
    return UndiffSearchResult(best[0], best[1], evaluated, tuple(skipped))

