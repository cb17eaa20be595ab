"""Bundled example networks and the seeded random-instance generator."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Iterator, Optional

import numpy as np

from .model import Demand, Network, Road


def two_road_network(k: float) -> Network:
    """Two roads: ``k h + a`` and ``h + k a``."""
    return Network((Road(a=1.0, k=k, t=0.0), Road.from_coefficients(1.0, k, 0.0)))


def three_road_network() -> Network:
    """Three roads: ``4h + a + 0.5``, ``2h + a + 1`` and ``h + 3a + 0.5``."""
    return Network((
        Road.from_coefficients(4.0, 1.0, 0.5),
        Road.from_coefficients(2.0, 1.0, 1.0),
        Road.from_coefficients(1.0, 3.0, 0.5),
    ))


THREE_ROAD_DEMAND = Demand(2.625, 2.5)


def bundled_path(name: str):
    return resources.files("mixroute").joinpath("data").joinpath(name)


def bundled_names() -> list[str]:
    return sorted(p.name for p in resources.files("mixroute").joinpath("data").iterdir() if p.name.endswith(".json"))


@dataclass(frozen=True)
class SuiteConfig:
    seed: int
    count: int
    n_min: int
    n_max: int
    param_low: float
    param_high: float
    demand_high: float
    asymmetric_k_low: float


def load_suite_config() -> SuiteConfig:
    raw = json.loads(bundled_path("random_suite.json").read_text())
    return SuiteConfig(**raw)


def random_network(
    rng: np.random.Generator,
    n: int,
    low: float = 0.1,
    high: float = 5.0,
    k_low: Optional[float] = None,
    symmetric_tol: float = 1e-6,
) -> Network:
    """Roads with ``a``, ``k``, ``t`` uniform on ``[low, high]``.

    ``k_low`` overrides the lower end for ``k`` (e.g. 1 to make every road
    congest more under human flow). Draws are repeated until at most one
    road has ``k`` within ``symmetric_tol`` of 1.
    """
    while True:
        a = rng.uniform(low, high, n)
        k = rng.uniform(low if k_low is None else k_low, high, n)
        t = rng.uniform(low, high, n)
        if np.sum(np.abs(k - 1.0) <= symmetric_tol) <= 1:
            return Network(tuple(Road(float(x), float(y), float(z)) for x, y, z in zip(a, k, t)))


def random_demand(rng: np.random.Generator, high: float = 5.0) -> Demand:
    # uniform on (0, high]
    h, a = high - rng.uniform(0.0, high, 2)
    return Demand(float(h), float(a))


def random_suite(
    config: Optional[SuiteConfig] = None,
    count: Optional[int] = None,
    asymmetric: bool = False,
) -> Iterator[tuple[Network, Demand]]:
    """Deterministic stream of (network, demand) instances.

    With ``asymmetric=True`` every road has ``k >= config.asymmetric_k_low``.
    """
    config = config or load_suite_config()
    rng = np.random.default_rng(config.seed + (1 if asymmetric else 0))
    for _ in range(config.count if count is None else count):
        n = int(rng.integers(config.n_min, config.n_max + 1))
        net = random_network(
            rng, n, config.param_low, config.param_high,
            k_low=config.asymmetric_k_low if asymmetric else None,
        )
        yield net, random_demand(rng, config.demand_high)
