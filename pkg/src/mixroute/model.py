"""Network data model for two-class routing on parallel roads.

Every road carries an affine latency that both vehicle classes experience::

    latency(f_h, f_a) = k * a * f_h + a * f_a + t

``a`` is the congestion caused by one unit of autonomous flow, ``k`` scales
that congestion for human-driven flow, and ``t`` is the free-flow latency.
Flows are stored per road as (human, autonomous) pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

CONSERVATION_TOL = 1e-9


class DomainError(ValueError):
    """Raised when an input lies outside the domain of an operation."""


@dataclass(frozen=True)
class Road:
    a: float
    k: float
    t: float = 0.0

    def __post_init__(self):
        for name in ("a", "k", "t"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"road parameter {name} must be finite, got {value!r}")
        if self.a <= 0:
            raise DomainError(f"road congestion coefficient a must be > 0, got {self.a}")
        if self.k <= 0:
            raise DomainError(f"road asymmetry k must be > 0, got {self.k}")
        if self.t < 0:
            raise DomainError(f"free-flow latency t must be >= 0, got {self.t}")

    @classmethod
    def from_coefficients(cls, human: float, autonomous: float, t: float = 0.0) -> "Road":
        """Build a road from its per-class latency slopes.

        ``human * f_h + autonomous * f_a + t`` maps to ``a = autonomous`` and
        ``k = human / autonomous``.
        """
        if autonomous <= 0:
            raise DomainError(f"autonomous slope must be > 0, got {autonomous}")
        return cls(a=float(autonomous), k=float(human) / float(autonomous), t=float(t))

    @property
    def human_slope(self) -> float:
        return self.k * self.a

    @property
    def autonomous_slope(self) -> float:
        return self.a


@dataclass(frozen=True)
class Network:
    roads: tuple[Road, ...]

    def __post_init__(self):
        roads = tuple(self.roads)
        if len(roads) < 1:
            raise DomainError("a network needs at least one road")
        for road in roads:
            if not isinstance(road, Road):
                raise DomainError(f"expected Road, got {type(road).__name__}")
        object.__setattr__(self, "roads", roads)

    def __len__(self) -> int:
        return len(self.roads)

    def __iter__(self):
        return iter(self.roads)

    def __getitem__(self, i: int) -> Road:
        return self.roads[i]

    @property
    def n(self) -> int:
        return len(self.roads)

    @property
    def a(self) -> np.ndarray:
        return np.array([r.a for r in self.roads])

    @property
    def k(self) -> np.ndarray:
        return np.array([r.k for r in self.roads])

    @property
    def t(self) -> np.ndarray:
        return np.array([r.t for r in self.roads])


@dataclass(frozen=True)
class Demand:
    human: float
    autonomous: float

    def __post_init__(self):
        for name in ("human", "autonomous"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise DomainError(f"demand.{name} must be finite and >= 0, got {value!r}")

    @property
    def total(self) -> float:
        return self.human + self.autonomous

    def require_positive(self) -> None:
        if self.human <= 0 and self.autonomous <= 0:
            raise DomainError("at least one demand component must be positive")


@dataclass(frozen=True)
class FlowProfile:
    """Per-road (human, autonomous) flows.

    Only nonnegativity is enforced at construction; conservation against a
    demand is checked by :meth:`validate`.
    """

    human: tuple[float, ...]
    autonomous: tuple[float, ...]

    def __post_init__(self):
        human = tuple(float(x) for x in self.human)
        autonomous = tuple(float(x) for x in self.autonomous)
        if len(human) != len(autonomous):
            raise DomainError(
                f"human and autonomous flow vectors differ in length ({len(human)} vs {len(autonomous)})"
            )
        for x in human + autonomous:
            if not math.isfinite(x):
                raise DomainError(f"flows must be finite, got {x!r}")
            if x < 0:
                raise DomainError(f"flows must be nonnegative, got {x!r}")
        object.__setattr__(self, "human", human)
        object.__setattr__(self, "autonomous", autonomous)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]]) -> "FlowProfile":
        pairs = [tuple(p) for p in pairs]
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    @classmethod
    def zeros(cls, n: int) -> "FlowProfile":
        return cls((0.0,) * n, (0.0,) * n)

    def __len__(self) -> int:
        return len(self.human)

    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.human, self.autonomous))

    def total(self) -> tuple[float, float]:
        return math.fsum(self.human), math.fsum(self.autonomous)

    def distance(self, other: "FlowProfile") -> float:
        """Max-norm distance between two profiles of equal length."""
        if len(self) != len(other):
            raise DomainError("cannot compare flow profiles of different lengths")
        return max(
            max(abs(x - y) for x, y in zip(self.human, other.human)),
            max(abs(x - y) for x, y in zip(self.autonomous, other.autonomous)),
        )

    def support(self, tol: float = CONSERVATION_TOL) -> tuple[frozenset[int], frozenset[int]]:
        return (
            frozenset(i for i, x in enumerate(self.human) if x > tol),
            frozenset(i for i, x in enumerate(self.autonomous) if x > tol),
        )

    def validate(self, network: Network, demand: Demand, tol: float = CONSERVATION_TOL) -> None:
        if len(self) != network.n:
            raise DomainError(f"flow has {len(self)} roads, network has {network.n}")
        fh, fa = self.total()
        if abs(fh - demand.human) > tol:
            raise DomainError(f"human flow sums to {fh}, demand is {demand.human}")
        if abs(fa - demand.autonomous) > tol:
            raise DomainError(f"autonomous flow sums to {fa}, demand is {demand.autonomous}")


@dataclass(frozen=True)
class TollScheme:
    """Per-road, per-class tolls. Negative values are subsidies."""

    human: tuple[float, ...]
    autonomous: tuple[float, ...]

    def __post_init__(self):
        human = tuple(float(x) for x in self.human)
        autonomous = tuple(float(x) for x in self.autonomous)
        if len(human) != len(autonomous):
            raise DomainError("human and autonomous toll vectors differ in length")
        if not all(math.isfinite(x) for x in human + autonomous):
            raise DomainError("tolls must be finite")
        object.__setattr__(self, "human", human)
        object.__setattr__(self, "autonomous", autonomous)

    @classmethod
    def zeros(cls, n: int) -> "TollScheme":
        return cls((0.0,) * n, (0.0,) * n)

    @classmethod
    def undifferentiated(cls, tolls: Sequence[float]) -> "TollScheme":
        return cls(tuple(tolls), tuple(tolls))

    def __len__(self) -> int:
        return len(self.human)

    @property
    def is_undifferentiated(self) -> bool:
        return self.human == self.autonomous

    def shifted(self, c: float) -> "TollScheme":
        return TollScheme(tuple(x + c for x in self.human), tuple(x + c for x in self.autonomous))

    def check(self, network: Network) -> None:
        if len(self) != network.n:
            raise DomainError(f"toll scheme has {len(self)} roads, network has {network.n}")


def latency(road: Road, f_h: float, f_a: float) -> float:
    if f_h < 0 or f_a < 0:
        raise DomainError(f"flows must be nonnegative, got ({f_h}, {f_a})")
    return road.k * road.a * f_h + road.a * f_a + road.t


def class_cost(road: Road, f_h: float, f_a: float, toll: float) -> float:
    """Cost a user experiences on ``road``: latency plus their class's toll."""
    return latency(road, f_h, f_a) + toll


def road_latencies(network: Network, flow: FlowProfile) -> list[float]:
    if len(flow) != network.n:
        raise DomainError(f"flow has {len(flow)} roads, network has {network.n}")
    return [latency(r, h, x) for r, h, x in zip(network.roads, flow.human, flow.autonomous)]


def social_cost(network: Network, flow: FlowProfile) -> float:
    """Total experienced delay; tolls are transfers and do not enter."""
    lat = road_latencies(network, flow)
    return math.fsum((h + x) * ell for h, x, ell in zip(flow.human, flow.autonomous, lat))
