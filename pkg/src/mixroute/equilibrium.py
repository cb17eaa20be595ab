"""Wardrop equilibria of the two-class parallel-road game by support enumeration.

Fixing which roads each class uses turns the equal-cost conditions into a
square linear system. Solving every pattern and keeping the sign- and
inequality-feasible solutions yields all isolated equilibria. Patterns whose
system is singular but consistent describe a continuum of equilibria; those
are flagged rather than parameterized.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

import numpy as np

from ._linalg import PIVOT_TOL, solve_square
from .model import (
    Demand,
    DomainError,
    FlowProfile,
    Network,
    TollScheme,
    class_cost,
    social_cost,
)

SUPPORT_TOL = 1e-9
DEDUP_TOL = 1e-7
MAX_ROADS = 12


@dataclass(frozen=True)
class SupportPattern:
    """Road sets on which each class carries strictly positive flow."""

    human: frozenset[int]
    autonomous: frozenset[int]

    def __init__(self, human=(), autonomous=()):
        object.__setattr__(self, "human", frozenset(int(i) for i in human))
        object.__setattr__(self, "autonomous", frozenset(int(i) for i in autonomous))

    @property
    def key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return tuple(sorted(self.human)), tuple(sorted(self.autonomous))

    @property
    def shared(self) -> frozenset[int]:
        return self.human & self.autonomous

    @classmethod
    def of(cls, flow: FlowProfile, tol: float = SUPPORT_TOL) -> "SupportPattern":
        h, a = flow.support(tol)
        return cls(h, a)

    def __repr__(self) -> str:
        h, a = self.key
        return f"SupportPattern(human={list(h)}, autonomous={list(a)})"


@dataclass(frozen=True)
class EquilibriumResult:
    flow: FlowProfile
    lambda_h: Optional[float]
    lambda_a: Optional[float]
    pattern: SupportPattern
    cost: float


@dataclass(frozen=True)
class Infeasible:
    pattern: SupportPattern
    reason: str


@dataclass(frozen=True)
class Degenerate:
    pattern: SupportPattern
    min_pivot: float


PatternOutcome = Union[EquilibriumResult, Infeasible, Degenerate]


@dataclass
class EquilibriumSet:
    """All isolated equilibria found, plus the patterns flagged degenerate."""

    equilibria: list[EquilibriumResult]
    degenerate: list[SupportPattern] = field(default_factory=list)
    patterns_checked: int = 0

    def __iter__(self) -> Iterator[EquilibriumResult]:
        return iter(self.equilibria)

    def __len__(self) -> int:
        return len(self.equilibria)

    def __getitem__(self, i: int) -> EquilibriumResult:
        return self.equilibria[i]


class NoEquilibriumError(RuntimeError):
    """No isolated equilibrium exists among the enumerated patterns."""

    def __init__(self, report: EquilibriumSet):
        self.report = report
        super().__init__(
            f"no isolated equilibrium found among {report.patterns_checked} patterns; "
            f"{len(report.degenerate)} degenerate pattern(s): "
            + ", ".join(repr(p) for p in report.degenerate[:10])
        )


class EnumerationCapError(DomainError):
    pass


def _check_pattern(network: Network, demand: Demand, pattern: SupportPattern) -> None:
    n = network.n
    for i in pattern.human | pattern.autonomous:
        if not 0 <= i < n:
            raise DomainError(f"road index {i} out of range for {n} roads")
    if demand.human == 0 and pattern.human:
        raise DomainError("human demand is zero but the pattern routes human flow")
    if demand.autonomous == 0 and pattern.autonomous:
        raise DomainError("autonomous demand is zero but the pattern routes autonomous flow")


def solve_support_pattern(
    network: Network,
    demand: Demand,
    tolls: TollScheme,
    pattern: SupportPattern,
    support_tol: float = SUPPORT_TOL,
    feas_tol: float = 1e-9,
) -> PatternOutcome:
    """Solve the equal-cost system of one support pattern.

    Unknowns are the human flows on ``pattern.human``, the autonomous flows on
    ``pattern.autonomous`` and one common cost per class with positive demand.
    """
    _check_pattern(network, demand, pattern)
    tolls.check(network)
    has_h = demand.human > 0
    has_a = demand.autonomous > 0
    if (has_h and not pattern.human) or (has_a and not pattern.autonomous):
        return Infeasible(pattern, "empty support for a class with positive demand")

    S_h, S_a = pattern.key
    nh, na = len(S_h), len(S_a)
    col_h = {i: c for c, i in enumerate(S_h)}
    col_a = {i: nh + c for c, i in enumerate(S_a)}
    lam_h = nh + na
    lam_a = lam_h + (1 if has_h else 0)
    size = nh + na + int(has_h) + int(has_a)

    A = np.zeros((size, size))
    b = np.zeros(size)
    row = 0
    for cls_support, cls_tolls, lam in ((S_h, tolls.human, lam_h), (S_a, tolls.autonomous, lam_a)):
        for i in cls_support:
            road = network.roads[i]
            if i in col_h:
                A[row, col_h[i]] = road.k * road.a
            if i in col_a:
                A[row, col_a[i]] = road.a
            A[row, lam] = -1.0
            b[row] = -(road.t + cls_tolls[i])
            row += 1
    if has_h:
        A[row, :nh] = 1.0
        b[row] = demand.human
        row += 1
    if has_a:
        A[row, nh:nh + na] = 1.0
        b[row] = demand.autonomous

    sol = solve_square(A, b, PIVOT_TOL)
    if sol.singular:
        if sol.consistent:
            return Degenerate(pattern, sol.min_pivot)
        return Infeasible(pattern, "inconsistent equal-cost conditions")
    x = sol.x

    if np.any(x[:nh + na] <= support_tol):
        return Infeasible(pattern, "nonpositive flow on support")

    n = network.n
    human = [0.0] * n
    autonomous = [0.0] * n
    for i, c in col_h.items():
        human[i] = float(x[c])
    for i, c in col_a.items():
        autonomous[i] = float(x[c])
    # Off-support entries are exactly zero, so this recovers the solved totals.
    flow = FlowProfile(tuple(human), tuple(autonomous))
    lambda_h = float(x[lam_h]) if has_h else None
    lambda_a = float(x[lam_a]) if has_a else None

    for lam, cls_tolls, support, active in (
        (lambda_h, tolls.human, pattern.human, has_h),
        (lambda_a, tolls.autonomous, pattern.autonomous, has_a),
    ):
        if not active:
            continue
        slack_tol = feas_tol * (1.0 + abs(lam))
        for i in range(n):
            if i in support:
                continue
            road = network.roads[i]
            cost_i = class_cost(road, human[i], autonomous[i], cls_tolls[i])
            if cost_i < lam - slack_tol:
                return Infeasible(pattern, f"road {i} is cheaper off-support")

    return EquilibriumResult(flow, lambda_h, lambda_a, pattern, social_cost(network, flow))


def _class_supports(n: int, active: bool) -> list[frozenset[int]]:
    if not active:
        return [frozenset()]
    return [
        frozenset(i for i in range(n) if mask >> i & 1)
        for mask in range(1, 1 << n)
    ]


def iter_patterns(n: int, demand: Demand) -> Iterator[SupportPattern]:
    """All patterns with nonempty supports exactly for the classes with demand."""
    for h, a in itertools.product(
        _class_supports(n, demand.human > 0), _class_supports(n, demand.autonomous > 0)
    ):
        yield SupportPattern(h, a)


def _sort_key(eq: EquilibriumResult):
    return (eq.cost, eq.pattern.key)


def enumerate_equilibria(
    network: Network,
    demand: Demand,
    tolls: Optional[TollScheme] = None,
    max_roads: int = MAX_ROADS,
) -> EquilibriumSet:
    """Every isolated Wardrop equilibrium, cheapest first."""
    demand.require_positive()
    if network.n > max_roads:
        raise EnumerationCapError(
            f"network has {network.n} roads; equilibrium enumeration is capped at {max_roads}"
        )
    if tolls is None:
        tolls = TollScheme.zeros(network.n)
    tolls.check(network)

    found: list[EquilibriumResult] = []
    degenerate: list[SupportPattern] = []
    checked = 0
    for pattern in iter_patterns(network.n, demand):
        checked += 1
        out = solve_support_pattern(network, demand, tolls, pattern)
        if isinstance(out, EquilibriumResult):
            found.append(out)
        elif isinstance(out, Degenerate):
            degenerate.append(pattern)

    found.sort(key=_sort_key)
    kept: list[EquilibriumResult] = []
    for eq in found:
        dup = next((j for j, other in enumerate(kept) if eq.flow.distance(other.flow) < DEDUP_TOL), None)
        if dup is None:
            kept.append(eq)
        elif kept[dup].pattern != SupportPattern.of(kept[dup].flow) and eq.pattern == SupportPattern.of(eq.flow):
            kept[dup] = eq
    kept.sort(key=_sort_key)
    degenerate.sort(key=lambda p: p.key)
    return EquilibriumSet(kept, degenerate, checked)


def worst_equilibrium(network: Network, demand: Demand, tolls: Optional[TollScheme] = None) -> EquilibriumResult:
    report = enumerate_equilibria(network, demand, tolls)
    if not report.equilibria:
        raise NoEquilibriumError(report)
    return max(report.equilibria, key=lambda e: e.cost)


def best_equilibrium(network: Network, demand: Demand, tolls: Optional[TollScheme] = None) -> EquilibriumResult:
    report = enumerate_equilibria(network, demand, tolls)
    if not report.equilibria:
        raise NoEquilibriumError(report)
    return report.equilibria[0]


@dataclass(frozen=True)
class Violation:
    road: Optional[int]  # None marks a demand-conservation residual
    vehicle_class: str
    slack: float


@dataclass(frozen=True)
class Verdict:
    ok: bool
    violations: tuple[Violation, ...]
    lambda_h: Optional[float]
    lambda_a: Optional[float]

    def __bool__(self) -> bool:
        return self.ok


def verify_equilibrium(
    network: Network,
    demand: Demand,
    tolls: Optional[TollScheme],
    flow: FlowProfile,
    tol: float = 1e-7,
) -> Verdict:
    """Check the Wardrop conditions of ``flow`` for both classes.

    Used roads of a class must all cost the class's cheapest used-road cost
    within ``tol``; unused roads must cost no less than it minus ``tol``.
    Demand mismatches larger than ``tol`` are reported as violations with
    ``road=None`` instead of raising, so rounded flows can be
    checked at a loose tolerance.
    """
    if len(flow) != network.n:
        raise DomainError(f"flow has {len(flow)} roads, network has {network.n}")
    if tolls is None:
        tolls = TollScheme.zeros(network.n)
    tolls.check(network)

    violations: list[Violation] = []
    lambdas: dict[str, Optional[float]] = {"human": None, "autonomous": None}
    for name, flows, cls_tolls, total in (
        ("human", flow.human, tolls.human, demand.human),
        ("autonomous", flow.autonomous, tolls.autonomous, demand.autonomous),
    ):
        residual = sum(flows) - total
        if abs(residual) > max(tol, 1e-9):
            violations.append(Violation(None, name, residual))
        if total <= 0:
            continue
        costs = [
            class_cost(r, h, x, c)
            for r, h, x, c in zip(network.roads, flow.human, flow.autonomous, cls_tolls)
        ]
        used = [i for i, f in enumerate(flows) if f > SUPPORT_TOL]
        if not used:
            continue
        lam = min(costs[i] for i in used)
        lambdas[name] = lam
        for i in range(network.n):
            slack = costs[i] - lam
            if i in used and slack > tol:
                violations.append(Violation(i, name, slack))
            elif i not in used and slack < -tol:
                violations.append(Violation(i, name, slack))
    return Verdict(not violations, tuple(violations), lambdas["human"], lambdas["autonomous"])
