"""Socially optimal two-class routing.

The social cost is a nonconvex quadratic: on any pair of roads the Hessian
of the exchange cost is indefinite unless both roads are symmetric. A
minimizer therefore mixes the classes on at most one road (when at most one
road is symmetric), which keeps the set of KKT structures small enough to
enumerate exactly. Each structure fixes the supports and reduces the KKT
stationarity conditions to a square linear system.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Optional

import numpy as np

from ._linalg import PIVOT_TOL, solve_square
from .equilibrium import MAX_ROADS, SUPPORT_TOL, EnumerationCapError, SupportPattern, iter_patterns
from .model import Demand, DomainError, FlowProfile, Network, Road, social_cost

MULTIPLIER_TOL = 1e-8
SYMMETRIC_TOL = 1e-9


@dataclass(frozen=True)
class OptimumResult:
    flow: FlowProfile
    cost: float
    mixed_roads: tuple[int, ...]
    pattern: SupportPattern
    multipliers: tuple[Optional[float], Optional[float]]
    # False when several symmetric roads void the one-mixed-road guarantee.
    structure_guaranteed: bool = True
    candidates_examined: int = 0


def marginal_costs(road: Road, f_h: float, f_a: float) -> tuple[float, float]:
    """Gradient of one road's contribution ``(f_h + f_a) * latency`` to social cost."""
    a, k, t = road.a, road.k, road.t
    return (
        2 * k * a * f_h + a * (1 + k) * f_a + t,
        a * (1 + k) * f_h + 2 * a * f_a + t,
    )


class PairHessian(NamedTuple):
    matrix: np.ndarray
    determinant: float


def road_pair_hessian(road_i: Road, road_j: Road) -> PairHessian:
    """Hessian of the cost of exchanging flow between two roads.

    The determinant is evaluated in exact rational arithmetic on the float
    parameters and rounded once.
    """
    ai, ki = Fraction(road_i.a), Fraction(road_i.k)
    aj, kj = Fraction(road_j.a), Fraction(road_j.k)
    hh = 2 * ai * ki + 2 * aj * kj
    ha = (ki + 1) * ai + (kj + 1) * aj
    aa = 2 * ai + 2 * aj
    det = hh * aa - ha * ha
    matrix = np.array([[float(hh), float(ha)], [float(ha), float(aa)]])
    return PairHessian(matrix, float(det))


def count_mixed_roads(flow: FlowProfile, tol: float = SUPPORT_TOL) -> int:
    return sum(1 for h, a in zip(flow.human, flow.autonomous) if h > tol and a > tol)


def symmetric_roads(network: Network, tol: float = SYMMETRIC_TOL) -> list[int]:
    return [i for i, r in enumerate(network.roads) if abs(r.k - 1.0) <= tol]


def _separated_patterns(n: int, demand: Demand) -> Iterator[tuple[Optional[int], SupportPattern]]:
    """Supports that share at most one road, tagged with that road (or None)."""
    has_h = demand.human > 0
    has_a = demand.autonomous > 0
    if not (has_h and has_a):
        for p in iter_patterns(n, demand):
            yield None, p
        return
    for m in [None, *range(n)]:
        others = [i for i in range(n) if i != m]
        for labels in itertools.product((0, 1, 2), repeat=len(others)):
            h = {i for i, lab in zip(others, labels) if lab == 1}
            a = {i for i, lab in zip(others, labels) if lab == 2}
            if m is not None:
                h.add(m)
                a.add(m)
            if h and a:
                yield m, SupportPattern(h, a)


def _full_patterns(n: int, demand: Demand) -> Iterator[tuple[Optional[int], SupportPattern]]:
    for p in iter_patterns(n, demand):
        shared = sorted(p.shared)
        yield (shared[0] if shared else None), p


class _Candidate(NamedTuple):
    cost: float
    key: tuple
    flow: FlowProfile
    pattern: SupportPattern
    nu_h: Optional[float]
    nu_a: Optional[float]


def _solve_kkt(network: Network, demand: Demand, pattern: SupportPattern) -> Optional[_Candidate]:
    has_h = demand.human > 0
    has_a = demand.autonomous > 0
    S_h, S_a = pattern.key
    nh, na = len(S_h), len(S_a)
    col_h = {i: c for c, i in enumerate(S_h)}
    col_a = {i: nh + c for c, i in enumerate(S_a)}
    nu_h = nh + na
    nu_a = nu_h + (1 if has_h else 0)
    size = nh + na + int(has_h) + int(has_a)

    A = np.zeros((size, size))
    b = np.zeros(size)
    row = 0
    for i in S_h:
        r = network.roads[i]
        A[row, col_h[i]] = 2 * r.k * r.a
        if i in col_a:
            A[row, col_a[i]] = (1 + r.k) * r.a
        A[row, nu_h] = -1.0
        b[row] = -r.t
        row += 1
    for i in S_a:
        r = network.roads[i]
        if i in col_h:
            A[row, col_h[i]] = (1 + r.k) * r.a
        A[row, col_a[i]] = 2 * r.a
        A[row, nu_a] = -1.0
        b[row] = -r.t
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
        return None
    x = sol.x
    if np.any(x[:nh + na] <= SUPPORT_TOL):
        return None

    n = network.n
    human = [0.0] * n
    autonomous = [0.0] * n
    for i, c in col_h.items():
        human[i] = float(x[c])
    for i, c in col_a.items():
        autonomous[i] = float(x[c])
    mult_h = float(x[nu_h]) if has_h else None
    mult_a = float(x[nu_a]) if has_a else None

    for i in range(n):
        gh, ga = marginal_costs(network.roads[i], human[i], autonomous[i])
        if has_h and i not in col_h and gh < mult_h - MULTIPLIER_TOL * (1 + abs(mult_h)):
            return None
        if has_a and i not in col_a and ga < mult_a - MULTIPLIER_TOL * (1 + abs(mult_a)):
            return None

    flow = FlowProfile(tuple(human), tuple(autonomous))
    return _Candidate(social_cost(network, flow), (), flow, pattern, mult_h, mult_a)


def optimal_routing(
    network: Network,
    demand: Demand,
    max_roads: int = MAX_ROADS,
    structure: str = "auto",
) -> OptimumResult:
    """Minimize social cost over all routings of ``demand``.

    ``structure`` selects the candidate set: ``"separated"`` enumerates only
    supports sharing at most one road, ``"full"`` enumerates every support
    pair, and ``"auto"`` uses ``"separated"`` unless two or more roads are
    symmetric (``k == 1``), where the one-mixed-road guarantee does not hold.
    """
    demand.require_positive()
    if network.n > max_roads:
        raise EnumerationCapError(
            f"network has {network.n} roads; optimal routing enumeration is capped at {max_roads}"
        )
    if structure not in ("auto", "separated", "full"):
        raise DomainError(f"unknown structure {structure!r}")
    guaranteed = len(symmetric_roads(network)) <= 1
    if structure == "auto":
        structure = "separated" if guaranteed else "full"
    patterns = _separated_patterns if structure == "separated" else _full_patterns

    best: Optional[_Candidate] = None
    examined = 0
    for m, pattern in patterns(network.n, demand):
        examined += 1
        cand = _solve_kkt(network, demand, pattern)
        if cand is None:
            continue
        cand = cand._replace(key=(-1 if m is None else m, *pattern.key))
        if best is None:
            best = cand
            continue
        tie = 1e-12 * (1.0 + abs(best.cost))
        if cand.cost < best.cost - tie or (abs(cand.cost - best.cost) <= tie and cand.key < best.key):
            best = cand

    if best is None:
        raise RuntimeError("no feasible KKT candidate; inputs violate the solver's assumptions")
    mixed = tuple(i for i, (h, a) in enumerate(best.flow.pairs()) if h > SUPPORT_TOL and a > SUPPORT_TOL)
    return OptimumResult(
        flow=best.flow,
        cost=best.cost,
        mixed_roads=mixed,
        pattern=best.pattern,
        multipliers=(best.nu_h, best.nu_a),
        structure_guaranteed=guaranteed,
        candidates_examined=examined,
    )


class GridTooLargeError(DomainError):
    pass


@dataclass(frozen=True)
class OracleResult:
    flow: FlowProfile
    cost: float
    gap_bound: float
    resolution: float
    grid_points: int


def _compositions(m: int, n: int) -> np.ndarray:
    """All nonnegative integer vectors of length ``n`` summing to ``m``."""
    if n == 1:
        return np.array([[m]])
    bars = np.array(list(itertools.combinations(range(m + n - 1), n - 1)))
    padded = np.hstack([np.full((len(bars), 1), -1), bars, np.full((len(bars), 1), m + n - 1)])
    return np.diff(padded, axis=1) - 1


def _class_grid_size(m: int, n: int, active: bool) -> int:
    return math.comb(m + n - 1, n - 1) if active else 1


def grid_oracle(
    network: Network,
    demand: Demand,
    resolution: float = 0.01,
    max_points: int = 60_000_000,
    chunk: int = 2048,
) -> OracleResult:
    """Brute-force minimum of social cost over a grid of both classes' splits.

    Each class's demand is split among the roads in steps of
    ``resolution * demand``. ``gap_bound`` bounds how far the grid minimum can
    sit above the true minimum: the largest marginal cost reachable within
    the demand box times the L1 distance from any split to the grid.
    """
    demand.require_positive()
    if not 0 < resolution <= 1:
        raise DomainError(f"resolution must lie in (0, 1], got {resolution}")
    n = network.n
    m = max(1, round(1 / resolution))
    has_h = demand.human > 0
    has_a = demand.autonomous > 0
    size_h = _class_grid_size(m, n, has_h)
    size_a = _class_grid_size(m, n, has_a)
    if size_h * size_a > max_points:
        raise GridTooLargeError(
            f"grid would hold {size_h * size_a:.3e} points ({size_h} x {size_a}); limit is {max_points:.3e}"
        )

    a, k, t = network.a, network.k, network.t
    H = _compositions(m, n) * (demand.human / m) if has_h else np.zeros((1, n))
    X = _compositions(m, n) * (demand.autonomous / m) if has_a else np.zeros((1, n))
    q_h = (H * H) @ (k * a) + H @ t
    q_a = (X * X) @ a + X @ t
    cross = X * ((1 + k) * a)

    best_cost = np.inf
    best_idx = (0, 0)
    for start in range(0, len(H), chunk):
        block = q_h[start:start + chunk, None] + q_a[None, :] + H[start:start + chunk] @ cross.T
        j = int(np.argmin(block))
        r, c = divmod(j, block.shape[1])
        if block[r, c] < best_cost:
            best_cost = float(block[r, c])
            best_idx = (start + r, c)

    flow = FlowProfile(tuple(H[best_idx[0]]), tuple(X[best_idx[1]]))
    g_max = max(
        max(marginal_costs(r, demand.human, demand.autonomous)) for r in network.roads
    )
    gap = g_max * 2 * (n - 1) * (demand.human + demand.autonomous) / m
    return OracleResult(flow, social_cost(network, flow), gap, 1 / m, size_h * size_a)
