from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixroute.equilibrium import EnumerationCapError, best_equilibrium
from mixroute.instances import two_road_network
from mixroute.model import Demand, FlowProfile, Network, Road, latency, social_cost
from mixroute.social_optimum import (
    GridTooLargeError,
    count_mixed_roads,
    grid_oracle,
    marginal_costs,
    optimal_routing,
    road_pair_hessian,
)

from conftest import ROUNDED_OPT, KNOWN_WORST

param = st.floats(0.1, 5.0)


def _exact_det_formula(ri, rj):
    ai, ki, aj, kj = (Fraction(x) for x in (ri.a, ri.k, rj.a, rj.k))
    return -((ai * (ki - 1) + aj * (kj - 1)) ** 2)


def _fd_gradient(net, flow, i, h=1e-6):
    def cost_at(dh, da):
        hum = list(flow.human)
        aut = list(flow.autonomous)
        hum[i] += dh
        aut[i] += da
        return social_cost(net, FlowProfile(tuple(hum), tuple(aut)))

    return (
        (cost_at(h, 0) - cost_at(-h, 0)) / (2 * h),
        (cost_at(0, h) - cost_at(0, -h)) / (2 * h),
    )


class TestMarginalCosts:
    @pytest.mark.parametrize(
        "road, fh, fa, expected",
        [
            (Road(1, 1, 0), 1.0, 0.0, (2.0, 2.0)),
            (Road(1, 4, 0.5), 0.0, 0.0, (0.5, 0.5)),
            (Road(1, 2, 1), 0.5, 0.25, (3.75, 3.0)),
        ],
    )
    def test_examples(self, road, fh, fa, expected):
        assert marginal_costs(road, fh, fa) == pytest.approx(expected, abs=1e-12)

    def test_matches_finite_differences_example(self):
        net = Network((Road(1, 2, 1),))
        fd = _fd_gradient(net, FlowProfile((0.5,), (0.25,)), 0)
        assert fd == pytest.approx((3.75, 3.0), abs=1e-5)

    @given(param, param, st.floats(0, 5), st.floats(0.01, 5), st.floats(0.01, 5))
    def test_gradient_check(self, a, k, t, fh, fa):
        road = Road(a, k, t)
        net = Network((road,))
        fd = _fd_gradient(net, FlowProfile((fh,), (fa,)), 0)
        assert marginal_costs(road, fh, fa) == pytest.approx(fd, abs=1e-5)


class TestHessian:
    def test_symmetric_pair(self):
        hess = road_pair_hessian(Road(1, 1, 0), Road(1, 1, 0))
        assert hess.determinant == 0.0

    def test_mixed_pair(self):
        hess = road_pair_hessian(Road(1, 2, 0), Road(1, 1, 0))
        assert hess.determinant == pytest.approx(-1.0, abs=1e-12)
        assert np.linalg.det(hess.matrix) == pytest.approx(-1.0, abs=1e-12)

    def test_explicit_matrix(self):
        hess = road_pair_hessian(Road(1, 4, 0), Road(1, 2, 0))
        np.testing.assert_allclose(hess.matrix, [[12.0, 8.0], [8.0, 4.0]])
        assert hess.determinant == pytest.approx(48.0 - 64.0, abs=1e-12)
        assert hess.determinant == pytest.approx(float(_exact_det_formula(Road(1, 4, 0), Road(1, 2, 0))), abs=1e-12)

    @given(param, param, param, param)
    def test_determinant_identity(self, ai, ki, aj, kj):
        ri, rj = Road(ai, ki, 0), Road(aj, kj, 0)
        det = road_pair_hessian(ri, rj).determinant
        assert abs(det - float(_exact_det_formula(ri, rj))) <= 1e-12


class TestOptimalRouting:
    @pytest.mark.parametrize("k", [1.0, 1.5, 2.0, 4.0])
    def test_two_road(self, k):
        opt = optimal_routing(two_road_network(k), Demand(1.0, 1.0))
        assert opt.cost == pytest.approx(2.0, abs=1e-12)
        if k > 1:
            assert opt.flow.autonomous == pytest.approx((1.0, 0.0))
            assert opt.flow.human == pytest.approx((0.0, 1.0))

    def test_two_road_symmetric_case_voids_guarantee(self):
        opt = optimal_routing(two_road_network(1.0), Demand(1.0, 1.0))
        assert not opt.structure_guaranteed

    def test_three_road(self, three_road, three_road_demand):
        opt = optimal_routing(three_road, three_road_demand)
        assert opt.cost == pytest.approx(12.92, abs=0.05)
        assert opt.flow.human[0] == 0.0 and opt.flow.autonomous[0] > 0
        assert opt.flow.autonomous[2] == 0.0 and opt.flow.human[2] > 0
        assert opt.mixed_roads == (1,)
        assert opt.flow.distance(ROUNDED_OPT) < 0.01
        # stationarity: equal marginal cost on every used road of each class
        nu_h, nu_a = opt.multipliers
        for i in (1, 2):
            assert marginal_costs(three_road[i], opt.flow.human[i], opt.flow.autonomous[i])[0] == pytest.approx(nu_h)
        for i in (0, 1):
            assert marginal_costs(three_road[i], opt.flow.human[i], opt.flow.autonomous[i])[1] == pytest.approx(nu_a)

    def test_three_road_recomputed_road1(self, three_road, three_road_demand):
        opt = optimal_routing(three_road, three_road_demand)
        road1 = latency(three_road[0], opt.flow.human[0], opt.flow.autonomous[0])
        # the latency function gives 2.15 at 1.65 autonomous flow, not 1.67
        assert road1 == pytest.approx(2.15, abs=1e-9)

    def test_single_road(self):
        net = Network((Road(1.0, 2.0, 1.0),))
        opt = optimal_routing(net, Demand(1.0, 0.5))
        assert (opt.flow.human[0], opt.flow.autonomous[0]) == pytest.approx((1.0, 0.5), abs=1e-12)
        assert opt.cost == pytest.approx(1.5 * latency(net[0], 1.0, 0.5))

    def test_single_class(self, three_road):
        opt = optimal_routing(three_road, Demand(2.0, 0.0))
        assert opt.multipliers[1] is None
        assert sum(opt.flow.human) == pytest.approx(2.0)

    def test_full_structure_agrees(self, three_road, three_road_demand):
        pruned = optimal_routing(three_road, three_road_demand)
        full = optimal_routing(three_road, three_road_demand, structure="full")
        assert full.cost == pytest.approx(pruned.cost, abs=1e-12)
        assert full.candidates_examined > pruned.candidates_examined

    def test_cap(self):
        net = Network(tuple(Road(1.0, 2.0, 0.0) for _ in range(13)))
        with pytest.raises(EnumerationCapError):
            optimal_routing(net, Demand(1.0, 1.0))

    def test_beats_best_equilibrium(self, three_road, three_road_demand):
        assert optimal_routing(three_road, three_road_demand).cost <= best_equilibrium(three_road, three_road_demand).cost + 1e-9


class TestCountMixed:
    def test_examples(self):
        assert count_mixed_roads(ROUNDED_OPT, 1e-9) == 1
        assert count_mixed_roads(KNOWN_WORST, 1e-9) == 1
        assert count_mixed_roads(FlowProfile.zeros(3)) == 0


class TestGridOracle:
    def test_two_road(self, two_road_k2, unit_demand):
        res = grid_oracle(two_road_k2, unit_demand, 0.01)
        assert res.cost == pytest.approx(2.0, abs=0.05)

    def test_three_road(self, three_road, three_road_demand):
        res = grid_oracle(three_road, three_road_demand, 0.01)
        assert res.cost == pytest.approx(12.92, abs=0.1)
        opt = optimal_routing(three_road, three_road_demand)
        assert opt.cost - 1e-9 <= res.cost <= opt.cost + res.gap_bound

    def test_single_road_exact(self):
        net = Network((Road(1.0, 2.0, 1.0),))
        res = grid_oracle(net, Demand(1.0, 0.5))
        assert res.cost == pytest.approx(1.5 * latency(net[0], 1.0, 0.5), abs=1e-12)
        assert res.grid_points == 1

    def test_too_large(self):
        net = Network(tuple(Road(1.0, 2.0, 0.0) for _ in range(4)))
        with pytest.raises(GridTooLargeError, match="points"):
            grid_oracle(net, Demand(1.0, 1.0), 0.01)
