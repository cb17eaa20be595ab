import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mixroute.equilibrium import enumerate_equilibria, verify_equilibrium, worst_equilibrium
from mixroute.instances import two_road_network
from mixroute.model import Demand, DomainError, Network, Road, latency
from mixroute.social_optimum import optimal_routing
from mixroute.tolling import (
    TollSynthesisConfig,
    best_undifferentiated_toll_two_road,
    default_mu,
    default_P,
    design_optimal_tolls,
    parse_grid_spec,
    synthesize_differentiated_tolls,
    undiff_toll_search,
)


def _brute_two_road_min(k, steps=200_000):
    """Minimum of the worst-equilibrium cost curve by dense scan over f in [0, 1]."""
    best = math.inf
    for i in range(steps + 1):
        f = i / steps
        best = min(best, k * f * f + (2 - f) * (1 - f + k))
    return best


class TestSynthesis:
    def test_three_road_toll_entries(self, three_road, three_road_demand):
        opt = optimal_routing(three_road, three_road_demand)
        tolls = synthesize_differentiated_tolls(three_road, opt, TollSynthesisConfig(3.0))
        P = default_P(three_road, 3.0)
        assert tolls.human[1] == pytest.approx(0.42, abs=0.005)
        assert tolls.autonomous[1] == pytest.approx(0.42, abs=0.005)
        assert tolls.human[2] == pytest.approx(0.24, abs=0.005)
        assert tolls.human[0] == P
        assert tolls.autonomous[2] == P
        assert not tolls.is_undifferentiated

    def test_three_road_road1_autonomous_toll_recomputed(self, three_road, three_road_demand):
        opt = optimal_routing(three_road, three_road_demand)
        tolls = synthesize_differentiated_tolls(three_road, opt, TollSynthesisConfig(3.0))
        assert tolls.autonomous[0] == pytest.approx(3.0 - latency(three_road[0], 0.0, opt.flow.autonomous[0]))
        assert tolls.autonomous[0] == pytest.approx(0.85, abs=1e-9)

    def test_mu_equal_to_latency_gives_zero_toll(self, three_road, three_road_demand):
        opt = optimal_routing(three_road, three_road_demand)
        mu = latency(three_road[2], opt.flow.human[2], 0.0)
        tolls = synthesize_differentiated_tolls(three_road, opt, TollSynthesisConfig(mu))
        assert tolls.human[2] == 0.0

    def test_optimum_is_equilibrium_with_cost_mu(self, three_road, three_road_demand):
        for mu in (0.0, 2.0, 3.0, 10.0):
            design = design_optimal_tolls(three_road, three_road_demand, mu=mu)
            verdict = verify_equilibrium(three_road, three_road_demand, design.tolls, design.optimum.flow, 1e-9)
            assert verdict.ok
            assert verdict.lambda_h == pytest.approx(mu, abs=1e-9)
            assert verdict.lambda_a == pytest.approx(mu, abs=1e-9)

    def test_small_mu_gives_subsidies(self, three_road, three_road_demand):
        design = design_optimal_tolls(three_road, three_road_demand, mu=1.0)
        assert min(design.tolls.human) < 0

    def test_P_too_small_rejected(self, three_road, three_road_demand):
        opt = optimal_routing(three_road, three_road_demand)
        with pytest.raises(DomainError, match="2.5"):
            synthesize_differentiated_tolls(three_road, opt, TollSynthesisConfig(3.0, P=1.0))

    def test_unused_roads_get_P_for_both(self):
        # a third road too slow to be used at the optimum
        net = Network((Road(1.0, 2.0, 0.0), Road.from_coefficients(1.0, 2.0, 0.0), Road(1.0, 3.0, 50.0)))
        design = design_optimal_tolls(net, Demand(1.0, 1.0))
        assert design.tolls.human[2] == design.P
        assert design.tolls.autonomous[2] == design.P

    def test_refuses_void_structure(self):
        net = two_road_network(1.0)
        opt = optimal_routing(net, Demand(1.0, 1.0))
        with pytest.raises(DomainError):
            synthesize_differentiated_tolls(net, opt, TollSynthesisConfig(1.0))

    def test_every_equilibrium_is_optimal(self, three_road, three_road_demand):
        design = design_optimal_tolls(three_road, three_road_demand, mu=3.0)
        rep = enumerate_equilibria(three_road, three_road_demand, design.tolls)
        assert rep.equilibria
        for eq in rep:
            assert eq.cost == pytest.approx(design.optimum.cost, abs=1e-6)


class TestDefaults:
    def test_default_mu_three_road(self, three_road, three_road_demand):
        opt = optimal_routing(three_road, three_road_demand)
        assert default_mu(three_road, opt) == pytest.approx(2.76, abs=0.005)

    def test_default_mu_single_road(self):
        net = Network((Road(1.0, 2.0, 1.0),))
        opt = optimal_routing(net, Demand(1.0, 0.5))
        assert default_mu(net, opt) == pytest.approx(latency(net[0], 1.0, 0.5))

    def test_default_mu_two_road(self, two_road_k2, unit_demand):
        assert default_mu(two_road_k2, optimal_routing(two_road_k2, unit_demand)) == pytest.approx(1.0)

    def test_default_mu_makes_tolls_nonnegative(self, three_road, three_road_demand):
        design = design_optimal_tolls(three_road, three_road_demand)
        assert min(design.tolls.human + design.tolls.autonomous) >= 0

    @pytest.mark.parametrize("mu, expected", [(3.0, 3.5), (0.0, 1.0)])
    def test_default_P_three_road(self, three_road, mu, expected):
        assert default_P(three_road, mu) == pytest.approx(expected)

    def test_default_P_two_road(self, two_road_k2):
        assert default_P(two_road_k2, 1.0) == pytest.approx(2.0)


class TestTwoRoad:
    @pytest.mark.parametrize("k, expected", [(2.0, 17 / 4 - 1 / 3), (1.0, 2.0), (3.0, 5.75)])
    def test_closed_form(self, k, expected):
        res = best_undifferentiated_toll_two_road(k)
        assert res.cost == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("k", [1.0, 2.0, 3.0, 7.5])
    def test_against_dense_scan(self, k):
        assert best_undifferentiated_toll_two_road(k).cost == pytest.approx(_brute_two_road_min(k), abs=1e-8)

    def test_strictly_below_worst(self):
        for k in (1.5, 2.0, 3.0, 10.0):
            assert best_undifferentiated_toll_two_road(k).cost < 2 * k

    def test_rejects_small_k(self):
        with pytest.raises(DomainError):
            best_undifferentiated_toll_two_road(0.5)

    def test_toll_induces_the_split(self):
        res = best_undifferentiated_toll_two_road(2.0)
        net = two_road_network(2.0)
        from mixroute.model import TollScheme

        worst = worst_equilibrium(net, Demand(1.0, 1.0), TollScheme.undifferentiated([res.toll_road1, 0.0]))
        assert worst.cost == pytest.approx(res.cost, abs=1e-9)
        assert worst.flow.human[0] == pytest.approx(res.human_on_road1, abs=1e-9)

    @given(st.floats(1.0, 50.0))
    def test_gap_grows_linearly(self, k):
        ratio = best_undifferentiated_toll_two_road(k).cost / 2.0
        assert ratio >= (7 * k + 3) / 8 - 1 / (2 * (k + 1)) - 1e-9
        if k >= 3:
            assert ratio > 2


class TestUndiffSearch:
    def test_two_road_k2(self, two_road_k2, unit_demand):
        res = undiff_toll_search(two_road_k2, unit_demand, (0.0, 3.0, 0.01))
        assert res.cost == pytest.approx(best_undifferentiated_toll_two_road(2.0).cost, abs=0.05)
        assert res.tolls.is_undifferentiated
        assert res.tolls.human[-1] == 0.0

    def test_zero_grid_equals_untolled_worst(self, three_road, three_road_demand):
        res = undiff_toll_search(three_road, three_road_demand, (0.0, 0.0, 1.0))
        assert res.evaluated == 1
        assert res.cost == pytest.approx(worst_equilibrium(three_road, three_road_demand).cost)

    def test_three_road_cannot_reach_optimum(self, three_road, three_road_demand):
        res = undiff_toll_search(three_road, three_road_demand, (-3.0, 3.0, 0.5))
        assert res.cost > 12.92 + 1.0

    def test_too_many_roads(self):
        net = Network(tuple(Road(1.0, 2.0, 0.0) for _ in range(5)))
        with pytest.raises(DomainError):
            undiff_toll_search(net, Demand(1.0, 1.0))

    @pytest.mark.parametrize("spec", ["1:2", "a:b:c", "3:1:0.5", "0:1:0"])
    def test_bad_grid_spec(self, spec):
        with pytest.raises(DomainError):
            parse_grid_spec(spec)
