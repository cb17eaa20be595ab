"""Two-class (human-driven / autonomous) routing on parallel roads with affine latencies."""

from .bounds import AutonomyRatio, empirical_autonomy_ratio, network_asymmetry, price_of_autonomy_bound, xi
from .equilibrium import (
    Degenerate,
    EnumerationCapError,
    EquilibriumResult,
    EquilibriumSet,
    Infeasible,
    NoEquilibriumError,
    SupportPattern,
    Verdict,
    Violation,
    best_equilibrium,
    enumerate_equilibria,
    solve_support_pattern,
    verify_equilibrium,
    worst_equilibrium,
)
from .model import (
    Demand,
    DomainError,
    FlowProfile,
    Network,
    Road,
    TollScheme,
    class_cost,
    latency,
    road_latencies,
    social_cost,
)
from .social_optimum import (
    GridTooLargeError,
    OptimumResult,
    OracleResult,
    count_mixed_roads,
    grid_oracle,
    marginal_costs,
    optimal_routing,
    road_pair_hessian,
)
from .tolling import (
    TollDesign,
    TollSynthesisConfig,
    best_undifferentiated_toll_two_road,
    default_mu,
    default_P,
    design_optimal_tolls,
    synthesize_differentiated_tolls,
    undiff_toll_search,
)

__version__ = "0.1.0"
