"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 no isolated equilibrium.
Reports go to stdout, diagnostics to stderr. JSON reports index roads from 0
as in the input file; the CSV ``road`` column counts from 1.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from . import __version__
from .bounds import empirical_autonomy_ratio, network_asymmetry, price_of_autonomy_bound, xi
from .equilibrium import EquilibriumResult, NoEquilibriumError, enumerate_equilibria, verify_equilibrium
from .fileio import (
    dumps,
    flows_json,
    load_flows,
    load_network,
    load_tolls,
    num,
    pattern_json,
    table_csv,
    tolls_json,
)
from .model import DomainError, FlowProfile, Network, TollScheme, road_latencies
from .social_optimum import count_mixed_roads, optimal_routing
from .tolling import (
    TollSynthesisConfig,
    default_mu,
    default_P,
    parse_grid_spec,
    synthesize_differentiated_tolls,
    undiff_toll_search,
)

EXIT_OK, EXIT_INPUT, EXIT_NO_EQUILIBRIUM = 0, 1, 2


def _rows(network: Network, flow: FlowProfile, tolls: Optional[TollScheme], extra: Optional[dict] = None) -> list[dict]:
    lat = road_latencies(network, flow)
    rows = []
    for i, (h, a) in enumerate(flow.pairs()):
        row = dict(extra or {})
        row.update({
            "road": i + 1,
            "human": num(h),
            "aut": num(a),
            "latency": num(lat[i]),
            "toll_h": num(tolls.human[i]) if tolls else None,
            "toll_a": num(tolls.autonomous[i]) if tolls else None,
        })
        rows.append(row)
    return rows


def _equilibrium_json(network: Network, eq: EquilibriumResult) -> dict:
    return {
        "cost": num(eq.cost),
        "lambda_h": num(eq.lambda_h),
        "lambda_a": num(eq.lambda_a),
        "pattern": pattern_json(eq.pattern),
        "mixed_road_count": count_mixed_roads(eq.flow),
        "flows": flows_json(eq.flow),
        "latencies": [num(x) for x in road_latencies(network, eq.flow)],
    }


def cmd_equilibria(args) -> str:
    network, demand, file_tolls = load_network(args.network)
    tolls = load_tolls(args.tolls) if args.tolls else file_tolls
    if tolls is None:
        tolls = TollScheme.zeros(network.n)
    tolls.check(network)
    report = enumerate_equilibria(network, demand, tolls)
    degenerate = [pattern_json(p) for p in report.degenerate]
    if args.mode in ("worst", "best"):
        if not report.equilibria:
            raise NoEquilibriumError(report)
        if args.mode == "worst":
            eq = max(report.equilibria, key=lambda e: e.cost)
        else:
            eq = report.equilibria[0]
        if args.format == "csv":
            return table_csv(_rows(network, eq.flow, tolls))
        verdict = verify_equilibrium(network, demand, tolls, eq.flow, args.tol)
        out = {"command": "equilibria", "mode": args.mode, **_equilibrium_json(network, eq)}
        out.update({"verified": verdict.ok, "degenerate": degenerate, "patterns_checked": report.patterns_checked})
        return dumps(out)
    if args.format == "csv":
        rows = []
        for j, eq in enumerate(report.equilibria):
            rows.extend(_rows(network, eq.flow, tolls, {"equilibrium": j + 1, "cost": num(eq.cost)}))
        return table_csv(rows, leading=["equilibrium", "cost"])
    return dumps({
        "command": "equilibria",
        "mode": "all",
        "count": len(report.equilibria),
        "equilibria": [_equilibrium_json(network, eq) for eq in report.equilibria],
        "degenerate": degenerate,
        "patterns_checked": report.patterns_checked,
    })


def cmd_optimal(args) -> str:
    network, demand, _ = load_network(args.network)
    opt = optimal_routing(network, demand)
    if args.format == "csv":
        return table_csv(_rows(network, opt.flow, None))
    return dumps({
        "command": "optimal",
        "cost": num(opt.cost),
        "mixed_roads": list(opt.mixed_roads),
        "mixed_road_count": len(opt.mixed_roads),
        "structure_guaranteed": opt.structure_guaranteed,
        "pattern": pattern_json(opt.pattern),
        "multipliers": {"human": num(opt.multipliers[0]), "autonomous": num(opt.multipliers[1])},
        "flows": flows_json(opt.flow),
        "latencies": [num(x) for x in road_latencies(network, opt.flow)],
    })


def _auto_float(text: str) -> Optional[float]:
    if text == "auto":
        return None
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'auto', got {text!r}") from None


def cmd_tolls(args) -> str:
    network, demand, _ = load_network(args.network)
    if args.undiff_grid is not None:
        grid = parse_grid_spec(args.undiff_grid)
        res = undiff_toll_search(network, demand, grid)
        if args.format == "csv":
            worst = max(enumerate_equilibria(network, demand, res.tolls), key=lambda e: e.cost)
            return table_csv(_rows(network, worst.flow, res.tolls))
        return dumps({
            "command": "tolls",
            "mode": "undifferentiated",
            "grid": {"lo": num(grid[0]), "hi": num(grid[1]), "step": num(grid[2])},
            "cost": num(res.cost),
            "tolls": tolls_json(res.tolls),
            "evaluated": res.evaluated,
            "skipped": [[num(x) for x in vec] for vec in res.skipped],
        })

    opt = optimal_routing(network, demand)
    mu = default_mu(network, opt) if args.mu is None else args.mu
    P = default_P(network, mu) if args.P is None else args.P
    tolls = synthesize_differentiated_tolls(network, opt, TollSynthesisConfig(mu, P))
    if args.format == "csv":
        return table_csv(_rows(network, opt.flow, tolls))
    report = enumerate_equilibria(network, demand, tolls)
    deviation = max((abs(e.cost - opt.cost) for e in report.equilibria), default=None)
    verdict = verify_equilibrium(network, demand, tolls, opt.flow, 1e-9)
    return dumps({
        "command": "tolls",
        "mode": "differentiated",
        "mu": num(mu),
        "P": num(P),
        "tolls": tolls_json(tolls),
        "optimum": {
            "cost": num(opt.cost),
            "mixed_roads": list(opt.mixed_roads),
            "flows": flows_json(opt.flow),
            "latencies": [num(x) for x in road_latencies(network, opt.flow)],
        },
        "verification": {
            "optimum_is_equilibrium": verdict.ok,
            "equilibria": [
                {"cost": num(e.cost), "pattern": pattern_json(e.pattern), "flows": flows_json(e.flow)}
                for e in report.equilibria
            ],
            "degenerate": [pattern_json(p) for p in report.degenerate],
            "max_cost_deviation": num(deviation),
            "all_equal_optimum": bool(report.equilibria) and deviation <= 1e-6,
        },
    })


def cmd_bound(args) -> str:
    sigma = args.sigma
    if args.network is not None:
        if args.k is not None:
            raise DomainError("give either --k or a network file, not both")
        network, demand, _ = load_network(args.network)
        k = network_asymmetry(network)
        out = {"command": "bound", "source": "network", "k": num(k), "sigma": sigma}
        # The bound needs every road to congest at least as much under human flow.
        hypothesis = min(r.k for r in network.roads) >= 1
        kk = max(k, 1.0)
        out.update({"xi": num(xi(sigma)), "bound": num(price_of_autonomy_bound(kk, sigma)), "hypothesis_holds": hypothesis})
        if demand.total > 0:
            ratio = empirical_autonomy_ratio(network, demand.total, demand.human / demand.total)
            out["empirical"] = {
                "ratio": num(ratio.ratio),
                "mixed_cost": num(ratio.mixed_cost),
                "human_cost": num(ratio.human_cost),
            }
        return dumps(out)
    if args.k is None:
        raise DomainError("bound needs --k or a network file")
    return dumps({
        "command": "bound",
        "source": "arguments",
        "k": num(args.k),
        "sigma": sigma,
        "xi": num(xi(sigma)),
        "bound": num(price_of_autonomy_bound(args.k, sigma)),
    })


def cmd_verify(args) -> str:
    network, demand, file_tolls = load_network(args.network)
    flow = load_flows(args.flows)
    tolls = load_tolls(args.tolls) if args.tolls else file_tolls
    verdict = verify_equilibrium(network, demand, tolls, flow, args.tol)
    return dumps({
        "command": "verify",
        "ok": verdict.ok,
        "tol": num(args.tol),
        "lambda_h": num(verdict.lambda_h),
        "lambda_a": num(verdict.lambda_a),
        "violations": [
            {"road": v.road, "class": v.vehicle_class, "slack": num(v.slack)}
            for v in verdict.violations
        ],
    })


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixroute",
        description="Equilibria, optimal routing and tolls for mixed-autonomy parallel networks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("equilibria", help="enumerate isolated Wardrop equilibria")
    p.add_argument("network")
    p.add_argument("--tolls", metavar="FILE")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--worst", dest="mode", action="store_const", const="worst")
    mode.add_argument("--best", dest="mode", action="store_const", const="best")
    mode.add_argument("--all", dest="mode", action="store_const", const="all")
    p.set_defaults(mode="all")
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_equilibria)

    p = sub.add_parser("optimal", help="socially optimal routing")
    p.add_argument("network")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_optimal)

    p = sub.add_parser("tolls", help="differentiated toll synthesis or undifferentiated grid search")
    p.add_argument("network")
    p.add_argument("--mu", type=_auto_float, default=None, help="common cost level, or 'auto'")
    p.add_argument("--P", type=_auto_float, default=None, help="prohibitive toll, or 'auto'")
    p.add_argument("--undiff-grid", metavar="LO:HI:STEP")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_tolls)

    p = sub.add_parser("bound", help="price-of-autonomy bound")
    p.add_argument("network", nargs="?")
    p.add_argument("--k", type=float)
    p.add_argument("--sigma", type=int, default=1)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("verify", help="check the Wardrop conditions of a flow")
    p.add_argument("network")
    p.add_argument("--flows", metavar="FILE", required=True)
    p.add_argument("--tolls", metavar="FILE")
    p.add_argument("--tol", type=float, default=1e-7)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        out = args.func(args)
    except NoEquilibriumError as exc:
        print(f"mixroute: {exc}", file=sys.stderr)
        return EXIT_NO_EQUILIBRIUM
    except DomainError as exc:
        print(f"mixroute: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
