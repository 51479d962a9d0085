"""Command line front end.

Exit codes: 0 success, 1 negative domain outcome (invalid network,
infeasible or interrupted solve, solver refusal), 2 usage problems,
3 unexpected internal failures.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import gen, lpio, scenario
from .milp import ModelError, build_model, count_profile
from .network import ParseError, parse_network, to_canonical_text
from .oracle import check_feasibility
from .preprocess import canonicalize
from .simplex import NumericalBreakdown
from .solve import (OPTIMAL, BudgetExceeded, MissingSolver, SolveLimits,
                    SolverCrash, option_groups_of, solve_network)


def _read_text(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _limits(args: argparse.Namespace) -> SolveLimits:
    return SolveLimits(max_time=args.time, max_gap=args.gap, budget=args.budget)


def _add_limit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--parts", type=int, default=8,
                   help="mixing grid resolution (default 8)")
    p.add_argument("--time", type=float, default=90.0,
                   help="solve time limit in seconds (default 90)")
    p.add_argument("--gap", type=float, default=0.01,
                   help="acceptable optimality gap (default 0.01)")
    p.add_argument("--budget", type=int, default=1 << 20,
                   help="leaf program budget (default 2^20)")
    p.add_argument("--mode", choices=("exclusive", "all"), default="exclusive",
                   help="how option groups compete (default exclusive)")


def cmd_validate(args: argparse.Namespace) -> int:
    net = parse_network(_read_text(args.network))
    from .network import validate
    problems = validate(net)
    for v in problems:
        print(f"{v.code} {v.element}: {v.message}")
    if problems:
        return 1
    print("ok")
    return 0


def cmd_optimize(args: argparse.Namespace) -> int:
    net = parse_network(_read_text(args.network))
    sol = solve_network(net, parts=args.parts, limits=_limits(args),
                        backend=args.backend, conflict_mode=args.mode,
                        entry_limits=not args.no_entry_limits,
                        exit_limits=not args.no_exit_limits)
    _emit(sol.to_text(), args.output)
    return 0 if sol.status == OPTIMAL else 1


def cmd_check(args: argparse.Namespace) -> int:
    net = parse_network(_read_text(args.network))
    flows = json.loads(_read_text(args.flows))
    if isinstance(flows, dict) and isinstance(flows.get("flows"), dict):
        flows = flows["flows"]
    if not isinstance(flows, dict):
        raise ParseError("flows file must be a JSON object of edge: value")
    try:
        flows = {k: float(v) for k, v in flows.items()}
    except (TypeError, ValueError) as exc:
        raise ParseError(f"flows file has a non-numeric value: {exc}") from exc
    report = check_feasibility(net, flows, mu=args.mu)
    _emit(json.dumps(report.as_obj(), indent=2, sort_keys=True) + "\n", args.output)
    return 0 if report.feasible else 1


def cmd_export_lp(args: argparse.Namespace) -> int:
    net = parse_network(_read_text(args.network))
    canon = canonicalize(net)
    model = build_model(canon.net, parts=args.parts,
                        option_groups=option_groups_of(canon.net) or None,
                        conflict_mode=args.mode)
    _emit(lpio.export_lp(model), args.output)
    return 0


def cmd_profile(args: argparse.Namespace) -> int:
    net = parse_network(_read_text(args.network))
    canon = canonicalize(net)
    model = build_model(canon.net, parts=args.parts,
                        option_groups=option_groups_of(canon.net) or None,
                        conflict_mode=args.mode)
    _emit(json.dumps(count_profile(model), indent=2, sort_keys=True) + "\n",
          args.output)
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    net = gen.generate(args.shape, args.seed)
    _emit(to_canonical_text(net), args.output)
    return 0


def cmd_trials(args: argparse.Namespace) -> int:
    net = parse_network(_read_text(args.network))
    config = scenario.TrialConfig.from_obj(json.loads(_read_text(args.config)))
    report = scenario.run_trials(net, config, jobs=args.jobs)
    _emit(scenario.report_text(report), args.output)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    base = parse_network(_read_text(args.base))
    variant = parse_network(_read_text(args.variant))
    report = scenario.compare_networks(base, variant, parts=args.parts,
                                       limits=_limits(args))
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.output)
    ok = report["base"]["status"] == OPTIMAL and report["variant"]["status"] == OPTIMAL
    return 0 if ok else 1


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(args.store), host=args.host, port=args.port,
                log_level="warning")
    return 0


def cmd_lp_solve(args: argparse.Namespace) -> int:
    prob = lpio.parse_lp(_read_text(args.model))
    status, objective, gap, values = lpio.solve_problem(
        prob, max_time=args.time, budget=args.budget)
    with open(args.solution, "w") as fh:
        fh.write(lpio.write_solution(status, objective, gap, values))
    print(f"{status}" + (f" objective {objective}" if objective is not None else ""))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="waternet",
        description="Optimize flow allocation in water process networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="structural checks on a network file")
    p.add_argument("network")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("optimize", help="solve a network and print the solution")
    p.add_argument("network")
    p.add_argument("-o", "--output")
    p.add_argument("--backend", choices=("exact", "external"), default="exact")
    p.add_argument("--no-entry-limits", action="store_true",
                   help="drop inlet quality bounds from the model")
    p.add_argument("--no-exit-limits", action="store_true",
                   help="drop outlet quality bounds from the model")
    _add_limit_flags(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("check", help="test a flow assignment for feasibility")
    p.add_argument("network")
    p.add_argument("flows")
    p.add_argument("-o", "--output")
    p.add_argument("--mu", type=float, default=1e-3,
                   help="minimum flow on active edges (default 1e-3)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("export-lp", help="write the model in LP text form")
    p.add_argument("network")
    p.add_argument("-o", "--output")
    _add_limit_flags(p)
    p.set_defaults(func=cmd_export_lp)

    p = sub.add_parser("profile", help="report model size counts")
    p.add_argument("network")
    p.add_argument("-o", "--output")
    _add_limit_flags(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("gen", help="generate a named example network")
    p.add_argument("--shape", required=True, choices=sorted(gen.SHAPES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("trials", help="randomized scenario study")
    p.add_argument("network")
    p.add_argument("config")
    p.add_argument("-o", "--output")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_trials)

    p = sub.add_parser("compare", help="KPI deltas between two layouts")
    p.add_argument("base")
    p.add_argument("variant")
    p.add_argument("-o", "--output")
    _add_limit_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--store", default="./waternet-store")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("lp-solve", help="solve an LP text file (small models)")
    p.add_argument("model")
    p.add_argument("solution")
    p.add_argument("--gap", type=float, default=0.01)
    p.add_argument("--time", type=float, default=90.0)
    p.add_argument("--budget", type=int, default=1 << 20)
    p.set_defaults(func=cmd_lp_solve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ModelError, BudgetExceeded, MissingSolver, SolverCrash,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalBreakdown as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
