"""Command line entry point: ``bodt {gen,plan,simulate,sweep,oracle}``.

Exit status is 0 on success, 2 when the requested plan is infeasible and 1 on
any other error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .baselines import centralised_plan, round_robin_plan
from .generate import GenParams, gen_scenario
from .model import Budget, InfeasibleBudgetError, dumps_scenario
from .oracle import oracle_optimal
from .planner import find_plan
from .serialize import (
    plan_from_dict,
    plan_to_dict,
    read_json,
    read_scenario,
    sim_config_from_dict,
    write_sim_result,
)
from .simulator import SimConfig, simulate
from .sweep import (
    APPROACHES,
    CENTRALISED,
    DEFAULT_SWEEP_CONFIG,
    DEFAULT_TB_VALUES,
    HEURISTIC,
    emit_report,
    format_csv,
    format_summary,
    run_sweep,
)
from .validation import check_budget

log = logging.getLogger("bodt")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def cmd_gen(args: argparse.Namespace) -> int:
    doc = read_json(args.params) if args.params else {}
    if args.seed is not None:
        doc["seed"] = args.seed
    _emit(dumps_scenario(gen_scenario(GenParams.from_dict(doc))), args.output)
    return EXIT_OK


def cmd_plan(args: argparse.Namespace) -> int:
    scenario = read_scenario(args.scenario)
    budget = check_budget(args.tb_b, args.money, scenario.cost_model)
    if args.approach == HEURISTIC:
        outcome = find_plan(scenario, budget)
        reason = outcome.reason.value if outcome.reason else None
        doc = plan_to_dict(outcome.plan, scenario, reason, HEURISTIC)
        if not outcome.feasible:
            doc["detail"] = outcome.detail
        _emit(_dump(doc), args.output)
        return EXIT_OK if outcome.feasible else EXIT_INFEASIBLE
    n_vms = args.n_vms
    if n_vms is None:
        outcome = find_plan(scenario, budget)
        n_vms = len(outcome.plan.vms) if outcome.feasible else budget.tb_b
    build = centralised_plan if args.approach == CENTRALISED else round_robin_plan
    plan = build(scenario, n_vms)
    doc = plan_to_dict(plan, scenario, approach=args.approach)
    within = doc["total_blocks"] <= budget.tb_b
    doc["within_budget"] = within
    _emit(_dump(doc), args.output)
    return EXIT_OK if within else EXIT_INFEASIBLE


def _sim_config(path: str | None, default: SimConfig) -> SimConfig:
    return sim_config_from_dict(read_json(path)) if path else default


def cmd_simulate(args: argparse.Namespace) -> int:
    scenario = read_scenario(args.scenario)
    plan = plan_from_dict(read_json(args.plan))
    if plan is None:
        log.error("plan file %s holds an infeasible outcome", args.plan)
        return EXIT_INFEASIBLE
    config = _sim_config(args.config, SimConfig())
    if args.no_reassign:
        config = replace(config, reassignment_enabled=False)
    result = simulate(plan, scenario, config)
    if args.output:
        write_sim_result(result, args.output, args.events)
    else:
        sys.stdout.write(_dump(result.to_dict()))
        if args.events:
            Path(args.events).write_text(result.events_csv())
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    scenario = read_scenario(args.scenario)
    config = _sim_config(args.config, DEFAULT_SWEEP_CONFIG)
    report = run_sweep(scenario, args.tb_b, args.approaches, config, args.repetitions)
    if args.summary:
        emit_report(report, args.summary, "text")
    if args.output:
        emit_report(report, args.output, "csv")
    else:
        sys.stdout.write(format_csv(report))
    if not args.summary and not args.output:
        sys.stderr.write(format_summary(report))
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    scenario = read_scenario(args.scenario)
    result = oracle_optimal(scenario, Budget(args.tb_b))
    doc = {
        "feasible": result.feasible,
        "makespan": result.makespan,
        "total_blocks": result.total_blocks,
        "groups": [{"location": loc, "tasks": list(ts)} for loc, ts in result.groups],
        "explored": result.explored,
    }
    _emit(_dump(doc), args.output)
    return EXIT_OK if result.feasible else EXIT_INFEASIBLE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bodt", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log debug output to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic scenario from a GenParams JSON file")
    p.add_argument("params", nargs="?", help="GenParams JSON file (defaults used when omitted)")
    p.add_argument("--seed", type=int, help="override the seed in the params file")
    p.add_argument("-o", "--output", help="scenario JSON destination (stdout by default)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("plan", help="build a plan for a scenario under a budget")
    p.add_argument("scenario", help="scenario JSON file")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--tb-b", type=int, help="allowed number of billing blocks")
    g.add_argument("--money", type=float, help="budget in currency, converted with block_price")
    p.add_argument("--approach", choices=APPROACHES, default=HEURISTIC, help="planner to run")
    p.add_argument("--n-vms", type=int, help="VM count for baselines (default: the heuristic's VM count)")
    p.add_argument("-o", "--output", help="plan JSON destination (stdout by default)")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="execute a plan in the discrete-event simulator")
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("plan", help="plan JSON file written by 'plan'")
    p.add_argument("--config", help="SimConfig JSON file")
    p.add_argument("--no-reassign", action="store_true", help="disable dynamic reassignment")
    p.add_argument("-o", "--output", help="result JSON destination (stdout by default)")
    p.add_argument("--events", help="CSV event log destination")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="compare approaches across a list of budgets")
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--tb-b", type=int, nargs="*", default=list(DEFAULT_TB_VALUES), help="budgets to sweep")
    p.add_argument("--approaches", nargs="+", choices=APPROACHES, default=list(APPROACHES), help="approaches to run")
    p.add_argument("--config", help="SimConfig JSON file (default: lognormal pair noise, sigma 0.1)")
    p.add_argument("--repetitions", type=int, default=3, help="seeds per cell")
    p.add_argument("-o", "--output", help="CSV report destination (stdout by default)")
    p.add_argument("--summary", help="text summary destination")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="exhaustive optimum for a tiny scenario")
    p.add_argument("scenario", help="scenario JSON file (<= 6 tasks, <= 3 locations)")
    p.add_argument("--tb-b", type=int, required=True, help="allowed number of billing blocks (<= 3)")
    p.add_argument("-o", "--output", help="result JSON destination (stdout by default)")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except InfeasibleBudgetError as exc:
        log.error("%s", exc)
        return EXIT_INFEASIBLE
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
