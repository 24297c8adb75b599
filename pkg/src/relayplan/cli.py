"""Command-line frontend: plan placements, validate plan files, run evaluations.

Exit codes: 0 success, 1 validation failure, 2 malformed input, 3 infeasible
demand (endpoints closer than 2R, or an unmeetable flow requirement without
--best-effort).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .errors import (
    RelayPlanError,
    RequirementInfeasibleError,
    ScenarioGenerationError,
    SeparationError,
)
from .evaluation import (
    DEFAULT_FLOW_RANGE,
    ScenarioSpec,
    aggregate_csv,
    gen_scenario,
    run_batch,
)
from .model import RadioConfig
from .pipeline import run_pipeline
from .serialize import (
    document_to_plan,
    dump_document,
    parse_scenario_input,
    plan_to_document,
)
from .validator import simulate_flow, validate

# Defaults mirror the evaluation setup: 200 m square, r = 10 m, R = sqrt(2) r,
# unit per-slot flow, at most 8 paths per demand, 10 demands, 100 runs.
DEFAULTS = {
    "area": 200.0,
    "r": 10.0,
    "interference": math.sqrt(2.0),
    "f": 1.0,
    "C": 8,
    "m": 10,
    "runs": 100,
    "seed": 1,
    "kind": "definite",
}

FLOW_MATCH_TOLERANCE = 1e-6


def _add_radio_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--radius", type=float, default=DEFAULTS["r"],
                        help="transmission range r in meters")
    parser.add_argument("--interference", type=float, default=DEFAULTS["interference"],
                        help="interference range as a multiple of r")
    parser.add_argument("--flow", type=float, default=DEFAULTS["f"],
                        help="per-slot link flow f")
    parser.add_argument("--max-paths", type=int, default=DEFAULTS["C"],
                        help="maximum paths per demand")


def _parse_flow_range(text: str) -> tuple[float, float]:
    lo, _, hi = text.partition(":")
    return float(lo), float(hi)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relayplan",
        description="Relay placement and TDMA slot planning for flow demands",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_plan = sub.add_parser("plan", help="plan relay positions and slots")
    p_plan.add_argument("input", nargs="?", help="scenario JSON (generator fields or explicit demands)")
    p_plan.add_argument("--scenario", choices=("aggregation", "definite", "unknown"),
                        default=DEFAULTS["kind"])
    p_plan.add_argument("--area", type=float, default=DEFAULTS["area"])
    p_plan.add_argument("--demands", type=int, default=DEFAULTS["m"],
                        help="number of demands to generate")
    p_plan.add_argument("--flow-range", type=_parse_flow_range, default=None,
                        metavar="LO:HI")
    p_plan.add_argument("--seed", type=int, default=DEFAULTS["seed"])
    p_plan.add_argument("--no-merge", action="store_true",
                        help="skip pruning and merging")
    p_plan.add_argument("--best-effort", action="store_true",
                        help="cap unmeetable flow requirements instead of failing")
    p_plan.add_argument("--shuffle-order", action="store_true",
                        help="process demands in a seed-shuffled order")
    p_plan.add_argument("--out", help="write the plan JSON here instead of stdout")
    p_plan.add_argument("--format", choices=("json",), default="json")
    _add_radio_flags(p_plan)

    p_val = sub.add_parser("validate", help="re-check a plan file")
    p_val.add_argument("plan", help="plan JSON produced by the plan command")

    p_eval = sub.add_parser("eval", help="run seeded scenario batches")
    p_eval.add_argument("--scenario", choices=("aggregation", "definite", "unknown"),
                        default=DEFAULTS["kind"])
    p_eval.add_argument("--areas", default=str(DEFAULTS["area"]),
                        help="comma-separated area side lengths")
    p_eval.add_argument("--interference-multipliers", default=None,
                        help="comma-separated multiples of r")
    p_eval.add_argument("--demand-counts", default=str(DEFAULTS["m"]),
                        help="comma-separated demand counts")
    p_eval.add_argument("--flow-range", type=_parse_flow_range, default=None,
                        metavar="LO:HI")
    p_eval.add_argument("--runs", type=int, default=DEFAULTS["runs"])
    p_eval.add_argument("--seed", type=int, default=DEFAULTS["seed"],
                        help="first seed; runs use seed, seed+1, ...")
    p_eval.add_argument("--out", default="eval_out", help="output directory")
    p_eval.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="stdout format for the aggregate table")
    _add_radio_flags(p_eval)

    return parser


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def cmd_plan(args: argparse.Namespace) -> int:
    defaults = {
        "r": args.radius,
        "R": args.interference * args.radius,
        "f": args.flow,
        "C": args.max_paths,
        "kind": args.scenario,
        "area": args.area,
        "m": args.demands,
        "seed": args.seed,
    }
    try:
        if args.input:
            doc = _load_json(args.input)
            if not isinstance(doc, dict):
                raise ValueError("scenario JSON must be an object")
            config, fields = parse_scenario_input(doc, defaults)
        else:
            config = RadioConfig(r=defaults["r"], R=defaults["R"],
                                 f=defaults["f"], C=defaults["C"])
            fields = {
                "kind": args.scenario,
                "area": args.area,
                "m": args.demands,
                "flow_low": None,
                "flow_high": None,
                "seed": args.seed,
            }
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        print(f"error: malformed input: {exc}", file=sys.stderr)
        return 2

    try:
        if "demands" in fields:
            demands = fields["demands"]
            kind = "explicit"
        else:
            kind = fields["kind"]
            low, high = DEFAULT_FLOW_RANGE[kind]
            if args.flow_range:
                low, high = args.flow_range
            if fields.get("flow_low") is not None:
                low = fields["flow_low"]
            if fields.get("flow_high") is not None:
                high = fields["flow_high"]
            spec = ScenarioSpec(
                kind=kind,
                area=fields["area"],
                m=fields["m"],
                flow_low=low,
                flow_high=high,
                seed=fields["seed"],
                config=config,
            )
            demands = gen_scenario(spec)

        order = None
        if args.shuffle_order:
            rng = np.random.Generator(np.random.Philox(key=args.seed))
            ids = [d.id for d in demands]
            order = [ids[i] for i in rng.permutation(len(ids))]

        do_merge = not args.no_merge and kind != "unknown"
        result = run_pipeline(
            demands,
            config,
            do_merge=do_merge,
            best_effort=args.best_effort,
            order=order,
        )
    except SeparationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except RequirementInfeasibleError as exc:
        print(f"error: {exc} (use --best-effort to cap it)", file=sys.stderr)
        return 3
    except ScenarioGenerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except RelayPlanError as exc:
        print(f"error: planning failed: {exc}", file=sys.stderr)
        return 1

    violations = validate(result.plan)
    doc = plan_to_document(result.plan, violations)
    text = dump_document(doc)
    if violations:
        print(f"error: plan failed validation with {len(violations)} violations",
              file=sys.stderr)
        return 1
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        doc = _load_json(args.plan)
        plan = document_to_plan(doc)
        recorded = {d: doc["achieved"].get(d) for d in doc["achieved"]}
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        print(f"error: malformed plan: {exc}", file=sys.stderr)
        return 2

    violations = validate(plan)
    for v in violations:
        print(
            f"violation: slot {v.slot}: ({v.links[0].tx}->{v.links[0].rx}) vs "
            f"({v.links[1].tx}->{v.links[1].rx}), transmitter distance {v.distance:.3f} m"
        )
    if violations:
        print(f"{len(violations)} violations found")
        return 1

    measurements = simulate_flow(plan)
    mismatched = False
    for m in measurements:
        rec = recorded.get(m.demand_id)
        line = f"demand {m.demand_id}: recorded {rec!r} measured {m.flow!r}"
        if rec is None or abs(rec - m.flow) > FLOW_MATCH_TOLERANCE:
            mismatched = True
            line += "  MISMATCH"
        print(line)
    if mismatched:
        print("recorded flows do not match measurement")
        return 1
    print("plan certified: no violations, flows match")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    try:
        areas = [float(v) for v in args.areas.split(",") if v]
        counts = [int(v) for v in args.demand_counts.split(",") if v]
        if args.interference_multipliers:
            multipliers = [float(v) for v in args.interference_multipliers.split(",") if v]
        else:
            multipliers = [args.interference]
        if not areas or not counts or not multipliers:
            raise ValueError("empty sweep list")
        if args.runs < 1:
            raise ValueError("--runs must be at least 1")
        low, high = args.flow_range or DEFAULT_FLOW_RANGE[args.scenario]
    except ValueError as exc:
        print(f"error: invalid grid: {exc}", file=sys.stderr)
        return 2

    specs = []
    for area in areas:
        for mult in multipliers:
            for m in counts:
                config = RadioConfig(
                    r=args.radius, R=mult * args.radius, f=args.flow, C=args.max_paths
                )
                for k in range(args.runs):
                    specs.append(
                        ScenarioSpec(
                            kind=args.scenario,
                            area=area,
                            m=m,
                            flow_low=low,
                            flow_high=high,
                            seed=args.seed + k,
                            config=config,
                        )
                    )
    records, aggregates = run_batch(specs, out_dir=args.out)
    if args.format == "json":
        print(json.dumps(aggregates, indent=2, sort_keys=True))
    else:
        sys.stdout.write(aggregate_csv(aggregates))
    failures = sum(1 for r in records if r.status != "ok")
    if failures:
        print(f"{failures} runs failed (see runs.csv)", file=sys.stderr)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "plan":
        return cmd_plan(args)
    if args.command == "validate":
        return cmd_validate(args)
    if args.command == "eval":
        return cmd_eval(args)
    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
