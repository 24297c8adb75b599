"""Scenario generation, satisfied-rate metrics, and batch evaluation.

Scenarios are generated with a Philox counter-based PRNG keyed on the run
seed, so identical specs produce identical demands on any machine.  Batch
runs write one CSV row per run, an aggregate CSV per grid point, and a
simple SVG line chart per swept dimension.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import RelayPlanError, ScenarioGenerationError
from .geometry import Point, dist
from .model import Demand, RadioConfig
from .pipeline import run_pipeline
from .validator import simulate_flow

MAX_SAMPLING_ATTEMPTS = 10_000

RUN_CSV_COLUMNS = [
    "scenario",
    "kind",
    "area",
    "r",
    "R",
    "m",
    "flow_low",
    "flow_high",
    "seed",
    "asr_percent",
    "relays",
    "total_length_m",
    "merge_savings_percent",
    "status",
]

KINDS = ("aggregation", "definite", "unknown")

DEFAULT_FLOW_RANGE = {
    "aggregation": (0.01, 0.1),
    "definite": (0.04, 0.4),
    "unknown": (0.04, 0.4),
}


@dataclass(frozen=True)
class ScenarioSpec:
    """One randomized scenario: kind, square area side, demand count, flows, seed."""

    kind: str
    area: float
    m: int
    flow_low: float
    flow_high: float
    seed: int
    config: RadioConfig

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if not (self.area > 0.0):
            raise ValueError("area side length must be positive")
        if self.m < 1:
            raise ValueError("demand count must be at least 1")
        if not (0.0 < self.flow_low <= self.flow_high):
            raise ValueError("flow range must satisfy 0 < low <= high")

    @property
    def label(self) -> str:
        return f"area{self.area:g}_R{self.config.R:g}_m{self.m}"


@dataclass
class EvalRecord:
    """Per-run metrics; per_demand_sr keeps the individual satisfied rates."""

    spec: ScenarioSpec
    seed: int
    per_demand_sr: list[float] = field(default_factory=list)
    asr: float | None = None
    relays: int | None = None
    total_length: float | None = None
    merge_savings: float | None = None
    status: str = "ok"


def gen_scenario(spec: ScenarioSpec) -> list[Demand]:
    """Deterministic random demands for a spec (Philox keyed on the seed).

    Positions are uniform in the area; each pair is redrawn until its
    endpoints are at least 2R apart.  Aggregation scenarios share a single
    destination drawn from the central quarter of the area.  The unknown
    kind draws the same pair layout as definite; its requirements are
    recorded on the demands but withheld from the planner by the harness.
    """
    rng = np.random.Generator(np.random.Philox(key=spec.seed))
    min_sep = 2.0 * spec.config.R
    attempts = 0

    def uniform_point(low: float, high: float) -> Point:
        xy = rng.uniform(low, high, size=2)
        return Point(float(xy[0]), float(xy[1]))

    def bump() -> None:
        nonlocal attempts
        attempts += 1
        if attempts > MAX_SAMPLING_ATTEMPTS:
            raise ScenarioGenerationError(
                f"could not place demands {min_sep:.1f} m apart in a "
                f"{spec.area:g} x {spec.area:g} area after {MAX_SAMPLING_ATTEMPTS} draws"
            )

    positions: list[tuple[Point, Point]] = []
    if spec.kind == "aggregation":
        shared_dest = uniform_point(spec.area / 4.0, 3.0 * spec.area / 4.0)
        for _ in range(spec.m):
            while True:
                bump()
                src = uniform_point(0.0, spec.area)
                if dist(src, shared_dest) >= min_sep:
                    positions.append((src, shared_dest))
                    break
    else:
        for _ in range(spec.m):
            while True:
                bump()
                src = uniform_point(0.0, spec.area)
                dest = uniform_point(0.0, spec.area)
                if dist(src, dest) >= min_sep:
                    positions.append((src, dest))
                    break

    requirements = rng.uniform(spec.flow_low, spec.flow_high, size=spec.m)
    return [
        Demand(
            id=f"d{i + 1:04d}",
            src=src,
            dest=dest,
            required_flow=float(requirements[i]),
        )
        for i, (src, dest) in enumerate(positions)
    ]


def satisfied_rate(required: float, achieved: float) -> float:
    """Percentage of the requirement met, capped at 100."""
    if not (required > 0.0):
        raise ValueError("required flow must be positive")
    if achieved < 0.0:
        raise ValueError("achieved flow cannot be negative")
    if achieved >= required:
        return 100.0
    return achieved / required * 100.0


def average_satisfied_rate(rates: list[float]) -> float:
    """Arithmetic mean of per-demand satisfied rates."""
    if not rates:
        raise ValueError("cannot average an empty set of rates")
    return float(sum(rates)) / len(rates)


def run_one(spec: ScenarioSpec) -> EvalRecord:
    """Generate, plan, (maybe) merge, validate, and measure one scenario."""
    record = EvalRecord(spec=spec, seed=spec.seed)
    try:
        demands = gen_scenario(spec)
        do_merge = spec.kind != "unknown"
        result = run_pipeline(
            demands, spec.config, do_merge=do_merge, best_effort=True
        )
        plan = result.plan
        measured = {m.demand_id: m.flow for m in simulate_flow(plan)}
        record.per_demand_sr = [
            satisfied_rate(d.required_flow, measured[d.id]) for d in demands
        ]
        record.asr = average_satisfied_rate(record.per_demand_sr)
        record.relays = plan.relay_count()
        record.total_length = plan.total_length()
        base = result.unmerged_plan.relay_count()
        record.merge_savings = (
            (base - plan.relay_count()) / base * 100.0 if base else 0.0
        )
    except RelayPlanError as exc:
        record.status = f"failed:{type(exc).__name__}"
    return record


def run_batch(
    specs: list[ScenarioSpec], out_dir: str | None = None
) -> tuple[list[EvalRecord], list[dict]]:
    """Run every spec, aggregate per grid point, optionally write CSV and charts."""
    records = [run_one(spec) for spec in specs]
    aggregates = aggregate_records(records)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        _atomic_write(os.path.join(out_dir, "runs.csv"), runs_csv(records))
        _atomic_write(os.path.join(out_dir, "aggregate.csv"), aggregate_csv(aggregates))
        write_sweep_charts(aggregates, out_dir)
    return records, aggregates


def _grid_key(spec: ScenarioSpec) -> tuple:
    return (
        spec.label,
        spec.kind,
        spec.area,
        spec.config.r,
        spec.config.R,
        spec.m,
        spec.flow_low,
        spec.flow_high,
    )


def aggregate_records(records: list[EvalRecord]) -> list[dict]:
    """Mean and sample standard deviation per grid point, in first-seen order."""
    groups: dict[tuple, list[EvalRecord]] = {}
    order: list[tuple] = []
    for rec in records:
        key = _grid_key(rec.spec)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(rec)

    def mean_std(values: list[float]) -> tuple[float, float]:
        if not values:
            return float("nan"), float("nan")
        mean = sum(values) / len(values)
        if len(values) < 2:
            return mean, 0.0
        var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
        return mean, math.sqrt(var)

    out = []
    for key in order:
        recs = groups[key]
        ok = [r for r in recs if r.status == "ok"]
        row: dict = dict(
            zip(
                ("scenario", "kind", "area", "r", "R", "m", "flow_low", "flow_high"),
                key,
            )
        )
        row["runs"] = len(recs)
        row["failures"] = len(recs) - len(ok)
        for name, values in (
            ("asr", [r.asr for r in ok]),
            ("relays", [float(r.relays) for r in ok]),
            ("total_length", [r.total_length for r in ok]),
            ("merge_savings", [r.merge_savings for r in ok]),
        ):
            mean, std = mean_std(values)
            row[f"{name}_mean"] = mean
            row[f"{name}_std"] = std
        out.append(row)
    return out


def runs_csv(records: list[EvalRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RUN_CSV_COLUMNS)
    for rec in records:
        spec = rec.spec
        ok = rec.status == "ok"
        writer.writerow(
            [
                spec.label,
                spec.kind,
                repr(spec.area),
                repr(spec.config.r),
                repr(spec.config.R),
                spec.m,
                repr(spec.flow_low),
                repr(spec.flow_high),
                rec.seed,
                repr(rec.asr) if ok else "",
                rec.relays if ok else "",
                repr(rec.total_length) if ok else "",
                repr(rec.merge_savings) if ok else "",
                rec.status,
            ]
        )
    return buf.getvalue()


AGGREGATE_CSV_COLUMNS = [
    "scenario",
    "kind",
    "area",
    "r",
    "R",
    "m",
    "flow_low",
    "flow_high",
    "runs",
    "failures",
    "asr_mean",
    "asr_std",
    "relays_mean",
    "relays_std",
    "total_length_mean",
    "total_length_std",
    "merge_savings_mean",
    "merge_savings_std",
]


def aggregate_csv(aggregates: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(AGGREGATE_CSV_COLUMNS)
    for row in aggregates:
        writer.writerow(
            [
                row["scenario"],
                row["kind"],
                repr(row["area"]),
                repr(row["r"]),
                repr(row["R"]),
                row["m"],
                repr(row["flow_low"]),
                repr(row["flow_high"]),
                row["runs"],
                row["failures"],
                repr(row["asr_mean"]),
                repr(row["asr_std"]),
                repr(row["relays_mean"]),
                repr(row["relays_std"]),
                repr(row["total_length_mean"]),
                repr(row["total_length_std"]),
                repr(row["merge_savings_mean"]),
                repr(row["merge_savings_std"]),
            ]
        )
    return buf.getvalue()


def write_sweep_charts(aggregates: list[dict], out_dir: str) -> list[str]:
    """One SVG line chart per swept dimension, for ASR and relay count."""
    from matplotlib.figure import Figure
    import matplotlib

    matplotlib.rcParams["svg.hashsalt"] = "relayplan"

    written: list[str] = []
    sweeps = {"area": "area", "interference": "R", "demands": "m"}
    for label, column in sweeps.items():
        values = sorted({row[column] for row in aggregates})
        if len(values) < 2:
            continue
        for metric, ylabel in (("asr_mean", "mean ASR (%)"), ("relays_mean", "mean relay count")):
            fig = Figure(figsize=(5.0, 3.2))
            ax = fig.add_subplot(111)
            kinds = sorted({row["kind"] for row in aggregates})
            for kind in kinds:
                xs, ys = [], []
                for v in values:
                    rows = [
                        row
                        for row in aggregates
                        if row[column] == v and row["kind"] == kind
                    ]
                    if rows:
                        xs.append(v)
                        ys.append(rows[0][metric])
                if xs:
                    ax.plot(xs, ys, marker="o", label=kind)
            ax.set_xlabel(label)
            ax.set_ylabel(ylabel)
            ax.grid(True, alpha=0.3)
            if len(kinds) > 1:
                ax.legend()
            fig.tight_layout()
            path = os.path.join(out_dir, f"{metric.split('_')[0]}_vs_{label}.svg")
            fig.savefig(path, format="svg", metadata={"Date": None})
            written.append(path)
    return written


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)
