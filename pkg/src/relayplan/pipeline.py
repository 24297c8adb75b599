"""End-to-end planning pipeline: plan all demands, merge, validate.

This is the orchestration used by the CLI and the evaluation harness:
multi-demand planning fixes geometry and slots, the merger prunes and
shortens where flow requirements leave slack, and the final plan must pass
the independent validator before it is emitted.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ScheduleConsistencyError
from .merge import MergeOutcome, merge_paths
from .model import Demand, PlacementPlan, RadioConfig
from .multi import plan_demands
from .validator import validate


@dataclass
class PipelineResult:
    plan: PlacementPlan
    unmerged_plan: PlacementPlan
    merge_outcome: MergeOutcome | None


def run_pipeline(
    demands: list[Demand],
    config: RadioConfig,
    *,
    do_merge: bool = True,
    best_effort: bool = False,
    order: list[str] | None = None,
) -> PipelineResult:
    """Plan, optionally merge, and certify a full placement.

    Raises SeparationError for demands closer than 2R, and
    RequirementInfeasibleError when a requirement cannot be met and
    ``best_effort`` is off.  The emitted plan always validates cleanly.
    """
    plan = plan_demands(demands, config, order=order)
    outcome = None
    final = plan
    if do_merge:
        requirements = {d.id: d.required_flow for d in demands}
        outcome = merge_paths(plan, requirements, best_effort=best_effort)
        final = outcome.plan
    violations = validate(final)
    if violations:
        raise ScheduleConsistencyError(
            f"pipeline produced {len(violations)} schedule violations"
        )
    return PipelineResult(plan=final, unmerged_plan=plan, merge_outcome=outcome)
