"""Relay placement and TDMA slot planning for flow demands in a plane."""

from .errors import (
    ConstructionInfeasibleError,
    InvalidScheduleError,
    RelayPlanError,
    RequirementInfeasibleError,
    ScenarioGenerationError,
    ScheduleConsistencyError,
    SeparationError,
)
from .geometry import (
    GEOM_TOL,
    Point,
    Polyline,
    dist,
    place_relays,
    point_to_polyline_distance,
    polyline,
    polyline_length,
    sample_polyline,
)
from .model import (
    Demand,
    Link,
    PlacementPlan,
    PlannedPath,
    RadioConfig,
    SlotSchedule,
    interference_set,
    interference_span,
    links_conflict,
)
from .multi import PathInterferenceReport, heaviest_interference, plan_demands, schedule_plan
from .merge import (
    MergeCandidate,
    SurplusReport,
    avg_path_distance,
    is_mergable,
    merge_pair,
    merge_paths,
    prune_surplus,
)
from .pipeline import PipelineResult, run_pipeline
from .single import (
    InterferenceProfile,
    SingleDemandPlan,
    construct_paths,
    interference_length,
    interference_profile,
    max_flow,
    plan_single_demand,
    single_path_flow,
)
from .validator import FlowMeasurement, Violation, simulate_flow, validate

__version__ = "0.1.0"

__all__ = [
    "ConstructionInfeasibleError",
    "Demand",
    "FlowMeasurement",
    "GEOM_TOL",
    "InterferenceProfile",
    "InvalidScheduleError",
    "Link",
    "MergeCandidate",
    "PathInterferenceReport",
    "PipelineResult",
    "PlacementPlan",
    "PlannedPath",
    "Point",
    "Polyline",
    "RadioConfig",
    "RelayPlanError",
    "RequirementInfeasibleError",
    "ScenarioGenerationError",
    "ScheduleConsistencyError",
    "SeparationError",
    "SingleDemandPlan",
    "SlotSchedule",
    "SurplusReport",
    "Violation",
    "avg_path_distance",
    "construct_paths",
    "dist",
    "heaviest_interference",
    "interference_length",
    "interference_profile",
    "interference_set",
    "interference_span",
    "is_mergable",
    "links_conflict",
    "max_flow",
    "merge_pair",
    "merge_paths",
    "place_relays",
    "plan_demands",
    "plan_single_demand",
    "point_to_polyline_distance",
    "polyline",
    "polyline_length",
    "prune_surplus",
    "run_pipeline",
    "sample_polyline",
    "schedule_plan",
    "simulate_flow",
    "single_path_flow",
    "validate",
]
