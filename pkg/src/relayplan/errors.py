"""Exception types shared across the planner, merger and CLI."""

from __future__ import annotations


class RelayPlanError(Exception):
    """Base class for all planner errors."""


class SeparationError(RelayPlanError):
    """Source and destination are closer than twice the interference range."""

    def __init__(self, demand_id: str, distance: float, minimum: float):
        self.demand_id = demand_id
        self.distance = distance
        self.minimum = minimum
        super().__init__(
            f"demand {demand_id}: endpoint separation {distance:.3f} m is below "
            f"2R = {minimum:.3f} m; placement is only meaningful when the endpoints "
            f"are at least twice the interference range apart"
        )


class ConstructionInfeasibleError(RelayPlanError):
    """No non-interfering connection found inside the search region."""


class RequirementInfeasibleError(RelayPlanError):
    """A demand's flow requirement exceeds what the plan can carry."""

    def __init__(self, demand_id: str, required: float, achievable: float):
        self.demand_id = demand_id
        self.required = required
        self.achievable = achievable
        super().__init__(
            f"demand {demand_id}: required flow {required:.6g} exceeds achievable "
            f"{achievable:.6g}"
        )


class ScenarioGenerationError(RelayPlanError):
    """Random scenario generation could not satisfy the separation constraint."""


class InvalidScheduleError(RelayPlanError):
    """A schedule with conflicts was passed where a certified one is required."""


class ScheduleConsistencyError(RelayPlanError):
    """Internal planner bug: an emitted schedule failed its own validation."""
