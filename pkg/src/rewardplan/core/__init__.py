"""POMDP data model, environment contract, and trajectory serialization."""

from rewardplan.core.env import Environment
from rewardplan.core.serialize import (
    deserialize_trajectory,
    read_trajectories,
    serialize_trajectory,
    trajectory_from_obj,
    trajectory_to_obj,
    write_trajectories,
)
from rewardplan.core.types import (
    DEFAULT_MAX_ACTIONS,
    INVALID_ACTION_OBSERVATION,
    Action,
    Instruction,
    Observation,
    TaskOutcome,
    Trajectory,
    trajectory_append,
    validate_trajectory,
)

__all__ = [
    "Action",
    "DEFAULT_MAX_ACTIONS",
    "Environment",
    "INVALID_ACTION_OBSERVATION",
    "Instruction",
    "Observation",
    "TaskOutcome",
    "Trajectory",
    "deserialize_trajectory",
    "read_trajectories",
    "serialize_trajectory",
    "trajectory_append",
    "trajectory_from_obj",
    "trajectory_to_obj",
    "validate_trajectory",
    "write_trajectories",
]
