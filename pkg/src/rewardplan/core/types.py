"""Value types for the instruction/action/observation decision model.

A trajectory is the alternating history one episode produces: an initial
observation o0, then N (action, observation) steps. All types here are
frozen dataclasses with value semantics; environments return new values
rather than mutating shared ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

from rewardplan.errors import AppendToTerminalError, MaxLengthExceededError

# Episode length cap; planners may lower it via Budget but never raise it
# above what the trajectory validator accepts.
DEFAULT_MAX_ACTIONS = 10

# Returned by every environment for an action it cannot interpret. The
# episode continues and state is unchanged, but the step still counts
# against the length cap.
INVALID_ACTION_OBSERVATION = "No known action matches that input."


@dataclass(frozen=True)
class Instruction:
    """A task goal given to the agent."""

    text: str
    id: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("instruction text must be non-empty")


@dataclass(frozen=True)
class Action:
    """One environment command in its textual surface form."""

    text: str

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("action text must be non-empty")
        if "\n" in self.text or "\r" in self.text:
            raise ValueError("action text must not contain newlines")


@dataclass(frozen=True)
class Observation:
    """What the environment shows after reset or a step.

    ``attachment`` is an opaque payload (e.g. a screenshot handle) carried
    for callers that want it; it is never interpreted, serialized, or
    compared here.
    """

    text: str
    attachment: Any = field(default=None, compare=False)


@dataclass(frozen=True)
class TaskOutcome:
    """Ground-truth score of a finished episode."""

    oracle_reward: float
    success: bool

    def __post_init__(self) -> None:
        if not 0.0 <= self.oracle_reward <= 1.0:
            raise ValueError(f"oracle_reward {self.oracle_reward} outside [0, 1]")


@dataclass(frozen=True)
class Trajectory:
    """An episode history: o0 plus ordered (action, observation) steps.

    ``oracle_reward`` is an optional evaluation annotation carried through
    serialization; it plays no part in the structural invariants.
    """

    instruction: Instruction
    initial_observation: Observation
    steps: tuple[tuple[Action, Observation], ...] = ()
    terminal: bool = False
    oracle_reward: float | None = None

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def actions(self) -> tuple[Action, ...]:
        return tuple(a for a, _ in self.steps)

    @property
    def observations(self) -> tuple[Observation, ...]:
        """All observations including o0 (always one more than actions)."""
        return (self.initial_observation,) + tuple(o for _, o in self.steps)

    @property
    def final_observation(self) -> Observation:
        return self.steps[-1][1] if self.steps else self.initial_observation


def trajectory_append(
    t: Trajectory,
    action: Action,
    observation: Observation,
    terminal: bool = False,
    max_actions: int = DEFAULT_MAX_ACTIONS,
) -> Trajectory:
    """Return ``t`` extended by one step; ``t`` itself is unchanged."""
    if t.terminal:
        raise AppendToTerminalError("cannot append to a terminal trajectory")
    if len(t.steps) >= max_actions:
        raise MaxLengthExceededError(f"trajectory already has {len(t.steps)} of {max_actions} actions")
    return Trajectory(
        instruction=t.instruction,
        initial_observation=t.initial_observation,
        steps=t.steps + ((action, observation),),
        terminal=terminal,
        oracle_reward=t.oracle_reward,
    )


def validate_trajectory(
    t: Trajectory | Mapping[str, Any], max_actions: int = DEFAULT_MAX_ACTIONS
) -> str | None:
    """Return None when all trajectory invariants hold, else a description.

    Accepts either a Trajectory value or the raw JSONL object form, so data
    pipelines can screen lines before constructing values. Violations are
    reported, never raised.
    """
    if isinstance(t, Mapping):
        return _validate_raw(t, max_actions)
    if len(t.observations) != len(t.actions) + 1:
        return (
            f"observation count {len(t.observations)} != action count {len(t.actions)} + 1"
        )
    if len(t.steps) > max_actions:
        return f"max length exceeded: {len(t.steps)} steps > {max_actions}"
    if not t.instruction.text.strip():
        return "empty instruction"
    if t.oracle_reward is not None and not 0.0 <= t.oracle_reward <= 1.0:
        return f"oracle_reward {t.oracle_reward} outside [0, 1]"
    return None


def _validate_raw(obj: Mapping[str, Any], max_actions: int) -> str | None:
    for key in ("instruction", "instruction_id", "o0", "steps", "terminal"):
        if key not in obj:
            return f"missing field {key!r}"
    steps = obj["steps"]
    if not isinstance(steps, list):
        return "steps is not a list"
    n_actions = sum(1 for s in steps if isinstance(s, Mapping) and "a" in s)
    n_observations = 1 + sum(1 for s in steps if isinstance(s, Mapping) and "o" in s)
    if n_observations != n_actions + 1:
        return f"observation count {n_observations} != action count {n_actions} + 1"
    if len(steps) > max_actions:
        return f"max length exceeded: {len(steps)} steps > {max_actions}"
    if not str(obj["instruction"]).strip():
        return "empty instruction"
    reward = obj.get("oracle_reward")
    if reward is not None and not 0.0 <= float(reward) <= 1.0:
        return f"oracle_reward {reward} outside [0, 1]"
    return None
