"""Retry loop with verbal feedback injected into later trials."""

from __future__ import annotations

import hashlib
from collections.abc import Callable
from dataclasses import dataclass, field

from rewardplan.core.env import Environment
from rewardplan.core.serialize import serialize_trajectory
from rewardplan.core.types import Instruction, Trajectory
from rewardplan.errors import ConfigError
from rewardplan.planners.rollout import rollout
from rewardplan.planners.types import Budget, PlanResult, argmax_result
from rewardplan.policy.base import Policy
from rewardplan.reward.backends import RewardBackend

SELECTION_RULES = ("last", "first", "best")

Reflector = Callable[[Instruction, Trajectory, float], str]


@dataclass
class ReflexionMemory:
    """Episodic buffer of (trajectory digest, reflection text, score)."""

    entries: list[tuple[str, str, float]] = field(default_factory=list)

    def add(self, trajectory: Trajectory, reflection: str, score: float) -> None:
        digest = hashlib.sha256(serialize_trajectory(trajectory).encode()).hexdigest()[:12]
        self.entries.append((digest, reflection, score))

    def reflections(self) -> tuple[str, ...]:
        return tuple(text for _, text, _ in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def _default_reflector(instruction: Instruction, trajectory: Trajectory, score: float) -> str:
    last = trajectory.actions[-1].text if trajectory.actions else "(no action)"
    return (
        f"The previous trial scored {score:.3f} after {len(trajectory)} actions "
        f"(last action: {last}). Try a different action sequence."
    )


def run_reflexion(
    env: Environment,
    instruction: Instruction,
    policy: Policy,
    reward: RewardBackend,
    budget: Budget,
    max_trials: int = 10,
    threshold: float = 0.99,
    selection_rule: str = "last",
    seed: int = 0,
    reflector: Reflector | None = None,
) -> PlanResult:
    """Rollout, score, reflect, retry.

    Stops at the first trial whose score is strictly greater than the
    threshold and returns that trial. On exhaustion the selection rule
    picks the last, first, or best-scoring trial.
    """
    if max_trials < 1:
        raise ConfigError("max_trials must be >= 1")
    if selection_rule not in SELECTION_RULES:
        raise ConfigError(f"selection_rule must be one of {SELECTION_RULES}")
    reflector = reflector or _default_reflector
    trials = min(max_trials, budget.max_trajectories)
    memory = ReflexionMemory()
    explored: list[tuple[Trajectory, float]] = []
    for trial in range(trials):
        trajectory = rollout(
            env,
            instruction,
            policy,
            budget,
            temperature=1.0,
            seed=seed + trial,
            reflections=memory.reflections(),
        )
        score = reward.score(instruction, trajectory, env.outcome_extras())
        explored.append((trajectory, score))
        if score > threshold:
            return PlanResult(trajectory, score, tuple(explored), len(explored))
        memory.add(trajectory, reflector(instruction, trajectory, score), score)
    if selection_rule == "best":
        return argmax_result(explored)
    chosen = explored[-1] if selection_rule == "last" else explored[0]
    return PlanResult(chosen[0], chosen[1], tuple(explored), len(explored))
