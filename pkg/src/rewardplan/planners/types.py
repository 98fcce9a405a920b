"""Shared planner types: exploration budgets and plan results."""

from __future__ import annotations

from dataclasses import dataclass

from rewardplan.core.types import DEFAULT_MAX_ACTIONS, Trajectory


@dataclass(frozen=True)
class Budget:
    """Exploration limits every planner must respect."""

    max_trajectories: int = 10
    max_actions_per_trajectory: int = DEFAULT_MAX_ACTIONS
    top_k_actions: int = 10

    def __post_init__(self) -> None:
        if min(self.max_trajectories, self.max_actions_per_trajectory, self.top_k_actions) < 1:
            raise ValueError("all budget fields must be >= 1")


# Game of 24 runs get a larger search allowance than the default 10.
GAME24_BUDGET = Budget(max_trajectories=100)


@dataclass(frozen=True)
class PlanResult:
    """What a planner hands back: the chosen trajectory plus its audit trail.

    ``best_score`` is the argmax over ``explored`` (earliest on ties) for
    every planner except reflexion, whose selection rule may deliberately
    return a non-argmax trial.
    """

    best: Trajectory
    best_score: float
    explored: tuple[tuple[Trajectory, float], ...]
    trajectories_used: int

    def __post_init__(self) -> None:
        if self.trajectories_used < 1:
            raise ValueError("trajectories_used must be >= 1")
        if not any(t is self.best for t, _ in self.explored):
            raise ValueError("best trajectory must be one of the explored ones")


def argmax_result(explored: list[tuple[Trajectory, float]]) -> PlanResult:
    """PlanResult selecting the highest score, earliest index on ties."""
    best_i = 0
    for i, (_, s) in enumerate(explored):
        if s > explored[best_i][1]:
            best_i = i
    return PlanResult(
        best=explored[best_i][0],
        best_score=explored[best_i][1],
        explored=tuple(explored),
        trajectories_used=len(explored),
    )
