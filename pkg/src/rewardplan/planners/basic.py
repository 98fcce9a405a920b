"""Sampling, greedy, and best-of-n planners."""

from __future__ import annotations

import math

from rewardplan.core.env import Environment
from rewardplan.core.types import Instruction
from rewardplan.errors import ConfigError
from rewardplan.planners.rollout import rollout
from rewardplan.planners.types import Budget, PlanResult, argmax_result
from rewardplan.policy.base import Policy
from rewardplan.reward.backends import RewardBackend


def run_sampling(
    env: Environment,
    instruction: Instruction,
    policy: Policy,
    reward: RewardBackend | None,
    budget: Budget,
    seed: int = 0,
) -> PlanResult:
    """One temperature-1 rollout; the n=1 baseline."""
    return run_best_of_n(env, instruction, policy, reward, 1, budget, seed)


def run_greedy(
    env: Environment,
    instruction: Instruction,
    policy: Policy,
    reward: RewardBackend | None,
    budget: Budget,
    seed: int = 0,
) -> PlanResult:
    """One temperature-0 rollout (the highest-probability action sequence)."""
    trajectory = rollout(env, instruction, policy, budget, temperature=0.0, seed=seed)
    score = (
        reward.score(instruction, trajectory, env.outcome_extras())
        if reward is not None
        else math.nan
    )
    return PlanResult(trajectory, score, ((trajectory, score),), trajectories_used=1)


def run_best_of_n(
    env: Environment,
    instruction: Instruction,
    policy: Policy,
    reward: RewardBackend | None,
    n: int,
    budget: Budget,
    seed: int = 0,
) -> PlanResult:
    """n independent temperature-1 rollouts (seeds seed+i), argmax by reward.

    Ties go to the lowest rollout index, so adding rollouts can only keep
    or improve the selected score.
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    if n > budget.max_trajectories:
        raise ConfigError(f"n={n} exceeds budget.max_trajectories={budget.max_trajectories}")
    explored = []
    for i in range(n):
        trajectory = rollout(env, instruction, policy, budget, temperature=1.0, seed=seed + i)
        score = (
            reward.score(instruction, trajectory, env.outcome_extras())
            if reward is not None
            else math.nan
        )
        explored.append((trajectory, score))
    return argmax_result(explored)
