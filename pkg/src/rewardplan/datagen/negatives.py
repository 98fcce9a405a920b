"""Verified negative-trajectory construction."""

from __future__ import annotations

import random
from collections.abc import Callable

from rewardplan.core.env import Environment
from rewardplan.core.serialize import serialize_trajectory
from rewardplan.core.types import Instruction, Trajectory, trajectory_append
from rewardplan.datagen.types import NEGATIVE_KINDS, NegativeStrategy
from rewardplan.errors import NegativeConstructionFailedError
from rewardplan.planners.rollout import rollout
from rewardplan.planners.types import Budget
from rewardplan.policy.backends import RandomPolicy
from rewardplan.policy.base import Policy
from rewardplan.reward.backends import OracleReward


def choose_strategy(rng: random.Random) -> NegativeStrategy:
    """Default mix: half action perturbations, the rest split between
    truncation and random divergence."""
    r = rng.random()
    if r < 0.5:
        return NegativeStrategy("perturb_action")
    if r < 0.75:
        return NegativeStrategy("truncate")
    return NegativeStrategy("diverge_random")


def _replay_prefix(
    env_factory: Callable[[], Environment],
    instruction: Instruction,
    positive: Trajectory,
    steps: int,
    max_actions: int,
) -> tuple[Environment, Trajectory]:
    env = env_factory()
    o0 = env.reset(instruction)
    prefix = Trajectory(instruction, o0, (), terminal=env.is_terminal())
    for action, _ in positive.steps[:steps]:
        observation = env.step(action)
        prefix = trajectory_append(
            prefix, action, observation, terminal=env.is_terminal(), max_actions=max_actions
        )
    return env, prefix


def _attempt(
    instruction: Instruction,
    positive: Trajectory,
    strategy: NegativeStrategy,
    env_factory: Callable[[], Environment],
    policy: Policy,
    budget: Budget,
    rng: random.Random,
    seed: int,
) -> Trajectory | None:
    n = len(positive)
    if n == 0:
        return None
    cap = budget.max_actions_per_trajectory

    if strategy.kind == "truncate":
        keep = strategy.index if strategy.index is not None else rng.randrange(n)
        _, truncated = _replay_prefix(env_factory, instruction, positive, keep, cap)
        return truncated

    at = strategy.index if strategy.index is not None else rng.randrange(n)
    env, prefix = _replay_prefix(env_factory, instruction, positive, at, cap)
    if env.is_terminal():
        return None

    if strategy.kind == "perturb_action":
        original = positive.steps[at][0].text
        alternatives = [a for a in env.valid_actions() if a.text != original]
        if not alternatives:
            return None
        action = rng.choice(alternatives)
        observation = env.step(action)
        prefix = trajectory_append(
            prefix, action, observation, terminal=env.is_terminal(), max_actions=cap
        )
        if env.is_terminal():
            return prefix
        return rollout(
            env, instruction, policy, budget, temperature=1.0, seed=seed, prefix=prefix
        )

    # diverge_random: follow a seeded random policy from the split point
    return rollout(
        env, instruction, RandomPolicy(), budget, temperature=1.0, seed=seed, prefix=prefix
    )


def make_negative(
    instruction: Instruction,
    positive: Trajectory,
    strategy: NegativeStrategy | None,
    env_factory: Callable[[], Environment],
    policy: Policy,
    budget: Budget,
    seed: int = 0,
    max_retries: int = 8,
) -> Trajectory:
    """Build a trajectory that verifiably does worse than the positive.

    Acceptance requires a different serialization AND a strictly lower
    oracle reward; seeds are re-drawn on each retry. With ``strategy``
    None each attempt draws from the default strategy mix.
    """
    oracle = OracleReward(env_factory)
    positive_line = serialize_trajectory(positive)
    positive_reward = oracle.score(instruction, positive)
    for attempt in range(max_retries):
        rng = random.Random(f"{seed}|{attempt}|{instruction.text}")
        chosen = strategy or choose_strategy(rng)
        candidate = _attempt(
            instruction, positive, chosen, env_factory, policy, budget, rng,
            seed=seed + 1000 * (attempt + 1),
        )
        if candidate is None:
            continue
        stripped = _strip_reward(candidate)
        if serialize_trajectory(stripped) == positive_line:
            continue
        if oracle.score(instruction, stripped) < positive_reward:
            return stripped
    raise NegativeConstructionFailedError(
        f"no acceptable negative for {instruction.text!r} "
        f"after {max_retries} attempts (strategies: {', '.join(NEGATIVE_KINDS)})"
    )


def _strip_reward(t: Trajectory) -> Trajectory:
    if t.oracle_reward is None:
        return t
    return Trajectory(t.instruction, t.initial_observation, t.steps, t.terminal, None)
