"""Single-episode rollout shared by every planner."""

from __future__ import annotations

from rewardplan.core.env import Environment
from rewardplan.core.types import Instruction, Trajectory, trajectory_append
from rewardplan.planners.types import Budget
from rewardplan.policy.base import Policy, PolicyContext


def rollout(
    env: Environment,
    instruction: Instruction,
    policy: Policy,
    budget: Budget,
    temperature: float = 1.0,
    seed: int = 0,
    reflections: tuple[str, ...] = (),
    prefix: Trajectory | None = None,
) -> Trajectory:
    """Propose-and-step until the environment is terminal or the action cap.

    With ``prefix`` the environment must already be at the prefix's state
    and the episode continues from there (the cap counts prefix actions).
    Invalid actions draw the sentinel observation and still consume a step,
    so episodes always finish.
    """
    if prefix is None:
        o0 = env.reset(instruction)
        trajectory = Trajectory(instruction, o0, (), terminal=env.is_terminal())
    else:
        trajectory = prefix
    while not env.is_terminal() and len(trajectory) < budget.max_actions_per_trajectory:
        ctx = PolicyContext(
            instruction=instruction,
            trajectory_so_far=trajectory,
            valid_actions=env.valid_actions(),
            temperature=temperature,
            seed=seed,
            reflections=reflections,
        )
        action = policy.propose(ctx, k=1)[0].action
        observation = env.step(action)
        trajectory = trajectory_append(
            trajectory,
            action,
            observation,
            terminal=env.is_terminal(),
            max_actions=budget.max_actions_per_trajectory,
        )
    return trajectory
