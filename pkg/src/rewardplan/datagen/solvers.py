"""Deterministic solver policies used to collect positive trajectories."""

from __future__ import annotations

from collections.abc import Mapping
from functools import lru_cache

from rewardplan.core.types import Action
from rewardplan.envs.game24 import puzzle_from_text, witness_actions
from rewardplan.errors import NoValidActionsError
from rewardplan.policy.base import Policy, PolicyContext, Proposal


@lru_cache(maxsize=4096)
def _witness_for(instruction_text: str) -> tuple[Action, ...]:
    return witness_actions(puzzle_from_text(instruction_text))


class Game24SolverPolicy(Policy):
    """Replays the search oracle's witness for solvable puzzles.

    Unsolvable puzzles (no witness) fall back to the first valid action,
    which can never reach 24.
    """

    def propose(self, ctx: PolicyContext, k: int = 1) -> tuple[Proposal, ...]:
        witness = _witness_for(ctx.instruction.text)
        i = len(ctx.trajectory_so_far)
        if i < len(witness):
            return (Proposal(witness[i], free_form=True),)
        if not ctx.valid_actions:
            raise NoValidActionsError("no witness step and no valid actions")
        return (Proposal(ctx.valid_actions[0]),)


class ScriptMapPolicy(Policy):
    """Plays a per-instruction action script (e.g. a known shopping route)."""

    def __init__(self, scripts: Mapping[str, tuple[str, ...]]):
        self._scripts = dict(scripts)

    def propose(self, ctx: PolicyContext, k: int = 1) -> tuple[Proposal, ...]:
        script = self._scripts.get(ctx.instruction.text, ())
        i = len(ctx.trajectory_so_far)
        if i < len(script):
            return (Proposal(Action(script[i]), free_form=True),)
        if not ctx.valid_actions:
            raise NoValidActionsError(f"script exhausted for {ctx.instruction.text!r}")
        return (Proposal(ctx.valid_actions[0]),)
