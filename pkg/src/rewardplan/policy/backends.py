"""Deterministic local policy backends used for tests and desk-scale runs."""

from __future__ import annotations

import hashlib
import random
from collections.abc import Mapping, Sequence

from rewardplan.core.types import Action
from rewardplan.errors import NoValidActionsError
from rewardplan.policy.base import Policy, PolicyContext, Proposal


def _sub_rng(seed: int, step: int, last_observation: str) -> random.Random:
    """Stable per-step RNG: same (seed, step, observation) → same stream."""
    digest = hashlib.blake2b(
        f"{seed}|{step}|{last_observation}".encode(), digest_size=8
    ).digest()
    return random.Random(int.from_bytes(digest, "big"))


def _first_valid(ctx: PolicyContext) -> Action:
    if not ctx.valid_actions:
        raise NoValidActionsError("no valid actions to fall back on")
    return ctx.valid_actions[0]


class ScriptedPolicy(Policy):
    """Table lookup from the latest observation text to an action.

    Observations not in the table fall back to the first valid action, so
    partially scripted episodes stay total.
    """

    def __init__(self, table: Mapping[str, str], free_form: bool = False):
        self._table = dict(table)
        self._free_form = free_form

    def propose(self, ctx: PolicyContext, k: int = 1) -> tuple[Proposal, ...]:
        key = ctx.trajectory_so_far.final_observation.text
        text = self._table.get(key)
        if text is None:
            return (Proposal(_first_valid(ctx)),)
        return (Proposal(Action(text), free_form=self._free_form),)


class SequencePolicy(Policy):
    """Plays a fixed action list by step index, then falls back."""

    def __init__(self, actions: Sequence[str], free_form: bool = False):
        self._actions = tuple(actions)
        self._free_form = free_form

    def propose(self, ctx: PolicyContext, k: int = 1) -> tuple[Proposal, ...]:
        i = len(ctx.trajectory_so_far)
        if i < len(self._actions):
            return (Proposal(Action(self._actions[i]), free_form=self._free_form),)
        return (Proposal(_first_valid(ctx)),)


class SeedBankPolicy(Policy):
    """A bank of scripts; the context seed picks which one plays.

    Lets a test arrange, e.g., that only rollout #3 of a best-of-n run
    follows the solving script.
    """

    def __init__(self, bank: Sequence[Sequence[str]], free_form: bool = False):
        if not bank:
            raise ValueError("bank must be non-empty")
        self._bank = tuple(tuple(script) for script in bank)
        self._free_form = free_form

    def propose(self, ctx: PolicyContext, k: int = 1) -> tuple[Proposal, ...]:
        script = self._bank[ctx.seed % len(self._bank)]
        i = len(ctx.trajectory_so_far)
        if i < len(script):
            return (Proposal(Action(script[i]), free_form=self._free_form),)
        return (Proposal(_first_valid(ctx)),)


class TrialScriptedPolicy(Policy):
    """One script per retry trial, selected by how many reflections have
    accumulated. Exercises episodic-memory plumbing in tests."""

    def __init__(self, scripts: Sequence[Sequence[str]], free_form: bool = False):
        if not scripts:
            raise ValueError("scripts must be non-empty")
        self._scripts = tuple(tuple(s) for s in scripts)
        self._free_form = free_form

    def propose(self, ctx: PolicyContext, k: int = 1) -> tuple[Proposal, ...]:
        trial = min(len(ctx.reflections), len(self._scripts) - 1)
        script = self._scripts[trial]
        i = len(ctx.trajectory_so_far)
        if i < len(script):
            return (Proposal(Action(script[i]), free_form=self._free_form),)
        return (Proposal(_first_valid(ctx)),)


class RandomPolicy(Policy):
    """Uniform seeded sampling over the valid actions.

    All actions share one base score, so temperature > 0 samples a
    reproducible permutation prefix and temperature 0 degenerates to the
    lexicographically first action (the argmax under the tie rule).
    """

    def propose(self, ctx: PolicyContext, k: int = 1) -> tuple[Proposal, ...]:
        if k < 1:
            raise ValueError("k must be >= 1")
        if not ctx.valid_actions:
            raise NoValidActionsError("random policy needs a non-empty action list")
        if ctx.temperature == 0:
            best = min(ctx.valid_actions, key=lambda a: a.text)
            return (Proposal(best),)
        rng = _sub_rng(
            ctx.seed, len(ctx.trajectory_so_far),
            ctx.trajectory_so_far.final_observation.text,
        )
        picked = rng.sample(list(ctx.valid_actions), min(k, len(ctx.valid_actions)))
        return tuple(Proposal(a) for a in picked)
