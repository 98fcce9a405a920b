"""Abstract contract every pluggable environment realizes.

Environments are single-owner mutable objects: planners that need to
branch must clone() first. All realizations are deterministic — the same
action sequence from reset always yields the same observation sequence.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Mapping

from rewardplan.core.types import Action, Instruction, Observation, TaskOutcome


class Environment(ABC):
    """Deterministic, cloneable episode state machine."""

    @abstractmethod
    def reset(self, instruction: Instruction) -> Observation:
        """Start a fresh episode for ``instruction`` and return o0."""

    @abstractmethod
    def valid_actions(self) -> tuple[Action, ...]:
        """Ordered actions the environment recognizes in the current state.

        Free-form environments still return a complete legal enumeration;
        policies may propose outside this list at their own risk (the step
        sentinel handles rejects).
        """

    @abstractmethod
    def step(self, action: Action) -> Observation:
        """Apply ``action``. Unrecognized actions return the sentinel
        observation and leave state unchanged; they never raise."""

    @abstractmethod
    def is_terminal(self) -> bool:
        """True once the episode cannot continue (absorbing)."""

    @abstractmethod
    def oracle_outcome(self) -> TaskOutcome:
        """Ground-truth outcome; only defined at terminal states."""

    @abstractmethod
    def clone(self) -> "Environment":
        """Independent deep copy; stepping the clone never mutates self."""

    def outcome_extras(self) -> Mapping[str, float]:
        """Environment-specific scalars for composite reward targets
        (e.g. purchase price). Empty by default."""
        return {}
