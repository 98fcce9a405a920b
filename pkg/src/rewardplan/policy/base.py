"""Policy interfaces: proposal types, prompt rendering, ReAct parsing."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

from rewardplan.core.types import Action, Instruction, Trajectory
from rewardplan.errors import MissingActionError


@dataclass(frozen=True)
class PolicyContext:
    """Everything a backend may condition on for one proposal call.

    ``reflections`` carries episodic-memory text from retry loops; empty
    outside of them.
    """

    instruction: Instruction
    trajectory_so_far: Trajectory
    valid_actions: tuple[Action, ...]
    temperature: float = 1.0
    seed: int = 0
    reflections: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class Proposal:
    """A candidate action with a relative preference weight."""

    action: Action
    weight: float = 1.0
    thought: str | None = None
    free_form: bool = False  # action intentionally outside valid_actions

    def __post_init__(self) -> None:
        if self.weight <= 0:
            raise ValueError("proposal weight must be > 0")


class Policy(ABC):
    """Action-proposal backend queried by the planners."""

    @abstractmethod
    def propose(self, ctx: PolicyContext, k: int = 1) -> tuple[Proposal, ...]:
        """Up to k proposals, best first. Deterministic given (ctx, k) for
        local backends."""


def render_react(thought: str, action: Action) -> str:
    if thought:
        return f"Thought: {thought}\nAction: {action.text}"
    return f"Action: {action.text}"


def parse_react(text: str) -> tuple[str, Action]:
    """Extract the last Thought/Action segments from a completion.

    The action is trimmed to its first line; the thought is whatever sits
    between the last "Thought:" marker and the action marker (empty when
    absent).
    """
    action_at = text.rfind("Action:")
    if action_at < 0:
        raise MissingActionError(f"no 'Action:' segment in {text[:80]!r}")
    action_text = text[action_at + len("Action:") :].strip().splitlines()
    if not action_text or not action_text[0].strip():
        raise MissingActionError("'Action:' segment is empty")
    thought = ""
    thought_at = text.rfind("Thought:", 0, action_at)
    if thought_at >= 0:
        thought = text[thought_at + len("Thought:") : action_at].strip()
    return thought, Action(action_text[0].strip())


def render_transcript(trajectory: Trajectory) -> str:
    """Observation/Action lines in the transcript style prompts expect."""
    lines = [f"Observation: {trajectory.initial_observation.text}"]
    for action, observation in trajectory.steps:
        lines.append(f"Action: {action.text}")
        lines.append(f"Observation: {observation.text}")
    return "\n".join(lines)


@dataclass(frozen=True)
class PromptTemplate:
    """System text plus few-shot blocks; rendering is a pure function."""

    system: str
    few_shot: tuple[str, ...] = ()

    @classmethod
    def from_text(cls, text: str) -> "PromptTemplate":
        """Parse template text; blocks are separated by lines of '---'.

        The first block is the system text, the rest are few-shot blocks.
        """
        blocks = [b.strip() for b in text.split("\n---\n")]
        return cls(system=blocks[0], few_shot=tuple(b for b in blocks[1:] if b))

    @classmethod
    def from_file(cls, path: str) -> "PromptTemplate":
        """Load a template file in the ``from_text`` block format."""
        with open(path, encoding="utf-8") as f:
            return cls.from_text(f.read())

    def messages(self, task: str) -> list[dict[str, str]]:
        """Chat messages: one system turn, then few-shot + task as user."""
        parts = list(self.few_shot) + [task]
        return [
            {"role": "system", "content": self.system},
            {"role": "user", "content": "\n\n".join(parts)},
        ]


def render_policy_task(ctx: PolicyContext) -> str:
    """The per-step task section fed to a remote policy."""
    parts = [f"Instruction: {ctx.instruction.text}"]
    for i, reflection in enumerate(ctx.reflections, start=1):
        parts.append(f"Reflection {i}: {reflection}")
    parts.append(render_transcript(ctx.trajectory_so_far))
    if ctx.valid_actions:
        listed = "\n".join(f"- {a.text}" for a in ctx.valid_actions)
        parts.append(f"Valid actions:\n{listed}")
    parts.append("Reply with 'Thought: ...' then 'Action: ...'.")
    return "\n".join(parts)
