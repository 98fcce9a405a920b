"""Single-line JSON serialization for trajectories.

Schema (one object per line):
    {"instruction": str, "instruction_id": str, "o0": str,
     "steps": [{"a": str, "o": str}], "terminal": bool,
     "oracle_reward": number|null}

Field order is fixed so equal trajectories serialize to equal bytes.
Unknown fields on read are ignored for forward compatibility.
"""

from __future__ import annotations

import json
from typing import Iterable, Iterator

from rewardplan.core.types import Action, Instruction, Observation, Trajectory, validate_trajectory
from rewardplan.errors import ParseError


def trajectory_to_obj(t: Trajectory) -> dict:
    """The trajectory's JSON object form (field order fixed)."""
    return {
        "instruction": t.instruction.text,
        "instruction_id": t.instruction.id,
        "o0": t.initial_observation.text,
        "steps": [{"a": a.text, "o": o.text} for a, o in t.steps],
        "terminal": t.terminal,
        "oracle_reward": t.oracle_reward,
    }


def trajectory_from_obj(obj: object, lineno: int | None = None) -> Trajectory:
    """Build a Trajectory from its JSON object form; unknown fields ignored."""
    if not isinstance(obj, dict):
        raise ParseError("trajectory value is not a JSON object", line=lineno)
    violation = validate_trajectory(obj)
    if violation is not None:
        raise ParseError(f"invalid trajectory object: {violation}", line=lineno)
    try:
        steps = tuple(
            (Action(s["a"]), Observation(s["o"])) for s in obj["steps"]
        )
        reward = obj.get("oracle_reward")
        return Trajectory(
            instruction=Instruction(text=obj["instruction"], id=obj["instruction_id"]),
            initial_observation=Observation(obj["o0"]),
            steps=steps,
            terminal=bool(obj["terminal"]),
            oracle_reward=None if reward is None else float(reward),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"invalid trajectory object: {e}", line=lineno) from e


def serialize_trajectory(t: Trajectory) -> str:
    """Render ``t`` as one JSON line (no trailing newline)."""
    return json.dumps(trajectory_to_obj(t), ensure_ascii=False, separators=(",", ":"))


def deserialize_trajectory(line: str, lineno: int | None = None) -> Trajectory:
    """Parse one JSON line back into a Trajectory.

    Raises ParseError with line/offset context on malformed input.
    """
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", line=lineno, offset=e.pos) from e
    if not isinstance(obj, dict):
        raise ParseError("trajectory line is not a JSON object", line=lineno)
    return trajectory_from_obj(obj, lineno=lineno)


def write_trajectories(path, trajectories: Iterable[Trajectory]) -> int:
    """Write one JSON line per trajectory; returns the count written."""
    n = 0
    with open(path, "w", encoding="utf-8") as f:
        for t in trajectories:
            f.write(serialize_trajectory(t) + "\n")
            n += 1
    return n


def read_trajectories(path) -> Iterator[Trajectory]:
    """Yield trajectories from a JSONL file, skipping blank lines."""
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if line:
                yield deserialize_trajectory(line, lineno=lineno)
