"""Preference-pair dataset: the JSONL schema the trainer consumes."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from rewardplan.core.serialize import (
    serialize_trajectory,
    trajectory_from_obj,
    trajectory_to_obj,
)
from rewardplan.core.types import Instruction, Trajectory
from rewardplan.errors import ParseError


@dataclass(frozen=True)
class PreferencePair:
    """One training example: h+ should outscore h− for instruction x."""

    instruction: Instruction
    positive: Trajectory
    negative: Trajectory
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if serialize_trajectory(self.positive) == serialize_trajectory(self.negative):
            raise ValueError("positive and negative trajectories are identical")


def pair_to_obj(pair: PreferencePair) -> dict:
    return {
        "instruction": pair.instruction.text,
        "positive": trajectory_to_obj(pair.positive),
        "negative": trajectory_to_obj(pair.negative),
        "meta": pair.meta,
    }


def pair_to_line(pair: PreferencePair) -> str:
    return json.dumps(pair_to_obj(pair), ensure_ascii=False, separators=(",", ":"))


def pair_from_line(line: str, lineno: int | None = None) -> PreferencePair:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", line=lineno, offset=e.pos) from e
    if not isinstance(obj, dict):
        raise ParseError("pair line is not a JSON object", line=lineno)
    for key in ("instruction", "positive", "negative"):
        if key not in obj:
            raise ParseError(f"pair missing field {key!r}", line=lineno)
    positive = trajectory_from_obj(obj["positive"], lineno=lineno)
    negative = trajectory_from_obj(obj["negative"], lineno=lineno)
    try:
        return PreferencePair(
            instruction=Instruction(text=str(obj["instruction"]), id=positive.instruction.id),
            positive=positive,
            negative=negative,
            meta=dict(obj.get("meta", {})),
        )
    except ValueError as e:
        raise ParseError(f"invalid pair: {e}", line=lineno) from e


def write_pairs(path, pairs: Iterable[PreferencePair]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as f:
        for pair in pairs:
            f.write(pair_to_line(pair) + "\n")
            n += 1
    return n


def read_pairs(path) -> Iterator[PreferencePair]:
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if line:
                yield pair_from_line(line, lineno=lineno)
