"""Hashed text features over (instruction, trajectory) pairs.

Stands in for a neural encoder: unigrams and adjacent bigrams from the
instruction, each action, and each observation, namespaced per field and
hashed with 64-bit FNV-1a into a fixed power-of-two dimension.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from rewardplan.core.types import Instruction, Trajectory

DEFAULT_DIMENSION = 2**16
RECIPE_VERSION = "fnv1a-unibi-1"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def fnv1a_64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


@lru_cache(maxsize=1 << 20)
def _hash_text(text: str) -> int:
    return fnv1a_64(text.encode("utf-8"))


def tokenize(text: str) -> tuple[str, ...]:
    """Lowercase alphanumeric runs; punctuation and whitespace separate."""
    return tuple(_TOKEN_RE.findall(text.lower()))


@dataclass(frozen=True)
class FeatureVector:
    dimension: int
    counts: dict[int, float] = field(compare=False)

    def __post_init__(self) -> None:
        for index, count in self.counts.items():
            if not 0 <= index < self.dimension:
                raise ValueError(f"index {index} outside dimension {self.dimension}")
            if count <= 0:
                raise ValueError(f"non-positive count at index {index}")

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Sorted (indices, values) arrays for kernel consumption."""
        indices = np.array(sorted(self.counts), dtype=np.int64)
        values = np.array([self.counts[i] for i in indices], dtype=np.float64)
        return indices, values


def _accumulate(counts: dict[int, float], namespace: str, text: str, dimension: int) -> None:
    tokens = tokenize(text)
    for token in tokens:
        index = _hash_text(f"{namespace}:{token}") % dimension
        counts[index] = counts.get(index, 0.0) + 1.0
    for a, b in zip(tokens, tokens[1:]):
        index = _hash_text(f"{namespace}:{a}_{b}") % dimension
        counts[index] = counts.get(index, 0.0) + 1.0


@dataclass(frozen=True)
class Featurizer:
    """Deterministic featurizer; equal inputs give equal vectors."""

    dimension: int = DEFAULT_DIMENSION
    recipe: str = RECIPE_VERSION

    def __post_init__(self) -> None:
        if self.dimension < 1 or self.dimension & (self.dimension - 1):
            raise ValueError(f"dimension must be a power of two, got {self.dimension}")
        if self.recipe != RECIPE_VERSION:
            raise ValueError(f"unknown feature recipe {self.recipe!r}")

    def featurize(self, instruction: Instruction, trajectory: Trajectory) -> FeatureVector:
        counts: dict[int, float] = {}
        _accumulate(counts, "i", instruction.text, self.dimension)
        _accumulate(counts, "o", trajectory.initial_observation.text, self.dimension)
        for action, observation in trajectory.steps:
            _accumulate(counts, "a", action.text, self.dimension)
            _accumulate(counts, "o", observation.text, self.dimension)
        return FeatureVector(self.dimension, counts)

    def featurize_difference(
        self, instruction: Instruction, positive: Trajectory, negative: Trajectory
    ) -> tuple[np.ndarray, np.ndarray]:
        """Sparse arrays of featurize(x,h+) − featurize(x,h−).

        Shared features (the instruction always, common prefixes usually)
        cancel exactly and are dropped.
        """
        plus = self.featurize(instruction, positive).counts
        minus = self.featurize(instruction, negative).counts
        diff: dict[int, float] = dict(plus)
        for index, count in minus.items():
            value = diff.get(index, 0.0) - count
            if value == 0.0:
                diff.pop(index, None)
            else:
                diff[index] = value
        indices = np.array(sorted(diff), dtype=np.int64)
        values = np.array([diff[i] for i in indices], dtype=np.float64)
        return indices, values
