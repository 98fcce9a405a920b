"""Linear reward model: parameters, scoring, and the model file format."""

from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from rewardplan.core.types import Instruction, Trajectory
from rewardplan.errors import DimensionMismatchError, ParseError
from rewardplan.reward.features import RECIPE_VERSION, Featurizer
from rewardplan.reward.kernels import dot_sparse


@dataclass
class RewardParams:
    """θ: a dense weight vector plus bias over the hashed feature space."""

    weights: np.ndarray
    bias: float = 0.0
    recipe: str = RECIPE_VERSION
    train_meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.ndim != 1:
            raise ValueError("weights must be one-dimensional")
        if not np.all(np.isfinite(self.weights)) or not np.isfinite(self.bias):
            raise ValueError("parameters must be finite")

    @property
    def dimension(self) -> int:
        return int(self.weights.size)


def zero_params(dimension: int) -> RewardParams:
    return RewardParams(np.zeros(dimension, dtype=np.float64))


def score(
    params: RewardParams,
    instruction: Instruction,
    trajectory: Trajectory,
    featurizer: Featurizer | None = None,
    backend: str | None = None,
) -> float:
    """R_θ(x, h) = w · φ(x, h) + b."""
    featurizer = featurizer or Featurizer(params.dimension)
    if featurizer.dimension != params.dimension:
        raise DimensionMismatchError(
            f"featurizer dimension {featurizer.dimension} != model dimension {params.dimension}"
        )
    if featurizer.recipe != params.recipe:
        raise DimensionMismatchError(
            f"featurizer recipe {featurizer.recipe!r} != model recipe {params.recipe!r}"
        )
    indices, values = featurizer.featurize(instruction, trajectory).arrays()
    return dot_sparse(params.weights, indices, values, backend) + params.bias


def _digest(weights: np.ndarray, bias: float) -> str:
    h = hashlib.sha256()
    h.update(weights.astype("<f8").tobytes())
    h.update(np.float64(bias).astype("<f8").tobytes())
    return h.hexdigest()


def save_params(params: RewardParams, path: str) -> None:
    """Write the model file; identical parameters give identical bytes."""
    obj = {
        "bias": float(params.bias),
        "digest": _digest(params.weights, params.bias),
        "dimension": params.dimension,
        "recipe": params.recipe,
        "train_meta": params.train_meta,
        "weights_b64": base64.b64encode(params.weights.astype("<f8").tobytes()).decode("ascii"),
    }
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")


def load_params(path: str) -> RewardParams:
    with open(path, encoding="utf-8") as f:
        try:
            obj = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(f"model file is not valid JSON: {e.msg}", offset=e.pos) from e
    for key in ("bias", "digest", "dimension", "recipe", "weights_b64"):
        if key not in obj:
            raise ParseError(f"model file missing field {key!r}")
    weights = np.frombuffer(
        base64.b64decode(obj["weights_b64"]), dtype="<f8"
    ).astype(np.float64)
    if weights.size != obj["dimension"]:
        raise DimensionMismatchError(
            f"weight vector length {weights.size} != declared dimension {obj['dimension']}"
        )
    if _digest(weights, float(obj["bias"])) != obj["digest"]:
        raise ParseError("model file digest mismatch (corrupted or edited)")
    return RewardParams(
        weights=weights,
        bias=float(obj["bias"]),
        recipe=str(obj["recipe"]),
        train_meta=dict(obj.get("train_meta", {})),
    )
