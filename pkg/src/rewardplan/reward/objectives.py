"""Reference forms of the training objectives.

These are the single-example definitions the trainer's batched kernels
must agree with; tests difference them against finite differences.
"""

from __future__ import annotations

import numpy as np

from rewardplan.core.types import Instruction, Trajectory
from rewardplan.reward.dataset import PreferencePair
from rewardplan.reward.features import Featurizer
from rewardplan.reward.kernels import _sigmoid, _softplus, dot_sparse
from rewardplan.reward.model import RewardParams, score


def pair_delta(
    params: RewardParams,
    pair: PreferencePair,
    featurizer: Featurizer | None = None,
    backend: str | None = None,
) -> float:
    """Δ = R(x,h+) − R(x,h−); the bias cancels exactly."""
    featurizer = featurizer or Featurizer(params.dimension)
    indices, values = featurizer.featurize_difference(
        pair.instruction, pair.positive, pair.negative
    )
    return dot_sparse(params.weights, indices, values, backend)


def pairwise_loss(
    params: RewardParams,
    pair: PreferencePair,
    featurizer: Featurizer | None = None,
    backend: str | None = None,
) -> float:
    """−log σ(Δ), computed as softplus(−Δ) so both tails stay finite."""
    return _softplus(-pair_delta(params, pair, featurizer, backend))


def pairwise_grad(
    params: RewardParams,
    pair: PreferencePair,
    featurizer: Featurizer | None = None,
    backend: str | None = None,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Sparse ∂L/∂w as (indices, values), plus ∂L/∂b (identically 0).

    ∂L/∂w = (σ(Δ) − 1) · (φ+ − φ−).
    """
    featurizer = featurizer or Featurizer(params.dimension)
    indices, values = featurizer.featurize_difference(
        pair.instruction, pair.positive, pair.negative
    )
    delta = dot_sparse(params.weights, indices, values, backend)
    coef = _sigmoid(delta) - 1.0
    return indices, coef * values, 0.0


def classification_loss(
    params: RewardParams,
    instruction: Instruction,
    trajectory: Trajectory,
    label: int,
    featurizer: Featurizer | None = None,
    backend: str | None = None,
) -> float:
    """Binary cross-entropy of σ(score) against a {0,1} label."""
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label!r}")
    z = score(params, instruction, trajectory, featurizer, backend)
    return label * _softplus(-z) + (1 - label) * _softplus(z)
