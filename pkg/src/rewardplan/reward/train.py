"""Mini-batch SGD training for the linear reward model."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from rewardplan.errors import (
    DimensionMismatchError,
    DivergenceDetectedError,
    EmptyDatasetError,
)
from rewardplan.reward.dataset import PreferencePair
from rewardplan.reward.features import DEFAULT_DIMENSION, Featurizer
from rewardplan.reward.kernels import (
    classification_epoch,
    pairwise_epoch,
    resolve_backend,
    sparse_scores,
)
from rewardplan.reward.model import RewardParams

TARGET_PAIRWISE = "pairwise"
TARGET_CLASSIFICATION = "classification"


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 32
    learning_rate: float = 0.1
    seed: int = 0
    target: str = TARGET_PAIRWISE
    dimension: int = DEFAULT_DIMENSION
    backend: str | None = None

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.target not in (TARGET_PAIRWISE, TARGET_CLASSIFICATION):
            raise ValueError(f"unknown training target {self.target!r}")


def _build_csr(rows: Sequence[tuple[np.ndarray, np.ndarray]]):
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    for j, (indices, _) in enumerate(rows):
        indptr[j + 1] = indptr[j] + indices.size
    total = int(indptr[-1])
    indices = np.empty(total, dtype=np.int64)
    values = np.empty(total, dtype=np.float64)
    for j, (idx, val) in enumerate(rows):
        indices[indptr[j] : indptr[j + 1]] = idx
        values[indptr[j] : indptr[j + 1]] = val
    return indptr, indices, values


def train(
    pairs: Sequence[PreferencePair], cfg: TrainConfig = TrainConfig()
) -> tuple[RewardParams, list[float]]:
    """Train θ on preference pairs; returns (params, per-epoch mean loss).

    The pairwise target optimizes −log σ(Δ) over feature differences with
    the bias frozen at 0 (it cancels in Δ). The classification target
    unrolls each pair into a positive and a negative labeled example and
    trains sigmoid BCE with a live bias.
    """
    if not pairs:
        raise EmptyDatasetError("cannot train on an empty dataset")
    backend = resolve_backend(cfg.backend)
    featurizer = Featurizer(cfg.dimension)
    weights = np.zeros(cfg.dimension, dtype=np.float64)
    bias = 0.0
    rng = np.random.default_rng(cfg.seed)
    history: list[float] = []

    if cfg.target == TARGET_PAIRWISE:
        rows = [
            featurizer.featurize_difference(p.instruction, p.positive, p.negative)
            for p in pairs
        ]
        indptr, indices, values = _build_csr(rows)
        for _ in range(cfg.epochs):
            order = rng.permutation(len(rows)).astype(np.int64)
            loss = pairwise_epoch(
                weights, indptr, indices, values, order,
                cfg.batch_size, cfg.learning_rate, backend,
            )
            if not math.isfinite(loss):
                raise DivergenceDetectedError(f"non-finite epoch loss {loss!r}")
            history.append(loss)
    else:
        rows = []
        labels = []
        for p in pairs:
            rows.append(featurizer.featurize(p.instruction, p.positive).arrays())
            labels.append(1.0)
            rows.append(featurizer.featurize(p.instruction, p.negative).arrays())
            labels.append(0.0)
        indptr, indices, values = _build_csr(rows)
        label_arr = np.array(labels, dtype=np.float64)
        for _ in range(cfg.epochs):
            order = rng.permutation(len(rows)).astype(np.int64)
            loss, bias = classification_epoch(
                weights, bias, indptr, indices, values, label_arr, order,
                cfg.batch_size, cfg.learning_rate, backend,
            )
            if not math.isfinite(loss):
                raise DivergenceDetectedError(f"non-finite epoch loss {loss!r}")
            history.append(loss)

    params = RewardParams(
        weights=weights,
        bias=bias,
        train_meta={
            "target": cfg.target,
            "epochs": cfg.epochs,
            "batch_size": cfg.batch_size,
            "learning_rate": cfg.learning_rate,
            "seed": cfg.seed,
            "backend": backend,
            "pairs": len(pairs),
        },
    )
    return params, history


def eval_pairwise_accuracy(
    params: RewardParams,
    pairs: Sequence[PreferencePair],
    featurizer: Featurizer | None = None,
    backend: str | None = None,
) -> float:
    """Fraction of pairs ranked correctly (Δ > 0); exact ties count as wrong."""
    if not pairs:
        raise EmptyDatasetError("cannot evaluate on an empty dataset")
    featurizer = featurizer or Featurizer(params.dimension)
    if featurizer.dimension != params.dimension:
        raise DimensionMismatchError(
            f"featurizer dimension {featurizer.dimension} != model dimension {params.dimension}"
        )
    if featurizer.recipe != params.recipe:
        raise DimensionMismatchError(
            f"featurizer recipe {featurizer.recipe!r} != model recipe {params.recipe!r}"
        )
    rows = [
        featurizer.featurize_difference(p.instruction, p.positive, p.negative)
        for p in pairs
    ]
    indptr, indices, values = _build_csr(rows)
    deltas = sparse_scores(params.weights, indptr, indices, values, backend)
    return float(np.count_nonzero(deltas > 0) / len(pairs))
