"""Training objectives: the pairwise loss/grad and the BCE reference."""

from __future__ import annotations

import math
import random

import numpy as np
import pytest

from rewardplan.core.types import Instruction
from rewardplan.reward.dataset import PreferencePair
from rewardplan.reward.features import Featurizer
from rewardplan.reward.model import RewardParams, score, zero_params
from rewardplan.reward.objectives import (
    classification_loss,
    pair_delta,
    pairwise_grad,
    pairwise_loss,
)
from tests.conftest import make_trajectory
from tests.oracles import finite_difference_grad, random_pair

DIMENSION = 2**12
FEATURIZER = Featurizer(dimension=DIMENSION)


def sample_params(rng: random.Random, scale: float = 0.1) -> RewardParams:
    weights = np.array([rng.gauss(0.0, scale) for _ in range(DIMENSION)])
    return RewardParams(weights, bias=rng.gauss(0.0, 1.0))


class TestPairwiseLoss:
    def test_loss_at_zero_delta_is_ln2(self):
        rng = random.Random(2)
        params = zero_params(DIMENSION)
        for _ in range(10):
            pair = random_pair(rng)
            assert pair_delta(params, pair, FEATURIZER) == 0.0
            assert abs(pairwise_loss(params, pair, FEATURIZER) - math.log(2)) < 1e-12

    def test_bias_cancels_exactly(self):
        rng = random.Random(3)
        pair = random_pair(rng)
        weights = np.array([rng.gauss(0, 0.2) for _ in range(DIMENSION)])
        low = RewardParams(weights.copy(), bias=0.0)
        high = RewardParams(weights.copy(), bias=123.456)
        assert pair_delta(low, pair, FEATURIZER) == pair_delta(high, pair, FEATURIZER)
        assert pairwise_loss(low, pair, FEATURIZER) == pairwise_loss(high, pair, FEATURIZER)

    def test_loss_decreases_as_delta_grows(self):
        rng = random.Random(4)
        pair = random_pair(rng, positive_marker="good", negative_marker="bad")
        indices, values = FEATURIZER.featurize_difference(
            pair.instruction, pair.positive, pair.negative
        )
        params = zero_params(DIMENSION)
        losses = []
        for step in (0.0, 0.5, 2.0):
            params.weights[:] = 0.0
            params.weights[indices] = step * np.sign(values)
            losses.append(pairwise_loss(params, pair, FEATURIZER))
        assert losses[0] > losses[1] > losses[2]

    def test_saturation_stays_finite(self):
        rng = random.Random(5)
        pair = random_pair(rng, positive_marker="good", negative_marker="bad")
        indices, values = FEATURIZER.featurize_difference(
            pair.instruction, pair.positive, pair.negative
        )
        params = zero_params(DIMENSION)
        params.weights[indices] = 1000.0 * np.sign(values)
        winning = pairwise_loss(params, pair, FEATURIZER)
        params.weights[indices] = -1000.0 * np.sign(values)
        losing = pairwise_loss(params, pair, FEATURIZER)
        assert 0.0 <= winning < 1e-6
        assert math.isfinite(losing) and losing > 100.0


class TestPairwiseGrad:
    def test_matches_finite_differences(self):
        rng = random.Random(6)
        for _ in range(20):
            params = sample_params(rng)
            pair = random_pair(rng)
            indices, values, bias_grad = pairwise_grad(params, pair, FEATURIZER)
            assert bias_grad == 0.0
            fd = finite_difference_grad(params, pair, FEATURIZER)
            for index, value in zip(indices, values):
                expected = fd[int(index)]
                assert abs(value - expected) <= 1e-5 * max(1.0, abs(expected))

    def test_grad_at_zero_is_half_negative_difference(self):
        rng = random.Random(7)
        pair = random_pair(rng)
        params = zero_params(DIMENSION)
        indices, values, _ = pairwise_grad(params, pair, FEATURIZER)
        diff_indices, diff_values = FEATURIZER.featurize_difference(
            pair.instruction, pair.positive, pair.negative
        )
        assert (indices == diff_indices).all()
        assert np.array_equal(values, -0.5 * diff_values)

    def test_grad_vanishes_when_saturated(self):
        rng = random.Random(8)
        pair = random_pair(rng, positive_marker="good", negative_marker="bad")
        diff_indices, diff_values = FEATURIZER.featurize_difference(
            pair.instruction, pair.positive, pair.negative
        )
        params = zero_params(DIMENSION)
        params.weights[diff_indices] = 500.0 * np.sign(diff_values)
        _, values, _ = pairwise_grad(params, pair, FEATURIZER)
        assert np.abs(values).max() < 1e-12


class TestClassificationLoss:
    def test_label_validation(self):
        pair = random_pair(random.Random(9))
        params = zero_params(DIMENSION)
        with pytest.raises(ValueError):
            classification_loss(params, pair.instruction, pair.positive, label=2, featurizer=FEATURIZER)
        with pytest.raises(ValueError):
            classification_loss(params, pair.instruction, pair.positive, label=0.5, featurizer=FEATURIZER)

    def test_matches_direct_bce(self):
        rng = random.Random(10)
        for _ in range(10):
            params = sample_params(rng)
            pair = random_pair(rng)
            z = score(params, pair.instruction, pair.positive, FEATURIZER)
            p = 1.0 / (1.0 + math.exp(-z))
            for label, expected in ((1, -math.log(p)), (0, -math.log(1.0 - p))):
                loss = classification_loss(
                    params, pair.instruction, pair.positive, label, FEATURIZER
                )
                assert abs(loss - expected) < 1e-9

    def test_zero_score_gives_ln2_for_both_labels(self):
        pair = random_pair(random.Random(11))
        params = zero_params(DIMENSION)
        for label in (0, 1):
            loss = classification_loss(params, pair.instruction, pair.positive, label, FEATURIZER)
            assert abs(loss - math.log(2)) < 1e-12

    def test_bias_shifts_classification_but_not_pairwise(self):
        pair = random_pair(random.Random(12))
        base = zero_params(DIMENSION)
        shifted = RewardParams(np.zeros(DIMENSION), bias=2.0)
        assert classification_loss(
            base, pair.instruction, pair.positive, 1, FEATURIZER
        ) != classification_loss(shifted, pair.instruction, pair.positive, 1, FEATURIZER)
        assert pairwise_loss(base, pair, FEATURIZER) == pairwise_loss(shifted, pair, FEATURIZER)


class TestPreferencePairType:
    def test_identical_sides_rejected(self):
        t = make_trajectory(steps=(("a", "o"),), terminal=True)
        with pytest.raises(ValueError):
            PreferencePair(Instruction(text="x", id="i"), t, t)
