"""Hashed features: FNV-1a vectors, tokenization, and exact cancellation."""

from __future__ import annotations

import random

import numpy as np
import pytest

from rewardplan.core.types import Instruction
from rewardplan.reward.features import (
    DEFAULT_DIMENSION,
    RECIPE_VERSION,
    FeatureVector,
    Featurizer,
    fnv1a_64,
    tokenize,
)
from tests.conftest import make_trajectory
from tests.oracles import fnv1a_64_reference, random_pair, random_words


class TestFnv1a:
    def test_published_vectors(self):
        assert fnv1a_64(b"") == 0xCBF29CE484222325
        assert fnv1a_64(b"a") == 0xAF63DC4C8601EC8C
        assert fnv1a_64(b"foobar") == 0x85944171F73967E8

    def test_matches_independent_reimplementation(self):
        rng = random.Random(0)
        for _ in range(50):
            data = bytes(rng.randrange(256) for _ in range(rng.randint(0, 40)))
            assert fnv1a_64(data) == fnv1a_64_reference(data)

    def test_stays_in_64_bits(self):
        assert 0 <= fnv1a_64(b"x" * 1000) < 2**64


class TestTokenize:
    def test_lowercases_and_splits_punctuation(self):
        assert tokenize("Red, SPEAKER! 6w") == ("red", "speaker", "6w")

    def test_underscore_separates(self):
        assert tokenize("left_annotation") == ("left", "annotation")

    def test_empty(self):
        assert tokenize("... !!") == ()


class TestFeaturizer:
    def test_dimension_must_be_power_of_two(self):
        Featurizer(dimension=2**10)
        with pytest.raises(ValueError):
            Featurizer(dimension=1000)

    def test_unknown_recipe_rejected(self):
        with pytest.raises(ValueError):
            Featurizer(recipe="some-other-recipe")
        assert Featurizer().recipe == RECIPE_VERSION

    def test_expected_indices_from_documented_recipe(self):
        f = Featurizer()
        t = make_trajectory(instruction="go", o0="red speaker", steps=(("buy now", "done"),))
        vector = f.featurize(Instruction(text="go", id="i"), t)
        expected_tokens = [
            "i:go",
            "o:red", "o:speaker", "o:red_speaker",
            "a:buy", "a:now", "a:buy_now",
            "o:done",
        ]
        expected = {}
        for token in expected_tokens:
            index = fnv1a_64_reference(token.encode()) % DEFAULT_DIMENSION
            expected[index] = expected.get(index, 0.0) + 1.0
        assert vector.counts == expected

    def test_deterministic_and_sorted_arrays(self):
        f = Featurizer()
        rng = random.Random(1)
        for _ in range(10):
            t = make_trajectory(
                instruction=random_words(rng),
                o0=random_words(rng),
                steps=((random_words(rng), random_words(rng)),),
            )
            instruction = Instruction(text=t.instruction.text, id="i")
            a, b = f.featurize(instruction, t), f.featurize(instruction, t)
            assert a == b and a.counts == b.counts
            indices, values = a.arrays()
            assert list(indices) == sorted(a.counts)
            assert indices.dtype == np.int64 and values.dtype == np.float64
            assert (values > 0).all()

    def test_counts_accumulate_on_repetition(self):
        f = Featurizer()
        t = make_trajectory(instruction="x", o0="echo echo echo")
        vector = f.featurize(Instruction(text="x", id="i"), t)
        assert 3.0 in vector.counts.values()  # o:echo unigram
        assert 2.0 in vector.counts.values()  # o:echo_echo bigram


class TestFeatureVector:
    def test_index_bounds_validated(self):
        with pytest.raises(ValueError):
            FeatureVector(dimension=8, counts={8: 1.0})
        with pytest.raises(ValueError):
            FeatureVector(dimension=8, counts={-1: 1.0})

    def test_non_positive_counts_rejected(self):
        with pytest.raises(ValueError):
            FeatureVector(dimension=8, counts={3: 0.0})


class TestDifference:
    def test_identical_trajectories_cancel_completely(self):
        f = Featurizer()
        t = make_trajectory(o0="same", steps=(("a", "b"),), terminal=True)
        instruction = Instruction(text="anything", id="i")
        indices, values = f.featurize_difference(instruction, t, t)
        assert indices.size == 0 and values.size == 0

    def test_instruction_features_always_cancel(self):
        f = Featurizer()
        instruction = Instruction(text="unique instruction phrasing here", id="i")
        pos = make_trajectory(o0="one", terminal=True)
        neg = make_trajectory(o0="two", terminal=True)
        indices, _ = f.featurize_difference(instruction, pos, neg)
        for token in ("i:unique", "i:instruction", "i:unique_instruction"):
            assert fnv1a_64_reference(token.encode()) % f.dimension not in indices

    def test_difference_equals_dense_subtraction(self):
        f = Featurizer(dimension=2**12)
        rng = random.Random(5)
        for _ in range(20):
            pair = random_pair(rng)
            plus = f.featurize(pair.instruction, pair.positive)
            minus = f.featurize(pair.instruction, pair.negative)
            dense = np.zeros(f.dimension)
            for i, c in plus.counts.items():
                dense[i] += c
            for i, c in minus.counts.items():
                dense[i] -= c
            indices, values = f.featurize_difference(pair.instruction, pair.positive, pair.negative)
            sparse = np.zeros(f.dimension)
            sparse[indices] = values
            assert (sparse == dense).all()
            assert (values != 0).all(), "exact cancellations must be dropped"
