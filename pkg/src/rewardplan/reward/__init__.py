"""Reward modeling: hashed features, pairwise training, scoring backends."""

from rewardplan.reward.backends import (
    CompositeReward,
    JudgeReward,
    LearnedReward,
    OracleReward,
    RemoteReward,
    RewardBackend,
    composite_score,
    llm_judge_score,
    parse_judge_score,
    remote_score,
)
from rewardplan.reward.dataset import (
    PreferencePair,
    pair_from_line,
    pair_to_line,
    read_pairs,
    write_pairs,
)
from rewardplan.reward.features import (
    DEFAULT_DIMENSION,
    FeatureVector,
    Featurizer,
    fnv1a_64,
)
from rewardplan.reward.kernels import (
    BACKEND_ENV,
    HAS_NUMBA,
    available_backends,
    resolve_backend,
)
from rewardplan.reward.model import (
    RewardParams,
    load_params,
    save_params,
    score,
    zero_params,
)
from rewardplan.reward.objectives import (
    classification_loss,
    pair_delta,
    pairwise_grad,
    pairwise_loss,
)
from rewardplan.reward.train import (
    TARGET_CLASSIFICATION,
    TARGET_PAIRWISE,
    TrainConfig,
    eval_pairwise_accuracy,
    train,
)

__all__ = [
    "BACKEND_ENV",
    "CompositeReward",
    "DEFAULT_DIMENSION",
    "FeatureVector",
    "Featurizer",
    "HAS_NUMBA",
    "JudgeReward",
    "LearnedReward",
    "OracleReward",
    "PreferencePair",
    "RemoteReward",
    "RewardBackend",
    "RewardParams",
    "TARGET_CLASSIFICATION",
    "TARGET_PAIRWISE",
    "TrainConfig",
    "available_backends",
    "classification_loss",
    "composite_score",
    "eval_pairwise_accuracy",
    "fnv1a_64",
    "llm_judge_score",
    "load_params",
    "pair_delta",
    "pair_from_line",
    "pair_to_line",
    "pairwise_grad",
    "pairwise_loss",
    "parse_judge_score",
    "read_pairs",
    "remote_score",
    "resolve_backend",
    "save_params",
    "score",
    "train",
    "write_pairs",
    "zero_params",
]
