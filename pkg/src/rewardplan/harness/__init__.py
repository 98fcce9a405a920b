"""Config-driven experiment harness: CLI, run directories, reporting."""

from rewardplan.harness.config import (
    EnvironmentSpec,
    EvalSpec,
    PolicySpec,
    RewardSpec,
    RunConfig,
    SynthesizeSpec,
    TrainSpec,
    emit_toml,
    interpolate_document,
    interpolate_env,
    load_document,
    parse_eval,
    parse_reward_backend,
    parse_run_config,
    parse_synthesize,
    parse_train,
)
from rewardplan.harness.runs import (
    build_policy,
    build_reward,
    build_tasks,
    code_version,
    merge_run_dirs,
    plan_run,
    read_metrics_csv,
    run_id_for,
    seed_substream,
)

__all__ = [
    "EnvironmentSpec",
    "EvalSpec",
    "PolicySpec",
    "RewardSpec",
    "RunConfig",
    "SynthesizeSpec",
    "TrainSpec",
    "build_policy",
    "build_reward",
    "build_tasks",
    "code_version",
    "emit_toml",
    "interpolate_document",
    "interpolate_env",
    "load_document",
    "merge_run_dirs",
    "parse_eval",
    "parse_reward_backend",
    "parse_run_config",
    "parse_synthesize",
    "parse_train",
    "plan_run",
    "read_metrics_csv",
    "run_id_for",
    "seed_substream",
]
