"""Experiment orchestration: wiring configs into runs and run directories.

A run directory is self-describing: the effective config snapshot (with
``${ENV:...}`` placeholders kept unresolved), the seed list, and the code
version are enough to reproduce its metrics CSV byte-for-byte with
deterministic policies and reward backends.

Randomness is split into named sub-streams — ``planner`` for search,
``datagen`` for instruction/dataset generation, ``policy`` for backends
that take construction-time seeds — so varying one component's seed never
perturbs another. The built-in policies draw per-step randomness from the
planner's rollout seeds, which are already namespaced per (seed, step,
observation), so the harness currently consumes the first two streams.
"""

from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from importlib import resources
from pathlib import Path

from rewardplan import __version__
from rewardplan.core.serialize import trajectory_to_obj
from rewardplan.core.types import Instruction
from rewardplan.datagen.synthesize import synthesize_game24_instructions
from rewardplan.datagen.solvers import ScriptMapPolicy
from rewardplan.envs.game24 import Game24Env, puzzle_from_text
from rewardplan.envs.shop import Catalog, ShopEnv, load_catalog, load_goals
from rewardplan.errors import ConfigError, RewardPlanError
from rewardplan.harness.config import EnvironmentSpec, PolicySpec, RewardSpec, RunConfig
from rewardplan.planners.suite import (
    CSV_COLUMNS,
    MetricsTable,
    RunRecord,
    Task,
    evaluate_one,
)
from rewardplan.policy.backends import RandomPolicy
from rewardplan.policy.base import Policy, PromptTemplate
from rewardplan.policy.remote import ChatCompletionsClient, RemotePolicy
from rewardplan.reward.backends import (
    CompositeReward,
    JudgeReward,
    LearnedReward,
    OracleReward,
    RemoteReward,
    RewardBackend,
)
from rewardplan.reward.model import load_params

SEED_STREAMS = ("policy", "datagen", "planner")

SNAPSHOT_NAME = "config.toml"
RUN_META_NAME = "run.json"
TRAJECTORIES_NAME = "trajectories.jsonl"
METRICS_NAME = "metrics.csv"
TABLE_NAME = "table.txt"


def seed_substream(name: str, seed: int) -> int:
    """Derive an independent 31-bit seed for one named component."""
    if name not in SEED_STREAMS:
        raise ValueError(f"unknown seed stream {name!r}; expected one of {SEED_STREAMS}")
    digest = hashlib.blake2b(f"{name}|{seed}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") % (2**31)


def code_version() -> str:
    return __version__


def asset_text(relative: str) -> str:
    """Read a packaged asset (prompt template or fixture) as text."""
    return resources.files("rewardplan.assets").joinpath(relative).read_text(encoding="utf-8")


def default_policy_template(environment_kind: str) -> PromptTemplate:
    return PromptTemplate.from_text(asset_text(f"prompts/policy_{environment_kind}.txt"))


def default_judge_template() -> PromptTemplate:
    return PromptTemplate.from_text(asset_text("prompts/judge.txt"))


def build_tasks(spec: EnvironmentSpec) -> tuple[tuple[Task, ...], "EnvFactory"]:
    """Task suite plus the environment factory the suite shares."""
    if spec.kind == "game24":
        return _build_game24_tasks(spec)
    return _build_shop_tasks(spec)


class EnvFactory:
    """Zero-argument environment constructor shared by a task suite."""

    def __init__(self, kind: str, catalog: Catalog | None = None, goals: dict | None = None):
        self.kind = kind
        self.catalog = catalog
        self.goals = goals

    def __call__(self):
        if self.kind == "game24":
            return Game24Env()
        return ShopEnv(self.catalog, self.goals)


def _build_game24_tasks(spec: EnvironmentSpec) -> tuple[tuple[Task, ...], EnvFactory]:
    if spec.puzzles and spec.suite_size:
        raise ConfigError("[environment] give either puzzles or suite_size, not both")
    factory = EnvFactory("game24")
    tasks: list[Task] = []
    if spec.puzzles:
        for i, text in enumerate(spec.puzzles):
            try:
                puzzle_from_text(text)
            except RewardPlanError as exc:
                raise ConfigError(f"[environment].puzzles[{i}] {text!r}: {exc}") from exc
            task_id = f"g24-{i:04d}"
            tasks.append(Task(task_id, Instruction(text=text, id=task_id), factory))
    else:
        generated = synthesize_game24_instructions(
            spec.suite_size,
            seed=seed_substream("datagen", spec.suite_seed),
            solvable_only=spec.solvable_only,
        )
        for raw in generated:
            tasks.append(Task(raw.id, Instruction(text=raw.text, id=raw.id), factory))
    return tuple(tasks), factory


def _build_shop_tasks(spec: EnvironmentSpec) -> tuple[tuple[Task, ...], EnvFactory]:
    catalog = load_catalog(str(spec.catalog))
    goals = load_goals(str(spec.goals))
    if not goals:
        raise ConfigError(f"[environment].goals {spec.goals} contains no goals")
    factory = EnvFactory("shop", catalog, goals)
    tasks = tuple(
        Task(f"shop-{i:04d}", Instruction(text=text, id=f"shop-{i:04d}"), factory)
        for i, text in enumerate(goals)
    )
    return tasks, factory


def build_policy(spec: PolicySpec, environment_kind: str) -> Policy:
    if spec.kind == "random":
        return RandomPolicy()
    if spec.kind == "scripted":
        with open(spec.scripts, encoding="utf-8") as f:
            raw = json.load(f)
        if not isinstance(raw, dict) or not all(
            isinstance(k, str) and isinstance(v, list) for k, v in raw.items()
        ):
            raise ConfigError(f"[policy].scripts {spec.scripts} must map instruction -> action list")
        return ScriptMapPolicy({k: tuple(str(a) for a in v) for k, v in raw.items()})
    client = ChatCompletionsClient(
        spec.url, spec.model, auth_env=spec.auth_env, max_tokens=spec.max_tokens
    )
    if spec.template is not None:
        template = PromptTemplate.from_file(str(spec.template))
    else:
        template = default_policy_template(environment_kind)
    return RemotePolicy(client, template)


def build_reward(spec: RewardSpec, env_factory: EnvFactory) -> RewardBackend:
    base: RewardBackend
    if spec.kind == "oracle":
        base = OracleReward(env_factory)
    elif spec.kind == "learned":
        base = LearnedReward(load_params(str(spec.model_path)))
    elif spec.kind == "judge":
        client = ChatCompletionsClient(spec.target, spec.judge_model)
        if spec.judge_template is not None:
            template = PromptTemplate.from_file(str(spec.judge_template))
        else:
            template = default_judge_template()
        base = JudgeReward(client, template)
    else:
        base = RemoteReward(spec.target)
    if spec.lambda_length > 0 or spec.mu_price > 0:
        return CompositeReward(base, spec.lambda_length, spec.mu_price)
    return base


def run_id_for(snapshot: str, seeds: tuple[int, ...], version: str) -> str:
    payload = snapshot.encode() + b"|" + json.dumps(list(seeds)).encode() + b"|" + version.encode()
    return hashlib.sha256(payload).hexdigest()[:12]


def plan_run(config: RunConfig, snapshot: str, out_dir: Path) -> MetricsTable:
    """Execute the configured suite and write a complete run directory.

    Jobs fan out over a bounded thread pool; results are merged back in
    (task, seed) order by a single writer, so output bytes do not depend
    on scheduling.
    """
    tasks, env_factory = build_tasks(config.environment)
    policy = build_policy(config.policy, config.environment.kind)
    reward = build_reward(config.reward, env_factory)

    jobs = [
        (task, seed)
        for task in tasks
        for seed in config.seeds
    ]

    def run_job(job: tuple[Task, int]) -> tuple[RunRecord, dict]:
        task, seed = job
        record, result = evaluate_one(
            task, config.planner, policy, reward, config.budget,
            seed=seed_substream("planner", seed),
        )
        # The CSV seed column reports the config seed the row belongs to,
        # not the derived planner stream value.
        record = replace(record, seed=seed)
        envelope = {
            "task_id": task.id,
            "seed": seed,
            "reward": record.reward,
            "trajectory": trajectory_to_obj(result.best),
        }
        return record, envelope

    workers = min(config.workers, len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_job, jobs))
    else:
        outcomes = [run_job(job) for job in jobs]

    table = MetricsTable(tuple(record for record, _ in outcomes))
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / SNAPSHOT_NAME).write_text(snapshot, encoding="utf-8")
    meta = {
        "run_id": run_id_for(snapshot, config.seeds, code_version()),
        "seeds": list(config.seeds),
        "code_version": code_version(),
        "environment": config.environment.kind,
        "planner": config.planner.label(),
        "reward_backend": config.reward.backend,
        "tasks": len(tasks),
    }
    (out_dir / RUN_META_NAME).write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    with open(out_dir / TRAJECTORIES_NAME, "w", encoding="utf-8") as f:
        for _, envelope in outcomes:
            f.write(json.dumps(envelope, ensure_ascii=False, separators=(",", ":")) + "\n")
    (out_dir / METRICS_NAME).write_text(table.to_csv(), encoding="utf-8")
    (out_dir / TABLE_NAME).write_text(table.render(), encoding="utf-8")
    return table


def read_metrics_csv(path: Path) -> tuple[RunRecord, ...]:
    """Parse a metrics CSV back into records (inverse of to_csv)."""
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
            raise ConfigError(f"{path} does not have the metrics CSV header {CSV_COLUMNS}")
        records = []
        for row in reader:
            records.append(RunRecord(
                task_id=row["task_id"],
                planner=row["planner"],
                reward_backend=row["reward_backend"],
                seed=int(row["seed"]),
                reward=float(row["reward"]),
                success=bool(int(row["success"])),
                actions=int(row["actions"]),
                price=None if row["price"] == "" else float(row["price"]),
                trajectories_used=int(row["trajectories_used"]),
            ))
    return tuple(records)


def merge_run_dirs(dirs: list[Path]) -> tuple[MetricsTable, int]:
    """Concatenate run metrics, deduplicating directories by run id.

    Returns the merged table and how many duplicate directories were
    skipped.
    """
    seen: set[str] = set()
    records: list[RunRecord] = []
    duplicates = 0
    for run_dir in dirs:
        meta_path = run_dir / RUN_META_NAME
        metrics_path = run_dir / METRICS_NAME
        if not metrics_path.exists():
            raise ConfigError(f"run directory {run_dir} is missing {METRICS_NAME}")
        if meta_path.exists():
            try:
                run_id = str(json.loads(meta_path.read_text(encoding="utf-8"))["run_id"])
            except (json.JSONDecodeError, KeyError) as exc:
                raise ConfigError(f"run directory {run_dir} has a malformed {RUN_META_NAME}") from exc
        else:
            raise ConfigError(f"run directory {run_dir} is missing {RUN_META_NAME}")
        if run_id in seen:
            duplicates += 1
            continue
        seen.add(run_id)
        records.extend(read_metrics_csv(metrics_path))
    return MetricsTable(tuple(records)), duplicates
