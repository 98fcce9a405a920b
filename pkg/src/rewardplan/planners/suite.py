"""Run planners over task suites and collect comparable metrics.

Planners select trajectories with whatever reward backend they were
given; the metrics columns (reward, success, price) always come from the
environment's ground truth so runs with different backends stay
comparable.
"""

from __future__ import annotations

import io
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

from rewardplan.core.env import Environment
from rewardplan.core.types import Instruction
from rewardplan.errors import ConfigError
from rewardplan.planners.basic import run_best_of_n, run_greedy, run_sampling
from rewardplan.planners.mcts import DEFAULT_EXPLORATION_C, run_mcts
from rewardplan.planners.reflexion import run_reflexion
from rewardplan.planners.types import Budget, PlanResult
from rewardplan.policy.base import Policy
from rewardplan.reward.backends import OracleReward, RewardBackend

PLANNER_KINDS = ("sampling", "greedy", "bon", "reflexion", "mcts")


@dataclass(frozen=True)
class PlannerSpec:
    kind: str
    n: int = 10
    max_trials: int = 10
    threshold: float = 0.99
    selection_rule: str = "last"
    exploration_c: float = DEFAULT_EXPLORATION_C

    def __post_init__(self) -> None:
        if self.kind not in PLANNER_KINDS:
            raise ConfigError(f"unknown planner {self.kind!r}; expected one of {PLANNER_KINDS}")

    def label(self) -> str:
        if self.kind == "bon":
            return f"bon{self.n}"
        return self.kind


def run_planner(
    spec: PlannerSpec,
    env: Environment,
    instruction: Instruction,
    policy: Policy,
    reward: RewardBackend,
    budget: Budget,
    seed: int = 0,
) -> PlanResult:
    if spec.kind == "sampling":
        return run_sampling(env, instruction, policy, reward, budget, seed)
    if spec.kind == "greedy":
        return run_greedy(env, instruction, policy, reward, budget, seed)
    if spec.kind == "bon":
        return run_best_of_n(env, instruction, policy, reward, spec.n, budget, seed)
    if spec.kind == "reflexion":
        return run_reflexion(
            env, instruction, policy, reward, budget,
            max_trials=spec.max_trials,
            threshold=spec.threshold,
            selection_rule=spec.selection_rule,
            seed=seed,
        )
    return run_mcts(env, instruction, policy, reward, budget, spec.exploration_c, seed)


@dataclass(frozen=True)
class Task:
    id: str
    instruction: Instruction
    env_factory: Callable[[], Environment]


@dataclass(frozen=True)
class RunRecord:
    task_id: str
    planner: str
    reward_backend: str
    seed: int
    reward: float
    success: bool
    actions: int
    price: float | None
    trajectories_used: int


CSV_COLUMNS = (
    "task_id", "planner", "reward_backend", "seed",
    "reward", "success", "actions", "price", "trajectories_used",
)


@dataclass(frozen=True)
class MetricsTable:
    records: tuple[RunRecord, ...]

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(",".join(CSV_COLUMNS) + "\n")
        for r in self.records:
            price = "" if r.price is None else f"{r.price:.2f}"
            out.write(
                f"{r.task_id},{r.planner},{r.reward_backend},{r.seed},"
                f"{r.reward:.6f},{int(r.success)},{r.actions},{price},"
                f"{r.trajectories_used}\n"
            )
        return out.getvalue()

    def render(self) -> str:
        """Aligned per-planner means (reward up, actions and price down)."""
        groups: dict[tuple[str, str], list[RunRecord]] = {}
        for r in self.records:
            groups.setdefault((r.planner, r.reward_backend), []).append(r)
        header = ("Planner", "Backend", "Reward↑", "Success↑", "Action↓", "Price↓", "Trajs")
        rows = [header]
        for (planner, backend), recs in sorted(groups.items()):
            n = len(recs)
            priced = [r.price for r in recs if r.price is not None]
            rows.append((
                planner,
                backend,
                f"{sum(r.reward for r in recs) / n:.4f}",
                f"{sum(r.success for r in recs) / n:.4f}",
                f"{sum(r.actions for r in recs) / n:.2f}",
                f"{sum(priced) / len(priced):.2f}" if priced else "-",
                f"{sum(r.trajectories_used for r in recs) / n:.1f}",
            ))
        widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
        lines = []
        for i, row in enumerate(rows):
            lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip())
            if i == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"


def evaluate_one(
    task: Task,
    spec: PlannerSpec,
    policy: Policy,
    reward: RewardBackend,
    budget: Budget,
    seed: int,
) -> tuple[RunRecord, PlanResult]:
    """Plan one task at one seed and score the pick against ground truth.

    The planner sees only ``reward``; the record's metrics come from
    replaying the selected trajectory in a fresh environment so runs with
    different guiding backends stay comparable.
    """
    result = run_planner(
        spec, task.env_factory(), task.instruction, policy, reward, budget, seed
    )
    oracle = OracleReward(task.env_factory)
    true_reward, extras = oracle.replay(task.instruction, result.best)
    price = extras.get("price")
    record = RunRecord(
        task_id=task.id,
        planner=spec.label(),
        reward_backend=reward.name,
        seed=seed,
        reward=true_reward,
        success=math.isclose(true_reward, 1.0),
        actions=len(result.best),
        price=price,
        trajectories_used=result.trajectories_used,
    )
    return record, result


def evaluate_suite(
    tasks: Sequence[Task],
    spec: PlannerSpec,
    policy: Policy,
    reward: RewardBackend,
    budget: Budget,
    seeds: Sequence[int],
) -> MetricsTable:
    """Cross product of tasks and seeds; one record per run."""
    if not tasks:
        raise ConfigError("task suite is empty")
    if not seeds:
        raise ConfigError("seed list is empty")
    records = []
    for task in tasks:
        for seed in seeds:
            record, _ = evaluate_one(task, spec, policy, reward, budget, seed)
            records.append(record)
    return MetricsTable(tuple(records))
