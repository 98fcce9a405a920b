"""Planning algorithms: sampling, greedy, best-of-n, reflexion, MCTS."""

from rewardplan.planners.basic import run_best_of_n, run_greedy, run_sampling
from rewardplan.planners.mcts import (
    DEFAULT_EXPLORATION_C,
    SearchNode,
    mcts_search,
    run_mcts,
    state_fingerprint,
)
from rewardplan.planners.reflexion import ReflexionMemory, run_reflexion
from rewardplan.planners.rollout import rollout
from rewardplan.planners.suite import (
    CSV_COLUMNS,
    MetricsTable,
    PlannerSpec,
    RunRecord,
    Task,
    evaluate_one,
    evaluate_suite,
    run_planner,
)
from rewardplan.planners.types import GAME24_BUDGET, Budget, PlanResult, argmax_result

__all__ = [
    "Budget",
    "CSV_COLUMNS",
    "DEFAULT_EXPLORATION_C",
    "GAME24_BUDGET",
    "MetricsTable",
    "PlanResult",
    "PlannerSpec",
    "ReflexionMemory",
    "RunRecord",
    "SearchNode",
    "Task",
    "argmax_result",
    "evaluate_one",
    "evaluate_suite",
    "mcts_search",
    "rollout",
    "run_best_of_n",
    "run_greedy",
    "run_mcts",
    "run_planner",
    "run_reflexion",
    "run_sampling",
    "state_fingerprint",
]
