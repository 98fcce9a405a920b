"""Planners: rollout, sampling/greedy/best-of-n, reflexion, tree search, suites."""

from __future__ import annotations

import math

import pytest

from rewardplan.core.types import (
    INVALID_ACTION_OBSERVATION,
    Instruction,
    Trajectory,
    trajectory_append,
)
from rewardplan.errors import ConfigError
from rewardplan.planners.basic import run_best_of_n, run_greedy, run_sampling
from rewardplan.planners.mcts import mcts_search, run_mcts, state_fingerprint
from rewardplan.planners.reflexion import run_reflexion
from rewardplan.planners.rollout import rollout
from rewardplan.planners.suite import (
    CSV_COLUMNS,
    MetricsTable,
    PlannerSpec,
    Task,
    evaluate_one,
    evaluate_suite,
)
from rewardplan.planners.types import GAME24_BUDGET, Budget, PlanResult, argmax_result
from rewardplan.policy.backends import (
    RandomPolicy,
    ScriptedPolicy,
    SeedBankPolicy,
    SequencePolicy,
    TrialScriptedPolicy,
)
from rewardplan.reward.backends import OracleReward, RewardBackend
from tests.conftest import TreeEnv, make_trajectory

WALK = Instruction(text="walk the tree", id="walk")


def oracle_for(**env_kwargs) -> OracleReward:
    return OracleReward(lambda: TreeEnv(**env_kwargs))


def action_texts(trajectory: Trajectory) -> tuple[str, ...]:
    return tuple(a.text for a in trajectory.actions)


class ConstantReward(RewardBackend):
    """Scores by a fixed observation-text table (for lying-backend tests)."""

    name = "constant"

    def __init__(self, table: dict[str, float], default: float = 0.0):
        self._table = dict(table)
        self._default = default

    def score(self, instruction, trajectory, extras=None) -> float:
        return self._table.get(trajectory.final_observation.text, self._default)


class TestBudgetAndResult:
    def test_budget_defaults_and_validation(self):
        b = Budget()
        assert (b.max_trajectories, b.max_actions_per_trajectory, b.top_k_actions) == (10, 10, 10)
        assert GAME24_BUDGET.max_trajectories == 100
        for bad in (
            dict(max_trajectories=0),
            dict(max_actions_per_trajectory=0),
            dict(top_k_actions=-1),
        ):
            with pytest.raises(ValueError):
                Budget(**bad)

    def test_plan_result_validation(self):
        t = make_trajectory()
        with pytest.raises(ValueError):
            PlanResult(t, 0.5, ((t, 0.5),), trajectories_used=0)
        stranger = make_trajectory(o0="elsewhere")
        with pytest.raises(ValueError):
            PlanResult(stranger, 0.5, ((t, 0.5),), trajectories_used=1)

    def test_argmax_earliest_tie(self):
        ts = [make_trajectory(o0=f"s{i}") for i in range(4)]
        result = argmax_result([(ts[0], 0.2), (ts[1], 0.9), (ts[2], 0.9), (ts[3], 0.1)])
        assert result.best is ts[1]
        assert result.best_score == 0.9
        assert result.trajectories_used == 4


class TestRollout:
    def test_runs_to_terminal(self):
        env = TreeEnv(depth=3)
        t = rollout(env, WALK, RandomPolicy(), Budget(), seed=0)
        assert t.terminal and len(t) == 3
        assert t.initial_observation.text == "at the root"

    def test_action_cap_stops_nonterminal(self):
        env = TreeEnv(depth=8)
        t = rollout(env, WALK, RandomPolicy(), Budget(max_actions_per_trajectory=3))
        assert len(t) == 3 and not t.terminal

    def test_invalid_actions_consume_budget(self):
        env = TreeEnv(depth=2)
        policy = SequencePolicy(("fly", "swim", "dig", "burrow"))
        t = rollout(env, WALK, policy, Budget(max_actions_per_trajectory=4))
        assert len(t) == 4 and not t.terminal
        assert all(o.text == INVALID_ACTION_OBSERVATION for _, o in t.steps)

    def test_prefix_continues_episode(self):
        env = TreeEnv(depth=3)
        o0 = env.reset(WALK)
        obs = env.step(env.valid_actions()[0])
        prefix = trajectory_append(
            Trajectory(WALK, o0, ()), env.valid_actions()[0], obs, terminal=False
        )
        t = rollout(env, WALK, RandomPolicy(), Budget(), prefix=prefix, seed=1)
        assert t.terminal and len(t) == 3
        assert t.steps[0] == prefix.steps[0]

    def test_cap_counts_prefix_actions(self):
        env = TreeEnv(depth=5)
        env.reset(WALK)
        o = env.step(env.valid_actions()[0])
        prefix = trajectory_append(
            Trajectory(WALK, o, ()), env.valid_actions()[0], o, terminal=False
        )
        t = rollout(env, WALK, RandomPolicy(), Budget(max_actions_per_trajectory=2), prefix=prefix)
        assert len(t) == 2 and not t.terminal

    def test_determinism(self):
        runs = [
            rollout(TreeEnv(depth=4, actions=("a", "b", "c")), WALK, RandomPolicy(),
                    Budget(), seed=7)
            for _ in range(2)
        ]
        assert action_texts(runs[0]) == action_texts(runs[1])


class TestSamplingAndGreedy:
    def test_sampling_equals_best_of_one(self):
        reward = oracle_for(depth=2, leaf_scores={("a", "a"): 1.0})
        s = run_sampling(TreeEnv(depth=2), WALK, RandomPolicy(), reward, Budget(), seed=3)
        b = run_best_of_n(TreeEnv(depth=2), WALK, RandomPolicy(), reward, 1, Budget(), seed=3)
        assert action_texts(s.best) == action_texts(b.best)
        assert s.best_score == b.best_score
        assert s.trajectories_used == b.trajectories_used == 1

    def test_greedy_picks_lexicographic_min_at_zero_temperature(self):
        reward = oracle_for(depth=2, actions=("b", "a", "c"))
        result = run_greedy(TreeEnv(depth=2, actions=("b", "a", "c")), WALK,
                            RandomPolicy(), reward, Budget())
        assert action_texts(result.best) == ("a", "a")
        assert result.trajectories_used == 1

    def test_missing_reward_scores_nan(self):
        result = run_greedy(TreeEnv(depth=1), WALK, RandomPolicy(), None, Budget())
        assert math.isnan(result.best_score)
        sampled = run_sampling(TreeEnv(depth=1), WALK, RandomPolicy(), None, Budget())
        assert math.isnan(sampled.best_score)


class TestBestOfN:
    def test_uses_exactly_n_rollouts(self):
        reward = oracle_for(depth=2)
        result = run_best_of_n(TreeEnv(depth=2), WALK, RandomPolicy(), reward, 5, Budget())
        assert result.trajectories_used == 5
        assert len(result.explored) == 5

    def test_n_must_fit_budget(self):
        reward = oracle_for(depth=2)
        with pytest.raises(ConfigError):
            run_best_of_n(TreeEnv(depth=2), WALK, RandomPolicy(), reward, 11, Budget())
        with pytest.raises(ConfigError):
            run_best_of_n(TreeEnv(depth=2), WALK, RandomPolicy(), reward, 0, Budget())

    def test_seed_determinism(self):
        reward = oracle_for(depth=3, leaf_scores={("a", "a", "b"): 1.0})
        runs = [
            run_best_of_n(TreeEnv(depth=3, leaf_scores={("a", "a", "b"): 1.0}),
                          WALK, RandomPolicy(), reward, 6, Budget(), seed=11)
            for _ in range(2)
        ]
        assert [s for _, s in runs[0].explored] == [s for _, s in runs[1].explored]
        assert action_texts(runs[0].best) == action_texts(runs[1].best)

    def test_ties_go_to_earliest_rollout(self):
        bank = [("a", "a"), ("b", "b"), ("a", "b")]
        policy = SeedBankPolicy(bank)
        reward = oracle_for(depth=2, default_score=0.5)
        result = run_best_of_n(TreeEnv(depth=2, default_score=0.5), WALK,
                               policy, reward, 3, Budget(), seed=0)
        assert [s for _, s in result.explored] == [0.5, 0.5, 0.5]
        assert action_texts(result.best) == bank[0]

    def test_score_monotone_in_n(self):
        scores = {("a", "a"): 1.0, ("a", "b"): 0.3}
        reward = oracle_for(depth=2, leaf_scores=scores)
        best = [
            run_best_of_n(TreeEnv(depth=2, leaf_scores=scores), WALK,
                          RandomPolicy(), reward, n, Budget(), seed=0).best_score
            for n in range(1, 7)
        ]
        assert best == sorted(best)


class TestReflexion:
    def test_score_equal_to_threshold_does_not_stop(self):
        reward = oracle_for(depth=1, actions=("a",), default_score=0.5)
        env = TreeEnv(depth=1, actions=("a",), default_score=0.5)
        result = run_reflexion(env, WALK, RandomPolicy(), reward, Budget(),
                               max_trials=3, threshold=0.5)
        assert result.trajectories_used == 3

    def test_score_above_threshold_stops_immediately(self):
        reward = oracle_for(depth=1, actions=("a",), default_score=0.5)
        env = TreeEnv(depth=1, actions=("a",), default_score=0.5)
        result = run_reflexion(env, WALK, RandomPolicy(), reward, Budget(),
                               max_trials=3, threshold=0.49)
        assert result.trajectories_used == 1
        assert result.best_score == 0.5

    def test_reflection_memory_reaches_policy(self):
        scores = {("b", "b"): 1.0}
        policy = TrialScriptedPolicy([("a", "a"), ("b", "b")])
        reward = oracle_for(depth=2, leaf_scores=scores)
        result = run_reflexion(TreeEnv(depth=2, leaf_scores=scores), WALK,
                               policy, reward, Budget(), max_trials=5)
        assert result.trajectories_used == 2
        assert result.best_score == 1.0
        assert action_texts(result.best) == ("b", "b")
        assert [s for _, s in result.explored] == [0.0, 1.0]

    def test_custom_reflector_sees_failed_trial(self):
        seen: list[tuple[str, float]] = []

        def reflector(instruction, trajectory, score):
            seen.append((action_texts(trajectory)[0], score))
            return "try the other branch"

        scores = {("b", "b"): 1.0}
        policy = TrialScriptedPolicy([("a", "a"), ("b", "b")])
        reward = oracle_for(depth=2, leaf_scores=scores)
        run_reflexion(TreeEnv(depth=2, leaf_scores=scores), WALK, policy, reward,
                      Budget(), max_trials=5, reflector=reflector)
        assert seen == [("a", 0.0)]

    @pytest.mark.parametrize(
        ("rule", "expected"), [("last", 0.5), ("first", 0.2), ("best", 0.9)]
    )
    def test_selection_rule_on_exhaustion(self, rule, expected):
        scores = {("a", "a"): 0.2, ("b", "b"): 0.9, ("a", "b"): 0.5}
        policy = TrialScriptedPolicy([("a", "a"), ("b", "b"), ("a", "b")])
        reward = oracle_for(depth=2, leaf_scores=scores)
        result = run_reflexion(TreeEnv(depth=2, leaf_scores=scores), WALK,
                               policy, reward, Budget(), max_trials=3,
                               threshold=2.0, selection_rule=rule)
        assert result.trajectories_used == 3
        assert result.best_score == expected

    def test_trials_capped_by_budget(self):
        reward = oracle_for(depth=2)
        result = run_reflexion(TreeEnv(depth=2), WALK, RandomPolicy(), reward,
                               Budget(max_trajectories=2), max_trials=10, threshold=2.0)
        assert result.trajectories_used == 2

    def test_config_validation(self):
        reward = oracle_for(depth=2)
        with pytest.raises(ConfigError):
            run_reflexion(TreeEnv(depth=2), WALK, RandomPolicy(), reward, Budget(),
                          max_trials=0)
        with pytest.raises(ConfigError):
            run_reflexion(TreeEnv(depth=2), WALK, RandomPolicy(), reward, Budget(),
                          selection_rule="median")


class TestMCTS:
    def test_single_simulation_budget(self):
        reward = oracle_for(depth=2)
        result = run_mcts(TreeEnv(depth=2), WALK, RandomPolicy(), reward,
                          Budget(max_trajectories=1))
        assert result.trajectories_used == 1

    def test_budget_is_respected(self):
        reward = oracle_for(depth=3, actions=("a", "b", "c"))
        result = run_mcts(TreeEnv(depth=3, actions=("a", "b", "c")), WALK,
                          RandomPolicy(), reward, Budget(max_trajectories=7))
        assert 1 <= result.trajectories_used <= 7

    def test_backup_invariants(self):
        scores = {("a", "a"): 1.0, ("a", "b"): 0.4}
        reward = oracle_for(depth=2, leaf_scores=scores)
        result, root = mcts_search(TreeEnv(depth=2, leaf_scores=scores), WALK,
                                   RandomPolicy(), reward, Budget(max_trajectories=4))
        assert root.visits == sum(c.visits for c in root.children.values())
        assert root.visits == result.trajectories_used == len(result.explored)
        assert root.value == result.best_score == max(s for _, s in result.explored)

        def check(node):
            for child in node.children.values():
                assert node.value >= child.value
                if child.children:
                    assert child.visits == 1 + sum(
                        g.visits for g in child.children.values()
                    )
                check(child)

        check(root)

    def test_exhaustion_stops_before_budget(self):
        # 2 actions × depth 2 → 4 leaves. Two root expansions each roll out
        # to some leaf, then the four leaves are expanded explicitly; after
        # that the tree is exhausted and the remaining budget is untouched.
        reward = oracle_for(depth=2)
        result, root = mcts_search(TreeEnv(depth=2), WALK, RandomPolicy(), reward,
                                   Budget(max_trajectories=100))
        assert result.trajectories_used == 6
        assert root.exhausted
        assert len({action_texts(t) for t, _ in result.explored}) == 4

    def test_finds_best_leaf_when_tree_fits_budget(self):
        scores = {("b", "a"): 1.0}
        reward = oracle_for(depth=2, leaf_scores=scores)
        result = run_mcts(TreeEnv(depth=2, leaf_scores=scores), WALK,
                          RandomPolicy(), reward, Budget(max_trajectories=10))
        assert result.best_score == 1.0
        assert action_texts(result.best) == ("b", "a")

    def test_exploration_constant_steers_selection(self):
        # All leaves under "a" win; with c=0 the search keeps exploiting the
        # winning child, while a large c revisits the losing one.
        scores = {p: 1.0 for p in
                  [("a", x, y) for x in "ab" for y in "ab"]}
        kwargs = dict(depth=3, leaf_scores=scores)
        reward = oracle_for(**kwargs)
        _, greedy_root = mcts_search(TreeEnv(**kwargs), WALK, RandomPolicy(), reward,
                                     Budget(max_trajectories=4), exploration_c=0.0)
        _, roaming_root = mcts_search(TreeEnv(**kwargs), WALK, RandomPolicy(), reward,
                                      Budget(max_trajectories=4), exploration_c=10.0)
        assert greedy_root.children["a"].visits == 3
        assert greedy_root.children["b"].visits == 1
        assert roaming_root.children["b"].visits == 2

    def test_determinism(self):
        scores = {("a", "b", "a"): 1.0}
        reward = oracle_for(depth=3, leaf_scores=scores)
        runs = [
            run_mcts(TreeEnv(depth=3, leaf_scores=scores), WALK, RandomPolicy(),
                     reward, Budget(max_trajectories=6), seed=9)
            for _ in range(2)
        ]
        assert [s for _, s in runs[0].explored] == [s for _, s in runs[1].explored]
        assert action_texts(runs[0].best) == action_texts(runs[1].best)

    def test_already_terminal_environment_rejected(self):
        reward = oracle_for(depth=0)
        with pytest.raises(ConfigError):
            run_mcts(TreeEnv(depth=0), WALK, RandomPolicy(), reward, Budget())

    def test_fingerprint_hashes_observation_sequence(self):
        a = state_fingerprint(make_trajectory(o0="ab", steps=(("x", "c"),)))
        b = state_fingerprint(make_trajectory(o0="a", steps=(("x", "bc"),)))
        assert a != b  # boundaries matter, not just concatenation
        assert len(a) == 16 and set(a) <= set("0123456789abcdef")
        same_obs = state_fingerprint(make_trajectory(o0="ab", steps=(("y", "c"),)))
        assert same_obs == a  # actions are not part of state identity


class TestSuite:
    def test_planner_spec_validation_and_labels(self):
        with pytest.raises(ConfigError):
            PlannerSpec(kind="dfs")
        assert PlannerSpec(kind="bon", n=7).label() == "bon7"
        assert PlannerSpec(kind="mcts").label() == "mcts"

    def test_metrics_come_from_ground_truth_not_guiding_backend(self):
        scores = {("a", "a"): 1.0}
        liar = ConstantReward({"at b/b": 1.0})  # prefers the truly failing path
        task = Task("t0", WALK, lambda: TreeEnv(depth=2, leaf_scores=scores))
        policy = SeedBankPolicy([("a", "a"), ("b", "b")])
        record, result = evaluate_one(task, PlannerSpec(kind="bon", n=2),
                                      policy, liar, Budget(), seed=0)
        assert action_texts(result.best) == ("b", "b")  # the liar's pick
        assert record.reward == 0.0 and record.success is False
        assert record.reward_backend == "constant"
        assert record.actions == 2
        assert record.price is None
        assert record.trajectories_used == 2

    def test_suite_cross_product_and_csv(self, tree_env_factory):
        factory = tree_env_factory(depth=2, leaf_scores={("a", "a"): 1.0})
        tasks = [Task("t0", WALK, factory), Task("t1", WALK, factory)]
        reward = OracleReward(factory)
        table = evaluate_suite(tasks, PlannerSpec(kind="bon", n=4), RandomPolicy(),
                               reward, Budget(), seeds=[0, 1])
        assert len(table.records) == 4
        csv_text = table.to_csv()
        lines = csv_text.splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 5
        assert all(line.split(",")[7] == "" for line in lines[1:])  # no price column
        rendered = table.render()
        assert "Planner" in rendered and "Reward↑" in rendered and "bon4" in rendered

    def test_empty_suite_rejected(self, tree_env_factory):
        factory = tree_env_factory(depth=2)
        reward = OracleReward(factory)
        with pytest.raises(ConfigError):
            evaluate_suite([], PlannerSpec(kind="sampling"), RandomPolicy(),
                           reward, Budget(), seeds=[0])
        with pytest.raises(ConfigError):
            evaluate_suite([Task("t0", WALK, factory)], PlannerSpec(kind="sampling"),
                           RandomPolicy(), reward, Budget(), seeds=[])

    def test_all_planner_kinds_run(self, tree_env_factory):
        factory = tree_env_factory(depth=2, leaf_scores={("a", "a"): 1.0})
        reward = OracleReward(factory)
        for kind in ("sampling", "greedy", "bon", "reflexion", "mcts"):
            record, _ = evaluate_one(Task("t", WALK, factory), PlannerSpec(kind=kind, n=4),
                                     RandomPolicy(), reward, Budget(), seed=0)
            assert 0.0 <= record.reward <= 1.0

    def test_render_includes_price_for_priced_envs(self):
        record_fields = dict(task_id="t", planner="bon4", reward_backend="oracle",
                             seed=0, reward=1.0, success=True, actions=3,
                             trajectories_used=4)
        from rewardplan.planners.suite import RunRecord

        table = MetricsTable((RunRecord(price=12.5, **record_fields),
                              RunRecord(price=7.5, **record_fields)))
        assert "10.00" in table.render()
        assert "12.50" in table.to_csv()
