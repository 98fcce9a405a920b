"""Data pipeline: synthesis, collection, refinement, negatives, emission."""

from __future__ import annotations

import hashlib
import re

import pytest

from rewardplan.core.serialize import serialize_trajectory
from rewardplan.core.types import Instruction
from rewardplan.datagen.negatives import make_negative
from rewardplan.datagen.pipeline import (
    build_dataset,
    collect_trajectories,
    generate_game24_dataset,
    generate_shop_dataset,
    refine_game24,
    refine_shop,
)
from rewardplan.datagen.solvers import Game24SolverPolicy, ScriptMapPolicy
from rewardplan.datagen.synthesize import (
    goal_instruction_text,
    synthesize_game24_instructions,
    synthesize_shop_goals,
)
from rewardplan.datagen.types import (
    NegativeStrategy,
    RawInstruction,
    RefinedInstruction,
    SynthesisReport,
)
from rewardplan.envs.game24 import Game24Env, Puzzle, oracle_solve
from rewardplan.envs.shop import ShopEnv, UserGoal
from rewardplan.errors import NegativeConstructionFailedError
from rewardplan.planners.rollout import rollout
from rewardplan.planners.types import Budget
from rewardplan.policy.backends import RandomPolicy
from rewardplan.reward.backends import OracleReward
from rewardplan.reward.dataset import read_pairs
from tests.conftest import TreeEnv

WALK = Instruction(text="walk the tree", id="walk")


def sha256_of(path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class TestValueTypes:
    def test_raw_instruction_validation(self):
        with pytest.raises(ValueError):
            RawInstruction(text="")
        with pytest.raises(ValueError):
            RawInstruction(text="x", provenance="handwritten")

    def test_refined_instruction_validation(self):
        with pytest.raises(ValueError):
            RefinedInstruction(text="", source_id="s")

    def test_negative_strategy_validation(self):
        with pytest.raises(ValueError):
            NegativeStrategy(kind="reverse")


class TestGame24Synthesis:
    def test_count_format_and_ids(self):
        out = synthesize_game24_instructions(8, seed=3)
        assert len(out) == 8
        assert all(re.fullmatch(r"Input: \d+ \d+ \d+ \d+", r.text) for r in out)
        assert out[0].id == "g24-0000" and out[7].id == "g24-0007"
        assert all(r.provenance == "template" for r in out)

    def test_deterministic(self):
        a = synthesize_game24_instructions(10, seed=5)
        b = synthesize_game24_instructions(10, seed=5)
        assert a == b
        assert a != synthesize_game24_instructions(10, seed=6)

    def test_solvable_only_filters(self):
        out = synthesize_game24_instructions(10, seed=0, solvable_only=True)
        for raw in out:
            numbers = tuple(int(x) for x in raw.text.removeprefix("Input: ").split())
            assert oracle_solve(Puzzle(numbers)).solvable


class TestShopSynthesis:
    def test_goal_instruction_wording(self):
        goal = UserGoal(
            required_attributes=frozenset({"wireless"}),
            required_options=(("color", "red"),),
            price_cap_cents=4999,
        )
        assert goal_instruction_text(goal) == (
            "i need a wireless item with color red, and price lower than 49.99 dollars"
        )
        cap_only = UserGoal(frozenset(), (), 1000)
        assert goal_instruction_text(cap_only) == (
            "i need a matching item, and price lower than 10.00 dollars"
        )
        multi = UserGoal(frozenset({"wired", "compact"}), (), None)
        assert goal_instruction_text(multi) == "i need a compact wired item"

    def test_goals_are_satisfiable_by_their_scripts(self, catalog):
        synthesis = synthesize_shop_goals(catalog, 6, seed=1)
        assert len(synthesis.instructions) == 6
        for raw in synthesis.instructions:
            env = ShopEnv(catalog, synthesis.goals)
            instruction = Instruction(text=raw.text, id=raw.id)
            env.reset(instruction)
            for text in synthesis.scripts[raw.text]:
                env.step(env.valid_actions()[0].__class__(text))
            assert env.is_terminal()
            assert env.oracle_outcome().oracle_reward == 1.0

    def test_deterministic(self, catalog):
        a = synthesize_shop_goals(catalog, 5, seed=2)
        b = synthesize_shop_goals(catalog, 5, seed=2)
        assert a.instructions == b.instructions
        assert a.scripts == b.scripts


class TestCollect:
    def test_collects_one_rollout_per_instruction(self):
        instructions = synthesize_game24_instructions(4, seed=0, solvable_only=True)
        report = SynthesisReport()
        out = collect_trajectories(
            instructions, Game24SolverPolicy(), Game24Env, Budget(), report=report
        )
        assert len(out) == 4
        assert report.trajectories_collected == 4
        assert report.collection_failures == 0
        for _, trajectory in out:
            assert trajectory.terminal

    def test_failures_are_counted_not_raised(self):
        instructions = [
            RawInstruction(text="Input: 2 3 6 9", id="ok"),
            RawInstruction(text="Input: not a puzzle", id="broken"),
        ]
        report = SynthesisReport()
        out = collect_trajectories(
            instructions, Game24SolverPolicy(), Game24Env, Budget(), report=report
        )
        assert [raw.id for raw, _ in out] == ["ok"]
        assert report.collection_failures == 1
        assert report.trajectories_collected == 1


class TestRefine:
    def test_game24_refinement_is_identity(self):
        raw = RawInstruction(text="Input: 2 3 6 9", id="g")
        refined = refine_game24(raw, None)
        assert refined.text == raw.text and refined.source_id == "g"

    def test_shop_refinement_scores_one_on_its_trajectory(self, catalog):
        synthesis = synthesize_shop_goals(catalog, 3, seed=4)
        policy = ScriptMapPolicy(synthesis.scripts)
        collected = collect_trajectories(
            synthesis.instructions, policy,
            lambda: ShopEnv(catalog, synthesis.goals), Budget(),
        )
        for raw, positive in collected:
            refined, refined_goal = refine_shop(raw, positive, catalog, synthesis.goals)
            assert refined.text == goal_instruction_text(refined_goal)
            goals = {refined.text: refined_goal}
            env = ShopEnv(catalog, goals)
            env.reset(Instruction(text=refined.text, id="re"))
            for action in positive.actions:
                env.step(action)
            assert env.oracle_outcome().oracle_reward == 1.0

    def test_shop_refinement_requires_terminal(self, catalog):
        synthesis = synthesize_shop_goals(catalog, 1, seed=0)
        raw = synthesis.instructions[0]
        env = ShopEnv(catalog, synthesis.goals)
        o0 = env.reset(Instruction(text=raw.text, id=raw.id))
        from rewardplan.core.types import Trajectory

        partial = Trajectory(Instruction(text=raw.text, id=raw.id), o0, ())
        with pytest.raises(ValueError):
            refine_shop(raw, partial, catalog, synthesis.goals)


class TestMakeNegative:
    def positive_for(self, text: str):
        instruction = Instruction(text=text, id="g")
        trajectory = rollout(Game24Env(), instruction, Game24SolverPolicy(), Budget())
        assert trajectory.terminal
        return instruction, trajectory

    def test_negative_differs_and_scores_strictly_lower(self):
        instruction, positive = self.positive_for("Input: 2 3 6 9")
        negative = make_negative(
            instruction, positive, None, Game24Env, Game24SolverPolicy(), Budget()
        )
        assert serialize_trajectory(negative) != serialize_trajectory(positive)
        oracle = OracleReward(Game24Env)
        assert oracle.score(instruction, negative) < oracle.score(instruction, positive)

    def test_truncate_strategy_yields_prefix(self):
        instruction, positive = self.positive_for("Input: 2 3 6 9")
        negative = make_negative(
            instruction, positive, NegativeStrategy("truncate", index=1),
            Game24Env, Game24SolverPolicy(), Budget(),
        )
        assert negative.steps == positive.steps[:1]
        assert not negative.terminal

    def test_perturb_strategy_changes_chosen_action(self):
        instruction, positive = self.positive_for("Input: 2 3 6 9")
        negative = make_negative(
            instruction, positive, NegativeStrategy("perturb_action", index=0),
            Game24Env, Game24SolverPolicy(), Budget(),
        )
        assert negative.steps[0][0] != positive.steps[0][0]

    def test_diverge_strategy_keeps_prefix(self):
        instruction, positive = self.positive_for("Input: 2 3 6 9")
        negative = make_negative(
            instruction, positive, NegativeStrategy("diverge_random", index=1),
            Game24Env, Game24SolverPolicy(), Budget(), seed=5,
        )
        assert negative.steps[:1] == positive.steps[:1]

    def test_deterministic(self):
        instruction, positive = self.positive_for("Input: 2 3 6 9")
        lines = {
            serialize_trajectory(
                make_negative(instruction, positive, None, Game24Env,
                              Game24SolverPolicy(), Budget(), seed=7)
            )
            for _ in range(2)
        }
        assert len(lines) == 1

    def test_constant_reward_environment_fails_closed(self):
        env_factory = lambda: TreeEnv(depth=2, default_score=1.0)  # noqa: E731
        positive = rollout(env_factory(), WALK, RandomPolicy(), Budget())
        with pytest.raises(NegativeConstructionFailedError):
            make_negative(WALK, positive, NegativeStrategy("perturb_action"),
                          env_factory, RandomPolicy(), Budget(), max_retries=4)

    def test_truncation_rescues_constant_terminal_rewards(self):
        # Every complete walk scores 1.0, but truncated prefixes replay as
        # non-terminal (reward 0), so the default mix still finds a negative.
        env_factory = lambda: TreeEnv(depth=2, default_score=1.0)  # noqa: E731
        positive = rollout(env_factory(), WALK, RandomPolicy(), Budget())
        negative = make_negative(WALK, positive, None, env_factory,
                                 RandomPolicy(), Budget(), seed=0)
        assert not negative.terminal
        assert len(negative) < len(positive)

    def test_empty_positive_cannot_be_negated(self):
        env_factory = lambda: TreeEnv(depth=2)  # noqa: E731
        env = env_factory()
        o0 = env.reset(WALK)
        from rewardplan.core.types import Trajectory

        empty = Trajectory(WALK, o0, ())
        with pytest.raises(NegativeConstructionFailedError):
            make_negative(WALK, empty, None, env_factory, RandomPolicy(), Budget())


class TestBuildDataset:
    def items_for(self, n: int):
        items = []
        for i in range(n):
            text = "Input: 2 3 6 9"
            instruction = Instruction(text=text, id=f"g{i}")
            positive = rollout(Game24Env(), instruction, Game24SolverPolicy(),
                               Budget(), seed=i)
            negative = make_negative(instruction, positive, None, Game24Env,
                                     Game24SolverPolicy(), Budget(), seed=i)
            items.append((RefinedInstruction(text=text, source_id=f"g{i}"),
                          positive, negative))
        return items

    def test_writes_readable_pairs(self, tmp_path):
        out = tmp_path / "pairs.jsonl"
        items = self.items_for(2)
        report = build_dataset(items, str(out))
        assert report.pairs_emitted == len(list(read_pairs(str(out))))
        pairs = list(read_pairs(str(out)))
        assert pairs[0].meta.get("source") == "g0"

    def test_identical_sides_are_rejected(self, tmp_path):
        out = tmp_path / "pairs.jsonl"
        items = self.items_for(1)
        refined, positive, _ = items[0]
        report = build_dataset([(refined, positive, positive)], str(out))
        assert report.validation_rejects == 1
        assert report.pairs_emitted == 0

    def test_duplicates_are_dropped(self, tmp_path):
        out = tmp_path / "pairs.jsonl"
        items = self.items_for(1)
        report = build_dataset(items * 3, str(out))
        assert report.duplicates_dropped == 2
        assert report.pairs_emitted == 1


class TestSynthesisReport:
    def test_conserved_chain_passes(self):
        report = SynthesisReport(
            instructions_proposed=10, collection_failures=2, trajectories_collected=8,
            refinement_failures=1, instructions_refined=7,
            negative_failures=3, negatives_built=4,
            duplicates_dropped=1, validation_rejects=1, pairs_emitted=2,
        )
        report.check()

    @pytest.mark.parametrize(
        ("field", "stage"),
        [("trajectories_collected", "proposed"),
         ("instructions_refined", "collected"),
         ("negatives_built", "refined"),
         ("pairs_emitted", "negatives")],
    )
    def test_leaks_raise_with_stage_name(self, field, stage):
        report = SynthesisReport(
            instructions_proposed=4, trajectories_collected=4,
            instructions_refined=4, negatives_built=4, pairs_emitted=4,
        )
        setattr(report, field, getattr(report, field) - 1)
        with pytest.raises(AssertionError, match=stage):
            report.check()


class TestEndToEnd:
    def test_game24_pipeline(self, tmp_path):
        out = tmp_path / "g24.jsonl"
        report = generate_game24_dataset(6, str(out), seed=0)
        report.check()
        assert report.pairs_emitted >= 4
        pairs = list(read_pairs(str(out)))
        assert len(pairs) == report.pairs_emitted
        oracle = OracleReward(Game24Env)
        for pair in pairs:
            pos = oracle.score(pair.instruction, pair.positive)
            neg = oracle.score(pair.instruction, pair.negative)
            assert pos == 1.0 and neg < pos

    def test_game24_pipeline_is_reproducible(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        generate_game24_dataset(5, str(a), seed=9)
        generate_game24_dataset(5, str(b), seed=9)
        assert sha256_of(a) == sha256_of(b)
        c = tmp_path / "c.jsonl"
        generate_game24_dataset(5, str(c), seed=10)
        assert sha256_of(c) != sha256_of(a)

    def test_shop_pipeline(self, catalog, tmp_path):
        out = tmp_path / "shop.jsonl"
        report, goals = generate_shop_dataset(catalog, 5, str(out), seed=0)
        report.check()
        assert report.pairs_emitted >= 3
        pairs = list(read_pairs(str(out)))
        for pair in pairs:
            assert pair.instruction.text in goals
            env = ShopEnv(catalog, goals)
            env.reset(pair.instruction)
            for action in pair.positive.actions:
                env.step(action)
            assert env.oracle_outcome().oracle_reward == 1.0

    def test_shop_pipeline_is_reproducible(self, catalog, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        generate_shop_dataset(catalog, 4, str(a), seed=3)
        generate_shop_dataset(catalog, 4, str(b), seed=3)
        assert sha256_of(a) == sha256_of(b)
