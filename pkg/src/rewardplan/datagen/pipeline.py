"""The end-to-end reward-data pipeline: synthesize, collect, refine,
negate, and emit pairwise training data."""

from __future__ import annotations

from collections.abc import Callable, Sequence

from rewardplan.core.env import Environment
from rewardplan.core.serialize import serialize_trajectory
from rewardplan.core.types import Instruction, Trajectory
from rewardplan.datagen.negatives import make_negative
from rewardplan.datagen.solvers import Game24SolverPolicy, ScriptMapPolicy
from rewardplan.datagen.synthesize import (
    goal_instruction_text,
    synthesize_game24_instructions,
    synthesize_shop_goals,
)
from rewardplan.datagen.types import RawInstruction, RefinedInstruction, SynthesisReport
from rewardplan.envs.game24 import Game24Env
from rewardplan.envs.shop import (
    Catalog,
    ShopEnv,
    ShopState,
    UserGoal,
    matching_reward,
)
from rewardplan.errors import (
    NegativeConstructionFailedError,
    RemoteError,
    RewardPlanError,
)
from rewardplan.planners.rollout import rollout
from rewardplan.planners.types import Budget
from rewardplan.policy.base import Policy, PromptTemplate, render_transcript
from rewardplan.policy.remote import ChatCompletionsClient
from rewardplan.reward.dataset import PreferencePair, pair_to_line, write_pairs


def collect_trajectories(
    instructions: Sequence[RawInstruction],
    policy: Policy,
    env_factory: Callable[[], Environment],
    budget: Budget,
    seed: int = 0,
    report: SynthesisReport | None = None,
) -> list[tuple[RawInstruction, Trajectory]]:
    """One temperature-1 rollout per instruction; failures are skipped
    and counted, never raised."""
    report = report if report is not None else SynthesisReport()
    out: list[tuple[RawInstruction, Trajectory]] = []
    for i, raw in enumerate(instructions):
        instruction = Instruction(text=raw.text, id=raw.id or f"raw-{i:04d}")
        try:
            trajectory = rollout(
                env_factory(), instruction, policy, budget, temperature=1.0, seed=seed + i
            )
        except RewardPlanError:
            report.collection_failures += 1
            continue
        report.trajectories_collected += 1
        out.append((raw, trajectory))
    return out


def refine_game24(raw: RawInstruction, trajectory: Trajectory) -> RefinedInstruction:
    """Game of 24 goals are fully determined by the puzzle: identity."""
    return RefinedInstruction(text=raw.text, source_id=raw.id)


def refine_shop(
    raw: RawInstruction,
    trajectory: Trajectory,
    catalog: Catalog,
    goals: dict[str, UserGoal],
) -> tuple[RefinedInstruction, UserGoal]:
    """Rewrite the goal to exactly what the trajectory bought.

    The refined goal requires (a sample of) the purchased product's own
    attributes, the options actually chosen, and a cap at the paid
    price, so the trajectory scores 1.0 under it by construction.
    """
    env = ShopEnv(catalog, goals)
    env.reset(Instruction(text=raw.text, id=raw.id or "raw"))
    for action in trajectory.actions:
        env.step(action)
    state: ShopState = env.state
    if not env.is_terminal():
        raise ValueError("refinement requires a terminal (purchased) trajectory")
    product = catalog.get(state.product_id or "")
    refined_goal = UserGoal(
        required_attributes=frozenset(sorted(product.attributes)[:2]),
        required_options=tuple(sorted((g, v.lower()) for g, v in state.chosen_options)),
        price_cap_cents=product.price_cents,
    )
    if matching_reward(refined_goal, state, catalog) != 1.0:
        raise RuntimeError("refined goal does not score 1.0 on its own trajectory")
    return RefinedInstruction(
        text=goal_instruction_text(refined_goal), source_id=raw.id
    ), refined_goal


def refine_instruction_llm(
    raw: RawInstruction,
    trajectory: Trajectory,
    client: ChatCompletionsClient,
    template: PromptTemplate,
) -> tuple[RefinedInstruction, int]:
    """Ask the generator to restate the goal the trajectory actually achieved."""
    task = (
        f"Original instruction: {raw.text}\n"
        f"{render_transcript(trajectory)}\n"
        "Summarize the trajectory and propose a refined instruction that it fulfills."
    )
    messages = template.messages(task)
    reply = client.complete(messages, temperature=0.0)
    tokens = (sum(len(m["content"]) for m in messages) + len(reply)) // 4
    text = reply.strip()
    if not text:
        raise RemoteError("refiner returned an empty instruction")
    return RefinedInstruction(text=text, source_id=raw.id), tokens


def build_dataset(
    items: Sequence[tuple[RefinedInstruction, Trajectory, Trajectory]],
    out_path: str,
    report: SynthesisReport | None = None,
) -> SynthesisReport:
    """Emit the pairwise JSONL, dropping duplicates and invalid items."""
    report = report if report is not None else SynthesisReport()
    pairs: list[PreferencePair] = []
    seen: set[str] = set()
    for refined, positive, negative in items:
        if serialize_trajectory(positive) == serialize_trajectory(negative):
            report.validation_rejects += 1
            continue
        pair = PreferencePair(
            instruction=Instruction(text=refined.text, id=refined.source_id or "refined"),
            positive=positive,
            negative=negative,
            meta={"source": refined.source_id},
        )
        line = pair_to_line(pair)
        if line in seen:
            report.duplicates_dropped += 1
            continue
        seen.add(line)
        pairs.append(pair)
    write_pairs(out_path, pairs)
    report.pairs_emitted += len(pairs)
    return report


def generate_game24_dataset(
    m: int,
    out_path: str,
    seed: int = 0,
    budget: Budget | None = None,
    max_retries: int = 8,
) -> SynthesisReport:
    """Deterministic Game of 24 pipeline: solvable puzzles, witness-replay
    positives, verified negatives."""
    budget = budget or Budget()
    report = SynthesisReport()
    instructions = synthesize_game24_instructions(m, seed, solvable_only=True)
    report.instructions_proposed = len(instructions)
    policy = Game24SolverPolicy()
    collected = collect_trajectories(instructions, policy, Game24Env, budget, seed, report)
    items: list[tuple[RefinedInstruction, Trajectory, Trajectory]] = []
    for i, (raw, positive) in enumerate(collected):
        refined = refine_game24(raw, positive)
        report.instructions_refined += 1
        instruction = Instruction(text=refined.text, id=raw.id)
        try:
            negative = make_negative(
                instruction, positive, None, Game24Env, policy, budget,
                seed=seed + i, max_retries=max_retries,
            )
        except NegativeConstructionFailedError:
            report.negative_failures += 1
            continue
        report.negatives_built += 1
        items.append((refined, positive, negative))
    return build_dataset(items, out_path, report)


def generate_shop_dataset(
    catalog: Catalog,
    m: int,
    out_path: str,
    seed: int = 0,
    budget: Budget | None = None,
    max_retries: int = 8,
) -> tuple[SynthesisReport, dict[str, UserGoal]]:
    """Deterministic shop pipeline; returns the report and every goal the
    dataset's instructions refer to (raw and refined)."""
    budget = budget or Budget()
    report = SynthesisReport()
    synthesis = synthesize_shop_goals(catalog, m, seed)
    report.instructions_proposed = len(synthesis.instructions)
    goals = dict(synthesis.goals)
    policy = ScriptMapPolicy(synthesis.scripts)

    def env_factory() -> ShopEnv:
        return ShopEnv(catalog, goals)

    collected = collect_trajectories(
        synthesis.instructions, policy, env_factory, budget, seed, report
    )
    items: list[tuple[RefinedInstruction, Trajectory, Trajectory]] = []
    for i, (raw, positive) in enumerate(collected):
        try:
            refined, refined_goal = refine_shop(raw, positive, catalog, goals)
        except (ValueError, RewardPlanError):
            report.refinement_failures += 1
            continue
        report.instructions_refined += 1
        goals.setdefault(refined.text, refined_goal)
        instruction = Instruction(text=refined.text, id=raw.id)
        try:
            negative = make_negative(
                instruction, positive, None, env_factory, policy, budget,
                seed=seed + i, max_retries=max_retries,
            )
        except NegativeConstructionFailedError:
            report.negative_failures += 1
            continue
        report.negatives_built += 1
        items.append((refined, positive, negative))
    build_dataset(items, out_path, report)
    return report, goals
