"""Automatic reward-data pipeline: synthesize, collect, refine, negate."""

from rewardplan.datagen.negatives import choose_strategy, make_negative
from rewardplan.datagen.pipeline import (
    build_dataset,
    collect_trajectories,
    generate_game24_dataset,
    generate_shop_dataset,
    refine_game24,
    refine_instruction_llm,
    refine_shop,
)
from rewardplan.datagen.solvers import Game24SolverPolicy, ScriptMapPolicy
from rewardplan.datagen.synthesize import (
    ShopSynthesis,
    goal_instruction_text,
    synthesize_game24_instructions,
    synthesize_instructions_llm,
    synthesize_shop_goals,
)
from rewardplan.datagen.types import (
    NegativeStrategy,
    RawInstruction,
    RefinedInstruction,
    SynthesisReport,
)

__all__ = [
    "Game24SolverPolicy",
    "NegativeStrategy",
    "RawInstruction",
    "RefinedInstruction",
    "ScriptMapPolicy",
    "ShopSynthesis",
    "SynthesisReport",
    "build_dataset",
    "choose_strategy",
    "collect_trajectories",
    "generate_game24_dataset",
    "generate_shop_dataset",
    "goal_instruction_text",
    "make_negative",
    "refine_game24",
    "refine_instruction_llm",
    "refine_shop",
    "synthesize_game24_instructions",
    "synthesize_instructions_llm",
    "synthesize_shop_goals",
]
