"""Instruction synthesis: seeded templates or an LLM generator."""

from __future__ import annotations

import random
from dataclasses import dataclass

from rewardplan.datagen.types import RawInstruction
from rewardplan.envs.game24 import MAX_NUMBER, MIN_NUMBER, Puzzle, oracle_solve
from rewardplan.envs.shop import Catalog, Product, UserGoal, render_price, search
from rewardplan.policy.base import PromptTemplate
from rewardplan.policy.remote import ChatCompletionsClient


def synthesize_game24_instructions(
    m: int, seed: int = 0, solvable_only: bool = False
) -> list[RawInstruction]:
    """m seeded puzzles rendered as "Input: a b c d"."""
    rng = random.Random(seed)
    out: list[RawInstruction] = []
    while len(out) < m:
        numbers = tuple(rng.randint(MIN_NUMBER, MAX_NUMBER) for _ in range(4))
        puzzle = Puzzle(numbers)
        if solvable_only and not oracle_solve(puzzle).solvable:
            continue
        out.append(RawInstruction(
            text=f"Input: {puzzle.render()}",
            provenance="template",
            id=f"g24-{len(out):04d}",
        ))
    return out


def goal_instruction_text(goal: UserGoal) -> str:
    """Deterministic shop instruction wording for a goal."""
    words = " ".join(sorted(goal.required_attributes)) or "matching"
    text = f"i need a {words} item"
    for group, value in goal.required_options:
        text += f" with {group} {value}"
    if goal.price_cap_cents is not None:
        dollars = render_price(goal.price_cap_cents).lstrip("$")
        text += f", and price lower than {dollars} dollars"
    return text


@dataclass(frozen=True)
class ShopSynthesis:
    instructions: tuple[RawInstruction, ...]
    goals: dict[str, UserGoal]  # keyed by instruction text
    scripts: dict[str, tuple[str, ...]]  # a solving action route per instruction


def _solving_script(product: Product, goal: UserGoal) -> tuple[str, ...]:
    steps = [f"search[{product.title}]", f"click[{product.id}]"]
    steps += [f"click[{value}]" for _, value in goal.required_options]
    steps.append("click[buy now]")
    return tuple(steps)


def synthesize_shop_goals(catalog: Catalog, m: int, seed: int = 0) -> ShopSynthesis:
    """m goals sampled from catalog products so each is satisfiable.

    Each goal copies a target product's attributes/options, so that
    product both exists and fully satisfies the goal; the paired script
    is a route that buys it.
    """
    rng = random.Random(seed)
    instructions: list[RawInstruction] = []
    goals: dict[str, UserGoal] = {}
    scripts: dict[str, tuple[str, ...]] = {}
    while len(instructions) < m:
        product = rng.choice(catalog.products)
        attrs = sorted(product.attributes)
        if not attrs:
            continue
        picked = tuple(rng.sample(attrs, min(len(attrs), rng.randint(1, 2))))
        options: list[tuple[str, str]] = []
        if product.options and rng.random() < 0.5:
            group, values = product.options[rng.randrange(len(product.options))]
            options.append((group, rng.choice(values).lower()))
        cap = None
        if rng.random() < 0.5:
            cap = product.price_cents + rng.randrange(0, 2000)
        goal = UserGoal(
            required_attributes=frozenset(picked),
            required_options=tuple(sorted(options)),
            price_cap_cents=cap,
        )
        text = goal_instruction_text(goal)
        if text in goals:
            continue
        if search(catalog, product.title)[:1] != (product.id,):
            continue  # title query must surface the target first
        instructions.append(RawInstruction(
            text=text, provenance="template", id=f"shop-{len(instructions):04d}"
        ))
        goals[text] = goal
        scripts[text] = _solving_script(product, goal)
    return ShopSynthesis(tuple(instructions), goals, scripts)


def synthesize_instructions_llm(
    client: ChatCompletionsClient,
    template: PromptTemplate,
    observations: list[str],
    seed: int = 0,
) -> tuple[list[RawInstruction], int]:
    """One instruction per observation; returns (instructions, token estimate)."""
    out: list[RawInstruction] = []
    tokens = 0
    for i, observation in enumerate(observations):
        task = f"Observation:\n{observation}\nPropose one task instruction for it."
        messages = template.messages(task)
        reply = client.complete(messages, temperature=1.0, seed=seed + i)
        tokens += (sum(len(m["content"]) for m in messages) + len(reply)) // 4
        text = reply.strip()
        if text:
            out.append(RawInstruction(text=text, provenance="llm", id=f"llm-{i:04d}"))
    return out, tokens
