"""Deterministic toy web shop: search, browse, pick options, buy.

A small fixture catalog plays the role of a real storefront. Pages render
as single "[SEP]"-joined text lines so prompts written here transfer to
the real thing, and the reward is an explicit attribute/option/price
match fraction.

Prices are kept in integer cents; dollars only appear at the rendering
and reporting edges.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace

from rewardplan.core.env import Environment
from rewardplan.core.types import (
    INVALID_ACTION_OBSERVATION,
    Action,
    Instruction,
    Observation,
    TaskOutcome,
)
from rewardplan.errors import (
    ConfigError,
    EmptyQueryError,
    SchemaError,
    UnknownProductError,
)

PAGE_SIZE = 10
SEARCH_LIMIT = 50

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> tuple[str, ...]:
    return tuple(_TOKEN_RE.findall(text.lower()))


@dataclass(frozen=True)
class Product:
    id: str
    title: str
    description: str
    attributes: frozenset[str]
    options: tuple[tuple[str, tuple[str, ...]], ...]  # (group, values), both sorted
    price_cents: int

    def __post_init__(self) -> None:
        if self.price_cents < 0:
            raise SchemaError(f"product {self.id}: negative price")

    @property
    def price(self) -> float:
        return self.price_cents / 100

    def option_groups(self) -> tuple[str, ...]:
        return tuple(group for group, _ in self.options)

    def find_option(self, value: str) -> tuple[str, str] | None:
        """Locate an option value (case-insensitive) as (group, canonical value)."""
        needle = value.lower()
        for group, values in self.options:
            for v in values:
                if v.lower() == needle:
                    return group, v
        return None


@dataclass(frozen=True)
class Catalog:
    products: tuple[Product, ...]
    index: dict[str, tuple[str, ...]] = field(compare=False)

    def __post_init__(self) -> None:
        if not self.products:
            raise SchemaError("catalog must be non-empty")
        ids = [p.id for p in self.products]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise SchemaError(f"duplicate product id: {dupes[0]}")

    @classmethod
    def from_products(cls, products: tuple[Product, ...]) -> "Catalog":
        return cls(products, build_index(products))

    def get(self, product_id: str) -> Product:
        for p in self.products:
            if p.id.upper() == product_id.upper():
                return p
        raise UnknownProductError(product_id)

    def has(self, product_id: str) -> bool:
        return any(p.id.upper() == product_id.upper() for p in self.products)


def build_index(products: tuple[Product, ...]) -> dict[str, tuple[str, ...]]:
    """Token -> sorted ids of products whose title or attributes contain it."""
    postings: dict[str, set[str]] = {}
    for p in products:
        for token in set(tokenize(p.title)) | p.attributes:
            postings.setdefault(token, set()).add(p.id)
    return {token: tuple(sorted(ids)) for token, ids in sorted(postings.items())}


def _parse_price_cents(value: object, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where}: price must be a number, got {value!r}")
    cents = round(float(value) * 100)
    if cents < 0:
        raise SchemaError(f"{where}: negative price {value!r}")
    return cents


def _product_from_obj(obj: object, position: int) -> Product:
    where = f"product #{position}"
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    for key in ("id", "title", "attributes", "options", "price", "description"):
        if key not in obj:
            raise SchemaError(f"{where}: missing field {key!r}")
    options = tuple(
        (group, tuple(sorted(str(v) for v in values)))
        for group, values in sorted(obj["options"].items())
    )
    return Product(
        id=str(obj["id"]),
        title=str(obj["title"]),
        description=str(obj["description"]),
        attributes=frozenset(str(a).lower() for a in obj["attributes"]),
        options=options,
        price_cents=_parse_price_cents(obj["price"], where),
    )


def load_catalog(path: str) -> Catalog:
    with open(path, encoding="utf-8") as f:
        raw = json.load(f)
    if not isinstance(raw, list):
        raise SchemaError("catalog file must be a JSON array")
    products = tuple(_product_from_obj(obj, i) for i, obj in enumerate(raw))
    return Catalog.from_products(products)


@dataclass(frozen=True)
class UserGoal:
    required_attributes: frozenset[str]
    required_options: tuple[tuple[str, str], ...]  # sorted (group, value)
    price_cap_cents: int | None = None

    def __post_init__(self) -> None:
        if not self.required_attributes and not self.required_options and self.price_cap_cents is None:
            raise SchemaError("goal has no requirements")


def load_goals(path: str) -> dict[str, UserGoal]:
    """Goal file: JSON array of goal objects keyed by instruction text."""
    with open(path, encoding="utf-8") as f:
        raw = json.load(f)
    if not isinstance(raw, list):
        raise SchemaError("goal file must be a JSON array")
    goals: dict[str, UserGoal] = {}
    for i, obj in enumerate(raw):
        where = f"goal #{i}"
        if not isinstance(obj, dict) or "instruction" not in obj:
            raise SchemaError(f"{where}: missing field 'instruction'")
        cap = obj.get("price_cap")
        goals[str(obj["instruction"])] = UserGoal(
            required_attributes=frozenset(
                str(a).lower() for a in obj.get("required_attributes", [])
            ),
            required_options=tuple(
                sorted((g, str(v).lower()) for g, v in obj.get("required_options", {}).items())
            ),
            price_cap_cents=None if cap is None else _parse_price_cents(cap, where),
        )
    return goals


def dump_goals(goals: dict[str, UserGoal], path: str) -> None:
    """Write goals in the JSON format ``load_goals`` reads back."""
    rows = []
    for text, goal in goals.items():
        rows.append({
            "instruction": text,
            "required_attributes": sorted(goal.required_attributes),
            "required_options": {g: v for g, v in goal.required_options},
            "price_cap": None if goal.price_cap_cents is None else round(goal.price_cap_cents / 100, 2),
        })
    with open(path, "w", encoding="utf-8") as f:
        json.dump(rows, f, ensure_ascii=False, indent=2)
        f.write("\n")


def search(catalog: Catalog, query: str, k: int = SEARCH_LIMIT) -> tuple[str, ...]:
    """Ids of the top-k products by query-token overlap, lower id first on ties.

    Only products sharing at least one token with the query match.
    """
    tokens = set(tokenize(query))
    if not tokens:
        raise EmptyQueryError(query)
    overlap: dict[str, int] = {}
    for token in tokens:
        for pid in catalog.index.get(token, ()):
            overlap[pid] = overlap.get(pid, 0) + 1
    ranked = sorted(overlap, key=lambda pid: (-overlap[pid], pid))
    return tuple(ranked[:k])


PHASE_SEARCH = "search"
PHASE_RESULTS = "results"
PHASE_PRODUCT = "product"
PHASE_DONE = "done"


@dataclass(frozen=True)
class ShopState:
    phase: str = PHASE_SEARCH
    last_query: str = ""
    page: int = 0
    product_id: str | None = None
    chosen_options: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if self.phase not in (PHASE_SEARCH, PHASE_RESULTS, PHASE_PRODUCT, PHASE_DONE):
            raise ValueError(f"unknown phase {self.phase!r}")
        if self.phase in (PHASE_PRODUCT, PHASE_DONE) and self.product_id is None:
            raise ValueError(f"phase {self.phase!r} requires a product id")


def render_price(cents: int) -> str:
    return f"${cents // 100}.{cents % 100:02d}"


def _render_search(instruction: str) -> str:
    return f"Instruction: [SEP] {instruction} [SEP] Search"


def _render_results(catalog: Catalog, instruction: str, query: str, page: int) -> str:
    ids = search(catalog, query)
    parts = [
        "Instruction:",
        instruction,
        "Back to Search",
        f"Page {page + 1} (Total results: {len(ids)})",
    ]
    if page > 0:
        parts.append("< Prev")
    if (page + 1) * PAGE_SIZE < len(ids):
        parts.append("Next >")
    for pid in ids[page * PAGE_SIZE : (page + 1) * PAGE_SIZE]:
        p = catalog.get(pid)
        parts += [p.id, p.title, render_price(p.price_cents)]
    return " [SEP] ".join(parts)


def _render_product(catalog: Catalog, instruction: str, state: ShopState) -> str:
    p = catalog.get(state.product_id or "")
    parts = ["Instruction:", instruction, "Back to Search", "< Prev"]
    for group, values in p.options:
        parts.append(group)
        parts.extend(values)
    parts += [
        p.title,
        f"Price: {render_price(p.price_cents)}",
        "Rating: N.A.",
        "Description",
        "Features",
        "Reviews",
        "Buy Now",
    ]
    return " [SEP] ".join(parts)


def _render_done(catalog: Catalog, state: ShopState) -> str:
    p = catalog.get(state.product_id or "")
    parts = ["Thank you for shopping with us!", p.id, p.title]
    for group, value in state.chosen_options:
        parts.append(f"{group}: {value}")
    parts.append(f"Price: {render_price(p.price_cents)}")
    return " [SEP] ".join(parts)


def render_state(catalog: Catalog, instruction: str, state: ShopState) -> str:
    if state.phase == PHASE_SEARCH:
        return _render_search(instruction)
    if state.phase == PHASE_RESULTS:
        return _render_results(catalog, instruction, state.last_query, state.page)
    if state.phase == PHASE_PRODUCT:
        return _render_product(catalog, instruction, state)
    return _render_done(catalog, state)


_SEARCH_ACTION_RE = re.compile(r"^\s*search\[(.*)\]\s*$", re.DOTALL)
_CLICK_ACTION_RE = re.compile(r"^\s*click\[(.*)\]\s*$", re.DOTALL)


def _page_ids(catalog: Catalog, state: ShopState) -> tuple[str, ...]:
    ids = search(catalog, state.last_query)
    return ids[state.page * PAGE_SIZE : (state.page + 1) * PAGE_SIZE]


def transition(
    catalog: Catalog, instruction: str, state: ShopState, action_text: str
) -> tuple[ShopState, str]:
    """Page-machine step. Unknown or out-of-place actions leave the state
    unchanged and return the sentinel observation; nothing raises."""
    invalid = (state, INVALID_ACTION_OBSERVATION)
    if state.phase == PHASE_DONE:
        return invalid

    m = _SEARCH_ACTION_RE.match(action_text)
    if m is not None:
        query = m.group(1).strip()
        if state.phase != PHASE_SEARCH or not tokenize(query):
            return invalid
        new = ShopState(PHASE_RESULTS, last_query=query, page=0)
        return new, render_state(catalog, instruction, new)

    m = _CLICK_ACTION_RE.match(action_text)
    if m is None:
        return invalid
    target = m.group(1).strip()
    lowered = target.lower()

    if lowered == "back to search" and state.phase in (PHASE_RESULTS, PHASE_PRODUCT):
        new = ShopState(PHASE_SEARCH, last_query=state.last_query)
        return new, render_state(catalog, instruction, new)

    if state.phase == PHASE_RESULTS:
        if lowered == "< prev" and state.page > 0:
            new = replace(state, page=state.page - 1)
            return new, render_state(catalog, instruction, new)
        if lowered == "next >":
            ids = search(catalog, state.last_query)
            if (state.page + 1) * PAGE_SIZE < len(ids):
                new = replace(state, page=state.page + 1)
                return new, render_state(catalog, instruction, new)
            return invalid
        for pid in _page_ids(catalog, state):
            if pid.upper() == target.upper():
                new = ShopState(
                    PHASE_PRODUCT,
                    last_query=state.last_query,
                    page=state.page,
                    product_id=pid,
                )
                return new, render_state(catalog, instruction, new)
        return invalid

    if state.phase == PHASE_PRODUCT:
        if lowered == "buy now":
            new = replace(state, phase=PHASE_DONE)
            return new, render_state(catalog, instruction, new)
        if lowered == "< prev":
            new = ShopState(PHASE_RESULTS, last_query=state.last_query, page=state.page)
            return new, render_state(catalog, instruction, new)
        found = catalog.get(state.product_id or "").find_option(target)
        if found is not None:
            group, value = found
            chosen = dict(state.chosen_options)
            chosen[group] = value
            new = replace(state, chosen_options=tuple(sorted(chosen.items())))
            return new, render_state(catalog, instruction, new)
        return invalid

    return invalid


def matching_reward(goal: UserGoal, final: ShopState, catalog: Catalog) -> float:
    """Fraction of goal requirements met by the purchase; 0 without one.

    Each required attribute, each required option choice, and (when a cap
    is set) the price condition contribute one unit of credit.
    """
    denominator = (
        len(goal.required_attributes)
        + len(goal.required_options)
        + (1 if goal.price_cap_cents is not None else 0)
    )
    if final.phase != PHASE_DONE:
        return 0.0
    p = catalog.get(final.product_id or "")
    chosen = {group: value.lower() for group, value in final.chosen_options}
    credit = len(goal.required_attributes & p.attributes)
    credit += sum(1 for group, value in goal.required_options if chosen.get(group) == value)
    if goal.price_cap_cents is not None and p.price_cents <= goal.price_cap_cents:
        credit += 1
    return credit / denominator


def price_of(final: ShopState, catalog: Catalog) -> float:
    """Dollars paid; 0 when the episode ended without a purchase."""
    if final.phase != PHASE_DONE:
        return 0.0
    return catalog.get(final.product_id or "").price


class ShopEnv(Environment):
    """Environment over the shop page machine.

    Goals are keyed by instruction text; the oracle reward of a purchase
    is its requirement-match fraction.
    """

    def __init__(self, catalog: Catalog, goals: dict[str, UserGoal]):
        self._catalog = catalog
        self._goals = goals
        self._goal: UserGoal | None = None
        self._instruction = ""
        self._state = ShopState()

    def reset(self, instruction: Instruction) -> Observation:
        goal = self._goals.get(instruction.text)
        if goal is None:
            raise ConfigError(f"no goal registered for instruction {instruction.text!r}")
        self._goal = goal
        self._instruction = instruction.text
        self._state = ShopState()
        return Observation(render_state(self._catalog, self._instruction, self._state))

    def valid_actions(self) -> tuple[Action, ...]:
        s = self._state
        if s.phase == PHASE_SEARCH:
            return (Action(f"search[{self._instruction}]"),)
        if s.phase == PHASE_RESULTS:
            ids = search(self._catalog, s.last_query)
            actions = [Action(f"click[{pid}]") for pid in _page_ids(self._catalog, s)]
            if s.page > 0:
                actions.append(Action("click[< prev]"))
            if (s.page + 1) * PAGE_SIZE < len(ids):
                actions.append(Action("click[next >]"))
            actions.append(Action("click[back to search]"))
            return tuple(actions)
        if s.phase == PHASE_PRODUCT:
            p = self._catalog.get(s.product_id or "")
            actions = [
                Action(f"click[{value}]")
                for _, values in p.options
                for value in values
            ]
            actions += [
                Action("click[buy now]"),
                Action("click[< prev]"),
                Action("click[back to search]"),
            ]
            return tuple(actions)
        return ()

    def step(self, action: Action) -> Observation:
        self._state, text = transition(
            self._catalog, self._instruction, self._state, action.text
        )
        return Observation(text)

    def is_terminal(self) -> bool:
        return self._state.phase == PHASE_DONE

    def oracle_outcome(self) -> TaskOutcome:
        if self._goal is None or not self.is_terminal():
            raise RuntimeError("oracle outcome is defined only at terminal states")
        reward = matching_reward(self._goal, self._state, self._catalog)
        return TaskOutcome(reward, reward == 1.0)

    def outcome_extras(self) -> dict[str, float]:
        return {"price": price_of(self._state, self._catalog)}

    @property
    def state(self) -> ShopState:
        return self._state

    def clone(self) -> "ShopEnv":
        copy = ShopEnv(self._catalog, self._goals)
        copy._goal = self._goal
        copy._instruction = self._instruction
        copy._state = self._state
        return copy
