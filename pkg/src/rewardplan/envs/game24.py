"""Game of 24: combine four numbers into 24 with +, -, *, /.

State is a multiset of exact rationals (the "pool"); each action consumes
two pool numbers and inserts the result, so exactly three valid steps end
an episode. All arithmetic uses Fraction — float ties would corrupt the
solvability oracle on division chains like 11/4 * 8 / (2/3).

Step action grammar (bit-exact, also the rendering format):
    <rat> <op> <rat> = <rat> [ (left: <rat>[ <rat>]*) ]
with ops "+ - * /" and rationals rendered as integers when the denominator
is 1, else "num/den". Example: "10 - 8 = 2 (left: 2 4 12)".
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from rewardplan.core.env import Environment
from rewardplan.core.types import (
    INVALID_ACTION_OBSERVATION,
    Action,
    Instruction,
    Observation,
    TaskOutcome,
    Trajectory,
)
from rewardplan.errors import (
    DivisionByZeroError,
    InvalidPuzzleError,
    OperandMissingError,
    ParseError,
    ResultMismatchError,
    TerminalPoolError,
)

TARGET = Fraction(24)
MIN_NUMBER, MAX_NUMBER = 1, 13

Pool = tuple[Fraction, ...]  # always sorted ascending (canonical multiset form)


class LeftAnnotationWarning(UserWarning):
    """A step's "(left: ...)" list disagrees with the actual resulting pool."""


@dataclass(frozen=True)
class Puzzle:
    """Four starting numbers, each in [1, 13]."""

    numbers: tuple[int, int, int, int]

    def __post_init__(self) -> None:
        if len(self.numbers) != 4:
            raise InvalidPuzzleError(f"expected 4 numbers, got {len(self.numbers)}")
        for n in self.numbers:
            if not isinstance(n, int) or not MIN_NUMBER <= n <= MAX_NUMBER:
                raise InvalidPuzzleError(f"number {n} outside [{MIN_NUMBER}, {MAX_NUMBER}]")

    @property
    def pool(self) -> Pool:
        return tuple(sorted(Fraction(n) for n in self.numbers))

    def render(self) -> str:
        """Numbers space-separated in their given order (the o0 text)."""
        return " ".join(str(n) for n in self.numbers)


@dataclass(frozen=True)
class ArithStep:
    """One binary arithmetic action with the result the agent claims.

    The claim is checked against exact arithmetic at apply time, not at
    construction, so parsed-but-wrong steps surface as ResultMismatch.
    """

    lhs: Fraction
    op: str
    rhs: Fraction
    claimed_result: Fraction


def puzzle_from_text(text: str) -> Puzzle:
    """Parse "3 5 7 11", "3, 5, 7, 11", or "Input: 3 5 7 11"."""
    body = re.sub(r"^\s*input\s*:", "", text.strip(), flags=re.IGNORECASE)
    parts = [p for p in re.split(r"[\s,]+", body.strip()) if p]
    try:
        numbers = tuple(int(p) for p in parts)
    except ValueError as e:
        raise InvalidPuzzleError(f"non-integer puzzle token in {text!r}") from e
    if len(numbers) != 4:
        raise InvalidPuzzleError(f"expected 4 numbers in {text!r}, got {len(numbers)}")
    return Puzzle(numbers)


def format_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def render_pool(pool: Pool) -> str:
    return " ".join(format_rational(x) for x in pool)


_RAT = r"-?\d+(?:/\d+)?"
_STEP_RE = re.compile(
    rf"^\s*({_RAT})\s*([+\-*/])\s*({_RAT})\s*=\s*({_RAT})"
    rf"(?:\s*\(\s*left\s*:\s*((?:{_RAT})(?:\s+{_RAT})*)\s*\))?\s*$"
)


def _evaluate(lhs: Fraction, op: str, rhs: Fraction) -> Fraction:
    if op == "+":
        return lhs + rhs
    if op == "-":
        return lhs - rhs
    if op == "*":
        return lhs * rhs
    if op == "/":
        if rhs == 0:
            raise DivisionByZeroError(f"{format_rational(lhs)} / 0")
        return lhs / rhs
    raise ParseError(f"unknown operator {op!r}")


def parse_step_full(text: str) -> tuple[ArithStep, Pool | None]:
    """Parse a step action; returns the step and its left-annotation pool
    (None when the annotation is absent)."""
    m = _STEP_RE.match(text)
    if m is None:
        raise ParseError(f"not a step action: {text!r}")
    lhs, op, rhs, claimed, left = m.groups()
    step = ArithStep(Fraction(lhs), op, Fraction(rhs), Fraction(claimed))
    annotation: Pool | None = None
    if left is not None:
        annotation = tuple(sorted(Fraction(tok) for tok in left.split()))
    return step, annotation


def parse_step(text: str) -> ArithStep:
    return parse_step_full(text)[0]


def render_step(step: ArithStep, left: Pool | None = None) -> str:
    base = (
        f"{format_rational(step.lhs)} {step.op} {format_rational(step.rhs)}"
        f" = {format_rational(step.claimed_result)}"
    )
    return base if left is None else f"{base} (left: {render_pool(left)})"


def apply_step(pool: Pool, step: ArithStep) -> Pool:
    """Consume step.lhs and step.rhs from the pool and insert the result.

    Operand presence (with multiplicity) is checked before arithmetic, so
    "5 / 0" on a pool without 0 is OperandMissing, not DivisionByZero.
    """
    remaining = list(pool)
    for operand in (step.lhs, step.rhs):
        try:
            remaining.remove(operand)
        except ValueError:
            raise OperandMissingError(
                f"{format_rational(operand)} not available in pool {{{render_pool(pool)}}}"
            ) from None
    result = _evaluate(step.lhs, step.op, step.rhs)
    if result != step.claimed_result:
        raise ResultMismatchError(
            f"{render_step(step)} is wrong: exact result is {format_rational(result)}"
        )
    remaining.append(result)
    return tuple(sorted(remaining))


@lru_cache(maxsize=65536)
def _enumerate_pool(pool: Pool) -> tuple[Action, ...]:
    if len(pool) < 2:
        raise TerminalPoolError(f"pool {{{render_pool(pool)}}} has no legal steps")
    actions: list[Action] = []
    seen_pairs: set[tuple[Fraction, Fraction]] = set()
    seen_text: set[str] = set()
    for i in range(len(pool)):
        for j in range(i + 1, len(pool)):
            a, b = pool[i], pool[j]  # a <= b by pool ordering
            if (a, b) in seen_pairs:
                continue
            seen_pairs.add((a, b))
            rest = list(pool)
            rest.remove(a)
            rest.remove(b)
            candidates = [(a, "+", b), (b, "-", a), (a, "-", b), (a, "*", b)]
            if a != 0:
                candidates.append((b, "/", a))
            if b != 0:
                candidates.append((a, "/", b))
            for lhs, op, rhs in candidates:
                result = _evaluate(lhs, op, rhs)
                left = tuple(sorted(rest + [result]))
                text = render_step(ArithStep(lhs, op, rhs, result), left)
                if text not in seen_text:
                    seen_text.add(text)
                    actions.append(Action(text))
    return tuple(actions)


def enumerate_actions(pool: Pool, k: int | None = None) -> tuple[Action, ...]:
    """All legal steps from ``pool`` in a fixed deterministic order.

    Operand pairs are taken in sorted order; per pair the op variants run
    a+b, b-a, a-b, a*b, b/a, a/b (zero divisors and duplicate renderings
    skipped). Truncated to the first ``k`` when given.
    """
    actions = _enumerate_pool(pool)
    return actions if k is None else actions[:k]


@lru_cache(maxsize=262144)
def _search(pool: Pool) -> tuple[ArithStep, ...] | None:
    if len(pool) == 1:
        return () if pool[0] == TARGET else None
    for action in _enumerate_pool(pool):
        step, left = parse_step_full(action.text)
        rest = _search(left)
        if rest is not None:
            return (step,) + rest
    return None


@dataclass(frozen=True)
class SolveResult:
    solvable: bool
    witness: tuple[ArithStep, ...]  # empty when unsolvable


def oracle_solve(puzzle: Puzzle) -> SolveResult:
    """Exhaustive solvability check with a deterministic witness.

    The search follows the enumerate_actions order, so the witness is the
    first solution under that order and is stable across runs.
    """
    witness = _search(puzzle.pool)
    if witness is None:
        return SolveResult(False, ())
    return SolveResult(True, witness)


def witness_actions(puzzle: Puzzle) -> tuple[Action, ...]:
    """The oracle witness rendered in the step-action grammar."""
    result = oracle_solve(puzzle)
    actions: list[Action] = []
    pool = puzzle.pool
    for step in result.witness:
        pool = apply_step(pool, step)
        actions.append(Action(render_step(step, pool)))
    return tuple(actions)


def oracle_outcome(puzzle: Puzzle, trajectory: Trajectory) -> TaskOutcome:
    """Replay a trajectory's actions from the puzzle; 1.0 iff the pool ends
    at exactly {24}. Any replay error scores 0."""
    pool = puzzle.pool
    for action in trajectory.actions:
        try:
            step, _ = parse_step_full(action.text)
            pool = apply_step(pool, step)
        except (ParseError, OperandMissingError, DivisionByZeroError, ResultMismatchError):
            return TaskOutcome(0.0, False)
    if pool == (TARGET,):
        return TaskOutcome(1.0, True)
    return TaskOutcome(0.0, False)


class Game24Env(Environment):
    """Environment wrapper over the pool-transition rules.

    Terminal once the pool is a single number; invalid or ill-formed
    actions return the sentinel observation and leave the pool unchanged.
    """

    def __init__(self) -> None:
        self._puzzle: Puzzle | None = None
        self._pool: Pool = ()

    def reset(self, instruction: Instruction) -> Observation:
        self._puzzle = puzzle_from_text(instruction.text)
        self._pool = self._puzzle.pool
        return Observation(self._puzzle.render())

    def valid_actions(self) -> tuple[Action, ...]:
        if len(self._pool) < 2:
            return ()
        return enumerate_actions(self._pool)

    def step(self, action: Action) -> Observation:
        if self.is_terminal():
            return Observation(INVALID_ACTION_OBSERVATION)
        try:
            step, annotation = parse_step_full(action.text)
            new_pool = apply_step(self._pool, step)
        except (ParseError, OperandMissingError, DivisionByZeroError, ResultMismatchError):
            return Observation(INVALID_ACTION_OBSERVATION)
        if annotation is not None and annotation != new_pool:
            warnings.warn(
                f"left annotation {render_pool(annotation)!r} != actual pool "
                f"{render_pool(new_pool)!r}",
                LeftAnnotationWarning,
                stacklevel=2,
            )
        self._pool = new_pool
        return Observation(render_pool(self._pool))

    def is_terminal(self) -> bool:
        return len(self._pool) == 1

    def oracle_outcome(self) -> TaskOutcome:
        if not self.is_terminal():
            raise RuntimeError("oracle outcome is defined only at terminal states")
        if self._pool == (TARGET,):
            return TaskOutcome(1.0, True)
        return TaskOutcome(0.0, False)

    def clone(self) -> "Game24Env":
        copy = Game24Env()
        copy._puzzle = self._puzzle
        copy._pool = self._pool
        return copy
