"""Exception hierarchy shared across the package.

Every error raised by rewardplan derives from RewardPlanError so callers
can catch the whole family at the CLI boundary.
"""

from __future__ import annotations


class RewardPlanError(Exception):
    """Base class for all package errors."""


class ConfigError(RewardPlanError):
    """Bad or inconsistent run configuration (CLI exit code 2)."""


# --- trajectory / core ------------------------------------------------------

class AppendToTerminalError(RewardPlanError):
    """Attempted to extend a trajectory already marked terminal."""


class MaxLengthExceededError(RewardPlanError):
    """Trajectory would exceed the configured maximum action count."""


class ParseError(RewardPlanError):
    """Malformed serialized input. Carries a human-readable location."""

    def __init__(self, message: str, line: int | None = None, offset: int | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", offset {offset}" if offset is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.offset = offset


# --- environments -----------------------------------------------------------

class InvalidPuzzleError(RewardPlanError):
    """Arithmetic puzzle has the wrong arity or out-of-range numbers."""


class OperandMissingError(RewardPlanError):
    """Arithmetic step refers to a number not present in the pool."""


class DivisionByZeroError(RewardPlanError):
    """Arithmetic step divides by zero."""


class ResultMismatchError(RewardPlanError):
    """Arithmetic step claims a result different from the exact value."""


class TerminalPoolError(RewardPlanError):
    """No actions can be enumerated from a single-number pool."""


class SchemaError(RewardPlanError):
    """Catalog or goal file violates its JSON schema."""


class UnknownProductError(RewardPlanError):
    """Purchase references a product id absent from the catalog."""


class EmptyQueryError(RewardPlanError):
    """Search called with a blank query."""


# --- policy / remote --------------------------------------------------------

class NoValidActionsError(RewardPlanError):
    """Policy was queried with an empty valid-action list."""


class MissingActionError(RewardPlanError):
    """ReAct completion contains no 'Action:' segment."""


class RemoteError(RewardPlanError):
    """Remote endpoint failed after all retry attempts."""

    def __init__(self, message: str, status: int | None = None, body: str = ""):
        excerpt = body[:200]
        detail = f"{message} (status={status})" if status is not None else message
        if excerpt:
            detail += f": {excerpt}"
        super().__init__(detail)
        self.status = status
        self.body = excerpt


# --- reward -----------------------------------------------------------------

class DimensionMismatchError(RewardPlanError):
    """Model weight dimension disagrees with the featurizer dimension."""


class EmptyDatasetError(RewardPlanError):
    """Training or evaluation invoked on an empty dataset."""


class DivergenceDetectedError(RewardPlanError):
    """Training loss became non-finite."""


class MissingPriceError(RewardPlanError):
    """Composite reward has a price penalty but no price extra was supplied."""


class ScoreParseError(RewardPlanError):
    """Judge reply contains no angle-bracketed score."""


class ContractError(RewardPlanError):
    """Remote scorer reply violates the scoring contract."""


# --- datagen ----------------------------------------------------------------

class NegativeConstructionFailedError(RewardPlanError):
    """No acceptable negative trajectory found within the retry budget."""
