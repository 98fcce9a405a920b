"""Reward-guided planning over text environments.

The package turns a plain action-proposing policy into a stronger
decision maker by scoring candidate trajectories with a reward model —
exact oracles, a learned linear model over hashed text features, an
LLM judge, or a remote scoring service — and searching with best-of-n,
reflective retries, or Monte Carlo tree search under an explicit
trajectory budget. It ships two built-in environments (an arithmetic
puzzle game and a toy shopping site), a preference-pair data pipeline
for training the learned model, and a TOML-configured command line
harness that produces reproducible run directories.
"""

from rewardplan.core import (
    DEFAULT_MAX_ACTIONS,
    INVALID_ACTION_OBSERVATION,
    Action,
    Environment,
    Instruction,
    Observation,
    TaskOutcome,
    Trajectory,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "DEFAULT_MAX_ACTIONS",
    "Environment",
    "INVALID_ACTION_OBSERVATION",
    "Instruction",
    "Observation",
    "TaskOutcome",
    "Trajectory",
    "__version__",
]
