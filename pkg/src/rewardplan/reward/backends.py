"""Reward backends planners can score trajectories with.

All backends share one call shape: score(instruction, trajectory,
extras). ``extras`` carries environment-reported scalars (currently the
purchase price) that composite targets penalize.
"""

from __future__ import annotations

import logging
import re
import time
from abc import ABC, abstractmethod
from collections.abc import Callable, Mapping

import requests

from rewardplan.core.env import Environment
from rewardplan.core.types import Instruction, Trajectory
from rewardplan.errors import (
    ContractError,
    MissingPriceError,
    RemoteError,
    ScoreParseError,
)
from rewardplan.policy.base import PromptTemplate, render_transcript
from rewardplan.policy.remote import ChatCompletionsClient
from rewardplan.reward.features import Featurizer
from rewardplan.reward.model import RewardParams, score as model_score

logger = logging.getLogger(__name__)


class RewardBackend(ABC):
    """Scalar scorer over (instruction, trajectory)."""

    name = "reward"

    @abstractmethod
    def score(
        self,
        instruction: Instruction,
        trajectory: Trajectory,
        extras: Mapping[str, float] | None = None,
    ) -> float: ...


class OracleReward(RewardBackend):
    """Ground-truth score by replaying the trajectory in a fresh environment.

    Non-terminal replays score 0: the task was not finished.
    """

    name = "oracle"

    def __init__(self, env_factory: Callable[[], Environment]):
        self._env_factory = env_factory

    def replay(
        self, instruction: Instruction, trajectory: Trajectory
    ) -> tuple[float, dict[str, float]]:
        env = self._env_factory()
        env.reset(instruction)
        for action in trajectory.actions:
            env.step(action)
        extras = dict(env.outcome_extras())
        if not env.is_terminal():
            return 0.0, extras
        return env.oracle_outcome().oracle_reward, extras

    def score(
        self,
        instruction: Instruction,
        trajectory: Trajectory,
        extras: Mapping[str, float] | None = None,
    ) -> float:
        return self.replay(instruction, trajectory)[0]


class LearnedReward(RewardBackend):
    """The trained linear model; scores are unbounded and only comparable
    within one model."""

    name = "learned"

    def __init__(
        self,
        params: RewardParams,
        featurizer: Featurizer | None = None,
        backend: str | None = None,
    ):
        self._params = params
        self._featurizer = featurizer or Featurizer(params.dimension)
        self._backend = backend

    def score(
        self,
        instruction: Instruction,
        trajectory: Trajectory,
        extras: Mapping[str, float] | None = None,
    ) -> float:
        return model_score(
            self._params, instruction, trajectory, self._featurizer, self._backend
        )


_SCORE_RE = re.compile(r"<\s*(-?\d+(?:\.\d+)?)\s*>")


def parse_judge_score(reply: str) -> float:
    """First angle-bracketed float in the reply, clamped to [0, 1]."""
    m = _SCORE_RE.search(reply)
    if m is None:
        raise ScoreParseError(f"no <score> found in judge reply {reply[:80]!r}")
    value = float(m.group(1))
    if not 0.0 <= value <= 1.0:
        clamped = min(1.0, max(0.0, value))
        logger.warning("judge score %s outside [0,1]; clamped to %s", value, clamped)
        return clamped
    return value


def llm_judge_score(
    client: ChatCompletionsClient,
    template: PromptTemplate,
    instruction: Instruction,
    trajectory: Trajectory,
) -> float:
    task = (
        f"Instruction: {instruction.text}\n"
        f"{render_transcript(trajectory)}\n"
        "Rate how completely the trajectory fulfills the instruction. "
        "Reply with: the task completion score is <x.xxx>"
    )
    reply = client.complete(template.messages(task), temperature=0.0)
    return parse_judge_score(reply)


class JudgeReward(RewardBackend):
    """Few-shot LLM judge returning a [0,1] completion score."""

    name = "judge"

    def __init__(self, client: ChatCompletionsClient, template: PromptTemplate):
        self._client = client
        self._template = template

    def score(
        self,
        instruction: Instruction,
        trajectory: Trajectory,
        extras: Mapping[str, float] | None = None,
    ) -> float:
        return llm_judge_score(self._client, self._template, instruction, trajectory)


def remote_score(
    url: str,
    instruction: Instruction,
    trajectory: Trajectory,
    timeout: float = 30.0,
    max_attempts: int = 3,
    backoff: float = 0.5,
    session: requests.Session | None = None,
) -> float:
    """POST the scoring contract and return the server's scalar.

    Request: {"instruction", "o0", "steps": [{"a", "o"}]}.
    Reply: {"score": number}. A reply without a numeric "score" violates
    the contract.
    """
    body = {
        "instruction": instruction.text,
        "o0": trajectory.initial_observation.text,
        "steps": [{"a": a.text, "o": o.text} for a, o in trajectory.steps],
    }
    session = session or requests.Session()
    last_status: int | None = None
    last_text = ""
    for attempt in range(max_attempts):
        if attempt:
            time.sleep(backoff * 2 ** (attempt - 1))
        try:
            resp = session.post(url, json=body, timeout=timeout)
        except requests.RequestException as e:
            last_status, last_text = None, str(e)
            continue
        if resp.status_code >= 500 or resp.status_code == 429:
            last_status, last_text = resp.status_code, resp.text
            continue
        if resp.status_code != 200:
            raise RemoteError("remote scorer failed", resp.status_code, resp.text)
        try:
            data = resp.json()
        except ValueError as e:
            raise RemoteError(f"malformed JSON reply: {e}", resp.status_code, resp.text) from e
        if not isinstance(data, dict) or "score" not in data:
            raise ContractError(f"reply missing 'score' field: {str(data)[:200]}")
        value = data["score"]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ContractError(f"'score' is not a number: {value!r}")
        return float(value)
    raise RemoteError(
        f"remote scorer unreachable after {max_attempts} attempts", last_status, last_text
    )


class RemoteReward(RewardBackend):
    """HTTP scorer implementing the POST contract above."""

    name = "remote"

    def __init__(
        self,
        url: str,
        timeout: float = 30.0,
        max_attempts: int = 3,
        backoff: float = 0.5,
        session: requests.Session | None = None,
    ):
        self._url = url
        self._timeout = timeout
        self._max_attempts = max_attempts
        self._backoff = backoff
        self._session = session or requests.Session()

    def score(
        self,
        instruction: Instruction,
        trajectory: Trajectory,
        extras: Mapping[str, float] | None = None,
    ) -> float:
        return remote_score(
            self._url,
            instruction,
            trajectory,
            timeout=self._timeout,
            max_attempts=self._max_attempts,
            backoff=self._backoff,
            session=self._session,
        )


def composite_score(
    base: float,
    trajectory: Trajectory,
    extras: Mapping[str, float] | None,
    lambda_length: float = 0.0,
    mu_price: float = 0.0,
) -> float:
    """base − λ·(action count) − μ·(price). Penalties need λ, μ ≥ 0."""
    if lambda_length < 0 or mu_price < 0:
        raise ValueError("penalty coefficients must be >= 0")
    value = base - lambda_length * len(trajectory)
    if mu_price > 0:
        if extras is None or "price" not in extras:
            raise MissingPriceError("mu_price > 0 but no price extra was supplied")
        value -= mu_price * extras["price"]
    return value


class CompositeReward(RewardBackend):
    """Wraps a base backend with length and price penalties."""

    name = "composite"

    def __init__(self, base: RewardBackend, lambda_length: float = 0.0, mu_price: float = 0.0):
        if lambda_length < 0 or mu_price < 0:
            raise ValueError("penalty coefficients must be >= 0")
        self._base = base
        self.lambda_length = lambda_length
        self.mu_price = mu_price
        self.name = f"composite({base.name})"

    def score(
        self,
        instruction: Instruction,
        trajectory: Trajectory,
        extras: Mapping[str, float] | None = None,
    ) -> float:
        base = self._base.score(instruction, trajectory, extras)
        return composite_score(base, trajectory, extras, self.lambda_length, self.mu_price)
