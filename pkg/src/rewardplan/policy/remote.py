"""HTTP policy backend speaking the common chat-completions JSON shape."""

from __future__ import annotations

import os
import time
from collections.abc import Callable

import requests

from rewardplan.core.types import Action
from rewardplan.errors import ConfigError, MissingActionError, RemoteError
from rewardplan.policy.base import (
    Policy,
    PolicyContext,
    PromptTemplate,
    Proposal,
    parse_react,
    render_policy_task,
)

_RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


class ChatCompletionsClient:
    """Minimal chat-completions client with bounded retries.

    Posts to exactly the configured URL. Transient failures (connection
    errors, 429, 5xx) retry with exponential backoff; other HTTP errors
    and malformed replies fail immediately with a diagnostic.
    """

    def __init__(
        self,
        url: str,
        model: str,
        auth_env: str | None = None,
        max_tokens: int = 512,
        timeout: float = 30.0,
        max_attempts: int = 3,
        backoff: float = 0.5,
        session: requests.Session | None = None,
    ):
        if max_attempts < 1:
            raise ConfigError("max_attempts must be >= 1")
        self._url = url
        self._model = model
        self._max_tokens = max_tokens
        self._timeout = timeout
        self._max_attempts = max_attempts
        self._backoff = backoff
        self._session = session or requests.Session()
        self._headers = {"Content-Type": "application/json"}
        if auth_env is not None:
            token = os.environ.get(auth_env)
            if not token:
                raise ConfigError(f"auth environment variable {auth_env!r} is not set")
            self._headers["Authorization"] = f"Bearer {token}"

    def complete(
        self, messages: list[dict[str, str]], temperature: float, seed: int | None = None
    ) -> str:
        body: dict[str, object] = {
            "model": self._model,
            "messages": messages,
            "temperature": temperature,
            "max_tokens": self._max_tokens,
        }
        if seed is not None:
            body["seed"] = seed
        last_status: int | None = None
        last_text = ""
        timed_out = False
        for attempt in range(self._max_attempts):
            if attempt:
                time.sleep(self._backoff * 2 ** (attempt - 1))
            try:
                resp = self._session.post(
                    self._url, json=body, headers=self._headers, timeout=self._timeout
                )
            except requests.Timeout:
                timed_out = True
                continue
            except requests.RequestException as e:
                last_status, last_text = None, str(e)
                continue
            if resp.status_code in _RETRYABLE_STATUS:
                last_status, last_text = resp.status_code, resp.text
                continue
            if resp.status_code != 200:
                raise RemoteError("chat completion failed", resp.status_code, resp.text)
            return self._extract(resp)
        if timed_out:
            raise TimeoutError(f"no reply from {self._url} after {self._max_attempts} attempts")
        raise RemoteError(
            f"chat completion failed after {self._max_attempts} attempts",
            last_status,
            last_text,
        )

    def _extract(self, resp: requests.Response) -> str:
        try:
            data = resp.json()
        except ValueError as e:
            raise RemoteError(f"malformed JSON reply: {e}", resp.status_code, resp.text) from e
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as e:
            raise RemoteError(
                f"reply missing choices[0].message.content: {e!r}",
                resp.status_code,
                resp.text,
            ) from e
        if not isinstance(content, str):
            raise RemoteError("message content is not a string", resp.status_code, resp.text)
        return content


class RemotePolicy(Policy):
    """ReAct-over-HTTP proposal backend.

    Completions must contain an "Action:" line. Unparseable or
    grammar-invalid actions are retried up to ``max_reparse`` times with
    the error appended to the prompt; after that the raw first line is
    proposed as-is and the environment answers with its sentinel.
    """

    def __init__(
        self,
        client: ChatCompletionsClient,
        template: PromptTemplate,
        free_form: bool = False,
        validate: Callable[[str], bool] | None = None,
        max_reparse: int = 3,
    ):
        self._client = client
        self._template = template
        self._free_form = free_form
        self._validate = validate
        self._max_reparse = max_reparse

    def _acceptable(self, ctx: PolicyContext, action_text: str) -> bool:
        if self._free_form:
            return self._validate is None or self._validate(action_text)
        return any(a.text == action_text for a in ctx.valid_actions)

    def propose(self, ctx: PolicyContext, k: int = 1) -> tuple[Proposal, ...]:
        task = render_policy_task(ctx)
        complaint = ""
        completion = ""
        for _ in range(self._max_reparse + 1):
            messages = self._template.messages(task + complaint)
            completion = self._client.complete(messages, ctx.temperature, ctx.seed)
            try:
                thought, action = parse_react(completion)
            except MissingActionError as e:
                complaint = f"\nYour previous reply was rejected: {e}"
                continue
            if self._acceptable(ctx, action.text):
                return (Proposal(action, thought=thought or None, free_form=self._free_form),)
            complaint = f"\nYour previous action {action.text!r} is not a legal action here."
        fallback = completion.strip().splitlines()[0] if completion.strip() else "noop"
        return (Proposal(Action(fallback), free_form=True),)
