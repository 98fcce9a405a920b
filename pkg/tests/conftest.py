"""Shared fixtures: stub environments, stub HTTP endpoints, fixture data."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from importlib.resources import files

import pytest

from rewardplan.core.env import Environment
from rewardplan.core.types import (
    INVALID_ACTION_OBSERVATION,
    Action,
    Instruction,
    Observation,
    TaskOutcome,
    Trajectory,
)
from rewardplan.envs.shop import Catalog, UserGoal, load_catalog, load_goals


# --------------------------------------------------------------------------
# Trajectory construction helpers


def make_trajectory(
    instruction: str = "do the thing",
    o0: str = "start",
    steps: tuple[tuple[str, str], ...] = (),
    terminal: bool = False,
    oracle_reward: float | None = None,
    instruction_id: str = "t-0",
) -> Trajectory:
    """Build a trajectory from plain strings."""
    return Trajectory(
        instruction=Instruction(text=instruction, id=instruction_id),
        initial_observation=Observation(o0),
        steps=tuple((Action(a), Observation(o)) for a, o in steps),
        terminal=terminal,
        oracle_reward=oracle_reward,
    )


# --------------------------------------------------------------------------
# TreeEnv: a tiny fixed-depth tree world for planner/datagen tests


class TreeEnv(Environment):
    """Deterministic tree world: the same labeled actions at every level,
    episodes end after ``depth`` steps, leaves carry explicit rewards.

    ``leaf_scores`` maps complete action-text tuples to oracle rewards;
    unlisted leaves get ``default_score``. Observations encode the path so
    every state renders distinctly.
    """

    def __init__(
        self,
        actions: tuple[str, ...] = ("a", "b"),
        depth: int = 2,
        leaf_scores: dict[tuple[str, ...], float] | None = None,
        default_score: float = 0.0,
    ):
        self.actions = actions
        self.depth = depth
        self.leaf_scores = dict(leaf_scores or {})
        self.default_score = default_score
        self.taken: list[str] = []

    def reset(self, instruction: Instruction) -> Observation:
        self.taken = []
        return Observation("at the root")

    def valid_actions(self) -> tuple[Action, ...]:
        return tuple(Action(a) for a in self.actions)

    def step(self, action: Action) -> Observation:
        if self.is_terminal() or action.text not in self.actions:
            return Observation(INVALID_ACTION_OBSERVATION)
        self.taken.append(action.text)
        return Observation("at " + "/".join(self.taken))

    def is_terminal(self) -> bool:
        return len(self.taken) >= self.depth

    def oracle_outcome(self) -> TaskOutcome:
        if not self.is_terminal():
            raise RuntimeError("outcome of a non-terminal episode")
        reward = self.leaf_scores.get(tuple(self.taken), self.default_score)
        return TaskOutcome(oracle_reward=reward, success=reward == 1.0)

    def clone(self) -> "TreeEnv":
        twin = TreeEnv(self.actions, self.depth, self.leaf_scores, self.default_score)
        twin.taken = list(self.taken)
        return twin


@pytest.fixture
def tree_env_factory():
    """Factory-of-factories for TreeEnv suites."""

    def make(**kwargs):
        def factory() -> TreeEnv:
            return TreeEnv(**kwargs)

        return factory

    return make


# --------------------------------------------------------------------------
# Bundled fixture catalog and goals


def fixture_path(name: str) -> str:
    return str(files("rewardplan.assets").joinpath(f"fixtures/{name}"))


@pytest.fixture(scope="session")
def catalog() -> Catalog:
    return load_catalog(fixture_path("catalog.json"))


@pytest.fixture(scope="session")
def goals(catalog) -> dict[str, UserGoal]:
    return load_goals(fixture_path("goals.json"))


# --------------------------------------------------------------------------
# Stub HTTP server for remote policy / judge / scorer tests


@dataclass
class StubHTTP:
    """Scripted HTTP endpoint: pop one canned (status, body) per request.

    ``requests`` records (path, headers, parsed JSON body) for contract
    assertions; when the script runs dry the last entry repeats.
    """

    script: list[tuple[int, object]] = field(default_factory=list)
    requests: list[tuple[str, dict, object]] = field(default_factory=list)
    server: ThreadingHTTPServer | None = None

    @property
    def url(self) -> str:
        host, port = self.server.server_address
        return f"http://{host}:{port}/v1/chat/completions"

    def pop(self) -> tuple[int, object]:
        if len(self.script) > 1:
            return self.script.pop(0)
        return self.script[0]

    def chat_reply(self, content: str) -> tuple[int, object]:
        return (200, {"choices": [{"message": {"content": content}}]})


@pytest.fixture
def stub_http():
    stub = StubHTTP(script=[(200, {"choices": [{"message": {"content": "ok"}}]})])

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):  # noqa: N802 (http.server API)
            length = int(self.headers.get("Content-Length", 0))
            try:
                body = json.loads(self.rfile.read(length) or b"null")
            except json.JSONDecodeError:
                body = None
            stub.requests.append((self.path, dict(self.headers), body))
            status, payload = stub.pop()
            data = payload if isinstance(payload, bytes) else json.dumps(payload).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def log_message(self, *args):  # silence request logging
            pass

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    stub.server = server
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield stub
    finally:
        server.shutdown()
        server.server_close()
