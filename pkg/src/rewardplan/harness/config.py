"""TOML run configuration: parsing, secret interpolation, validation.

One config file drives every subcommand; each reads only the sections it
needs. String values may embed ``${ENV:NAME}`` placeholders, resolved
from the process environment at load time. Snapshots written into run
directories keep the placeholders unresolved so secrets never reach
disk and configs stay diff-able.
"""

from __future__ import annotations

import json
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

from rewardplan.errors import ConfigError
from rewardplan.planners.suite import PlannerSpec
from rewardplan.planners.types import Budget

ENVIRONMENT_KINDS = ("game24", "shop")
POLICY_KINDS = ("random", "scripted", "remote")
REWARD_BACKEND_KINDS = ("oracle", "learned", "judge", "remote")
TRAIN_TARGETS = ("pairwise", "classification")

_ENV_PATTERN = re.compile(r"\$\{ENV:([A-Za-z_][A-Za-z0-9_]*)\}")


def interpolate_env(value: str, environ: Mapping[str, str]) -> str:
    """Replace every ``${ENV:NAME}`` in ``value`` from ``environ``."""

    def sub(match: re.Match[str]) -> str:
        name = match.group(1)
        if name not in environ:
            raise ConfigError(f"config references undefined environment variable {name!r}")
        return environ[name]

    return _ENV_PATTERN.sub(sub, value)


def interpolate_document(doc: Any, environ: Mapping[str, str]) -> Any:
    """Deep-copy ``doc`` with env placeholders resolved in all strings."""
    if isinstance(doc, str):
        return interpolate_env(doc, environ)
    if isinstance(doc, dict):
        return {k: interpolate_document(v, environ) for k, v in doc.items()}
    if isinstance(doc, list):
        return [interpolate_document(v, environ) for v in doc]
    return doc


def load_document(path: str | Path) -> tuple[dict[str, Any], str]:
    """Parse a TOML file; returns (document, raw text for snapshots)."""
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = _toml.loads(raw)
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return doc, raw


def emit_toml(doc: Mapping[str, Any]) -> str:
    """Render a one-level-deep document back to TOML text.

    Covers exactly the shapes this package's configs use: top-level
    tables holding scalars and flat lists. Used to write effective-config
    snapshots when command-line overrides change the parsed document.
    """
    lines: list[str] = []
    for section, body in doc.items():
        if not isinstance(body, dict):
            raise ConfigError(f"top-level key {section!r} must be a table")
        if lines:
            lines.append("")
        lines.append(f"[{section}]")
        for key, value in body.items():
            lines.append(f"{key} = {_toml_value(value)}")
    return "\n".join(lines) + "\n"


def _toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, list):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise ConfigError(f"cannot render config value of type {type(value).__name__}")


def _section(doc: Mapping[str, Any], name: str, allowed: tuple[str, ...], *, required: bool = True) -> dict[str, Any]:
    body = doc.get(name)
    if body is None:
        if required:
            raise ConfigError(f"config is missing the [{name}] section")
        return {}
    if not isinstance(body, dict):
        raise ConfigError(f"[{name}] must be a table")
    unknown = sorted(set(body) - set(allowed))
    if unknown:
        raise ConfigError(f"[{name}] has unknown keys {unknown}; allowed: {sorted(allowed)}")
    return dict(body)


def _want(body: Mapping[str, Any], section: str, key: str, kind: type, default: Any = None, *, required: bool = False) -> Any:
    if key not in body:
        if required:
            raise ConfigError(f"[{section}] is missing required key {key!r}")
        return default
    value = body[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if kind is int and isinstance(value, bool):
        raise ConfigError(f"[{section}].{key} must be {kind.__name__}, got bool")
    if not isinstance(value, kind):
        raise ConfigError(f"[{section}].{key} must be {kind.__name__}, got {type(value).__name__}")
    return value


def _existing_path(base_dir: Path, section: str, key: str, value: str) -> Path:
    path = Path(value)
    if not path.is_absolute():
        path = base_dir / path
    if not path.exists():
        raise ConfigError(f"[{section}].{key} references missing file {path}")
    return path


@dataclass(frozen=True)
class EnvironmentSpec:
    """Which environment a run plans over and where its tasks come from."""

    kind: str
    puzzles: tuple[str, ...] = ()
    suite_size: int = 0
    suite_seed: int = 0
    solvable_only: bool = True
    catalog: Path | None = None
    goals: Path | None = None


@dataclass(frozen=True)
class PolicySpec:
    """How candidate actions get proposed."""

    kind: str
    temperature: float = 1.0
    scripts: Path | None = None
    url: str = ""
    model: str = ""
    auth_env: str | None = None
    template: Path | None = None
    max_tokens: int = 512


@dataclass(frozen=True)
class RewardSpec:
    """Exactly one scoring backend plus optional composite penalties.

    ``backend`` keeps the raw selector string (``oracle``,
    ``learned:<path>``, ``judge:<endpoint>``, ``remote:<url>``); ``kind``
    and ``target`` are its parsed halves.
    """

    backend: str
    kind: str
    target: str
    lambda_length: float = 0.0
    mu_price: float = 0.0
    judge_model: str = "judge"
    judge_template: Path | None = None
    model_path: Path | None = None


@dataclass(frozen=True)
class SynthesizeSpec:
    """Dataset generation settings for ``synthesize``."""

    environment: str
    size: int
    out: Path
    seed: int = 0
    catalog: Path | None = None
    max_retries: int = 8


@dataclass(frozen=True)
class TrainSpec:
    """Reward-model training settings for ``train`` and ``eval-rm``."""

    dataset: Path
    out: Path
    epochs: int = 10
    batch_size: int = 32
    learning_rate: float = 0.1
    target: str = "pairwise"
    dimension: int = 65536
    backend: str | None = None
    seed: int = 0
    holdout_fraction: float = 0.2
    curve_out: Path | None = None


@dataclass(frozen=True)
class EvalSpec:
    """Settings for scoring a saved model against a pair dataset."""

    model: Path
    dataset: Path
    backend: str | None = None
    dimension: int | None = None


@dataclass(frozen=True)
class RunConfig:
    """Everything ``plan`` needs, parsed and validated."""

    environment: EnvironmentSpec
    policy: PolicySpec
    reward: RewardSpec
    planner: PlannerSpec
    budget: Budget
    seeds: tuple[int, ...]
    out: Path | None
    workers: int
    base_dir: Path


def parse_reward_backend(selector: str) -> tuple[str, str]:
    """Split ``kind[:target]``; exactly one backend, known kind."""
    kind, _, target = selector.partition(":")
    kind = kind.strip()
    target = target.strip()
    if kind not in REWARD_BACKEND_KINDS:
        raise ConfigError(
            f"unknown reward backend {selector!r}; expected one of "
            f"{', '.join(REWARD_BACKEND_KINDS)} (with :target where applicable)"
        )
    if kind == "oracle":
        if target:
            raise ConfigError("reward backend 'oracle' takes no :target")
    elif not target:
        raise ConfigError(f"reward backend {kind!r} needs a :target ({kind}:<...>)")
    return kind, target


def parse_environment(doc: Mapping[str, Any], base_dir: Path) -> EnvironmentSpec:
    body = _section(doc, "environment", (
        "kind", "puzzles", "suite_size", "suite_seed", "solvable_only", "catalog", "goals",
    ))
    kind = _want(body, "environment", "kind", str, required=True)
    if kind not in ENVIRONMENT_KINDS:
        raise ConfigError(f"[environment].kind must be one of {ENVIRONMENT_KINDS}, got {kind!r}")
    puzzles = _want(body, "environment", "puzzles", list, [])
    if not all(isinstance(p, str) for p in puzzles):
        raise ConfigError("[environment].puzzles must be a list of strings")
    spec = EnvironmentSpec(
        kind=kind,
        puzzles=tuple(puzzles),
        suite_size=_want(body, "environment", "suite_size", int, 0),
        suite_seed=_want(body, "environment", "suite_seed", int, 0),
        solvable_only=_want(body, "environment", "solvable_only", bool, True),
        catalog=_maybe_path(body, base_dir, "environment", "catalog"),
        goals=_maybe_path(body, base_dir, "environment", "goals"),
    )
    if spec.kind == "game24":
        if not spec.puzzles and spec.suite_size < 1:
            raise ConfigError("[environment] game24 needs puzzles or suite_size >= 1")
    else:
        if spec.catalog is None or spec.goals is None:
            raise ConfigError("[environment] shop needs catalog and goals paths")
    return spec


def _maybe_path(body: Mapping[str, Any], base_dir: Path, section: str, key: str) -> Path | None:
    value = _want(body, section, key, str)
    if value is None:
        return None
    return _existing_path(base_dir, section, key, value)


def parse_policy(doc: Mapping[str, Any], base_dir: Path) -> PolicySpec:
    body = _section(doc, "policy", (
        "kind", "temperature", "scripts", "url", "model", "auth_env", "template", "max_tokens",
    ))
    kind = _want(body, "policy", "kind", str, required=True)
    if kind not in POLICY_KINDS:
        raise ConfigError(f"[policy].kind must be one of {POLICY_KINDS}, got {kind!r}")
    spec = PolicySpec(
        kind=kind,
        temperature=_want(body, "policy", "temperature", float, 1.0),
        scripts=_maybe_path(body, base_dir, "policy", "scripts"),
        url=_want(body, "policy", "url", str, ""),
        model=_want(body, "policy", "model", str, ""),
        auth_env=_want(body, "policy", "auth_env", str),
        template=_maybe_path(body, base_dir, "policy", "template"),
        max_tokens=_want(body, "policy", "max_tokens", int, 512),
    )
    if spec.temperature < 0:
        raise ConfigError("[policy].temperature must be >= 0")
    if kind == "scripted" and spec.scripts is None:
        raise ConfigError("[policy] scripted needs a scripts file")
    if kind == "remote" and not spec.url:
        raise ConfigError("[policy] remote needs a url")
    return spec


def parse_reward(doc: Mapping[str, Any], base_dir: Path) -> RewardSpec:
    body = _section(doc, "reward", (
        "backend", "lambda_length", "mu_price", "judge_model", "judge_template",
    ))
    selector = _want(body, "reward", "backend", str, required=True)
    kind, target = parse_reward_backend(selector)
    lambda_length = _want(body, "reward", "lambda_length", float, 0.0)
    mu_price = _want(body, "reward", "mu_price", float, 0.0)
    if lambda_length < 0 or mu_price < 0:
        raise ConfigError("[reward] composite penalties must be >= 0")
    model_path = None
    if kind == "learned":
        model_path = _existing_path(base_dir, "reward", "backend", target)
    return RewardSpec(
        backend=selector,
        kind=kind,
        target=target,
        lambda_length=lambda_length,
        mu_price=mu_price,
        judge_model=_want(body, "reward", "judge_model", str, "judge"),
        judge_template=_maybe_path(body, base_dir, "reward", "judge_template"),
        model_path=model_path,
    )


def parse_planner(doc: Mapping[str, Any]) -> PlannerSpec:
    body = _section(doc, "planner", (
        "kind", "n", "max_trials", "threshold", "selection_rule", "exploration_c",
    ))
    kind = _want(body, "planner", "kind", str, required=True)
    kwargs: dict[str, Any] = {"kind": kind}
    if "n" in body:
        kwargs["n"] = _want(body, "planner", "n", int)
    if "max_trials" in body:
        kwargs["max_trials"] = _want(body, "planner", "max_trials", int)
    if "threshold" in body:
        kwargs["threshold"] = _want(body, "planner", "threshold", float)
    if "selection_rule" in body:
        kwargs["selection_rule"] = _want(body, "planner", "selection_rule", str)
    if "exploration_c" in body:
        kwargs["exploration_c"] = _want(body, "planner", "exploration_c", float)
    return PlannerSpec(**kwargs)


def parse_budget(doc: Mapping[str, Any]) -> Budget:
    body = _section(doc, "budget", (
        "max_trajectories", "max_actions", "top_k",
    ), required=False)
    try:
        return Budget(
            max_trajectories=_want(body, "budget", "max_trajectories", int, 10),
            max_actions_per_trajectory=_want(body, "budget", "max_actions", int, 10),
            top_k_actions=_want(body, "budget", "top_k", int, 10),
        )
    except ValueError as exc:
        raise ConfigError(f"[budget] {exc}") from exc


def parse_run_config(doc: Mapping[str, Any], base_dir: Path) -> RunConfig:
    """Validate the sections ``plan`` consumes."""
    body = _section(doc, "run", ("seeds", "out", "workers"))
    seeds = _want(body, "run", "seeds", list, required=True)
    if not seeds or not all(isinstance(s, int) and not isinstance(s, bool) for s in seeds):
        raise ConfigError("[run].seeds must be a non-empty list of integers")
    if len(set(seeds)) != len(seeds):
        raise ConfigError("[run].seeds must not repeat")
    workers = _want(body, "run", "workers", int, 4)
    if workers < 1:
        raise ConfigError("[run].workers must be >= 1")
    out = _want(body, "run", "out", str)
    return RunConfig(
        environment=parse_environment(doc, base_dir),
        policy=parse_policy(doc, base_dir),
        reward=parse_reward(doc, base_dir),
        planner=parse_planner(doc),
        budget=parse_budget(doc),
        seeds=tuple(seeds),
        out=None if out is None else Path(out),
        workers=workers,
        base_dir=base_dir,
    )


def parse_synthesize(doc: Mapping[str, Any], base_dir: Path) -> SynthesizeSpec:
    body = _section(doc, "synthesize", (
        "environment", "size", "out", "seed", "catalog", "max_retries",
    ))
    environment = _want(body, "synthesize", "environment", str, required=True)
    if environment not in ENVIRONMENT_KINDS:
        raise ConfigError(
            f"[synthesize].environment must be one of {ENVIRONMENT_KINDS}, got {environment!r}"
        )
    size = _want(body, "synthesize", "size", int, required=True)
    if size < 1:
        raise ConfigError("[synthesize].size must be >= 1")
    catalog = _maybe_path(body, base_dir, "synthesize", "catalog")
    if environment == "shop" and catalog is None:
        raise ConfigError("[synthesize] shop needs a catalog path")
    out = _want(body, "synthesize", "out", str, required=True)
    max_retries = _want(body, "synthesize", "max_retries", int, 8)
    if max_retries < 1:
        raise ConfigError("[synthesize].max_retries must be >= 1")
    return SynthesizeSpec(
        environment=environment,
        size=size,
        out=Path(out),
        seed=_want(body, "synthesize", "seed", int, 0),
        catalog=catalog,
        max_retries=max_retries,
    )


def parse_train(doc: Mapping[str, Any], base_dir: Path) -> TrainSpec:
    body = _section(doc, "train", (
        "dataset", "out", "epochs", "batch_size", "learning_rate", "target",
        "dimension", "backend", "seed", "holdout_fraction", "curve_out",
    ))
    dataset = _want(body, "train", "dataset", str, required=True)
    out = _want(body, "train", "out", str, required=True)
    target = _want(body, "train", "target", str, "pairwise")
    if target not in TRAIN_TARGETS:
        raise ConfigError(f"[train].target must be one of {TRAIN_TARGETS}, got {target!r}")
    holdout = _want(body, "train", "holdout_fraction", float, 0.2)
    if not 0.0 <= holdout < 1.0:
        raise ConfigError("[train].holdout_fraction must be in [0, 1)")
    curve_out = _want(body, "train", "curve_out", str)
    return TrainSpec(
        dataset=_existing_path(base_dir, "train", "dataset", dataset),
        out=Path(out),
        epochs=_want(body, "train", "epochs", int, 10),
        batch_size=_want(body, "train", "batch_size", int, 32),
        learning_rate=_want(body, "train", "learning_rate", float, 0.1),
        target=target,
        dimension=_want(body, "train", "dimension", int, 65536),
        backend=_want(body, "train", "backend", str),
        seed=_want(body, "train", "seed", int, 0),
        holdout_fraction=holdout,
        curve_out=None if curve_out is None else Path(curve_out),
    )


def parse_eval(doc: Mapping[str, Any], base_dir: Path) -> EvalSpec:
    body = _section(doc, "eval", ("model", "dataset", "backend", "dimension"))
    model = _want(body, "eval", "model", str, required=True)
    dataset = _want(body, "eval", "dataset", str, required=True)
    return EvalSpec(
        model=_existing_path(base_dir, "eval", "model", model),
        dataset=_existing_path(base_dir, "eval", "dataset", dataset),
        backend=_want(body, "eval", "backend", str),
        dimension=_want(body, "eval", "dimension", int),
    )
