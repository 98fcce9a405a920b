"""Command line entry point: synthesize, train, eval-rm, plan, report.

Every subcommand reads one TOML config (``--config``) plus targeted
overrides (``--seed``, ``--out``). Exit codes: 0 success, 2 config
error, 3 runtime error. Relative paths in configs resolve against the
working directory, so a run can be reproduced from its snapshot by
rerunning from the same place.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import random
import sys
import traceback
from dataclasses import asdict, replace
from pathlib import Path

from rewardplan.datagen.pipeline import generate_game24_dataset, generate_shop_dataset
from rewardplan.envs.shop import dump_goals, load_catalog
from rewardplan.errors import ConfigError, RewardPlanError
from rewardplan.harness.config import (
    emit_toml,
    interpolate_document,
    load_document,
    parse_eval,
    parse_run_config,
    parse_synthesize,
    parse_train,
)
from rewardplan.harness.runs import (
    METRICS_NAME,
    TABLE_NAME,
    merge_run_dirs,
    plan_run,
    seed_substream,
)
from rewardplan.reward.dataset import read_pairs
from rewardplan.reward.features import Featurizer
from rewardplan.reward.model import load_params, save_params
from rewardplan.reward.train import TrainConfig, eval_pairwise_accuracy, train


def _load(args: argparse.Namespace) -> tuple[dict, str]:
    doc, raw = load_document(args.config)
    return interpolate_document(doc, os.environ), raw


def _file_sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def cmd_synthesize(args: argparse.Namespace) -> int:
    doc, _ = _load(args)
    spec = parse_synthesize(doc, Path.cwd())
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    if args.out is not None:
        spec = replace(spec, out=Path(args.out))
    spec.out.parent.mkdir(parents=True, exist_ok=True)
    seed = seed_substream("datagen", spec.seed)
    if spec.environment == "game24":
        report = generate_game24_dataset(
            spec.size, str(spec.out), seed=seed, max_retries=spec.max_retries
        )
    else:
        catalog = load_catalog(str(spec.catalog))
        report, goals = generate_shop_dataset(
            catalog, spec.size, str(spec.out), seed=seed, max_retries=spec.max_retries
        )
        goals_path = spec.out.with_suffix(".goals.json")
        dump_goals(goals, str(goals_path))
        print(f"goals={goals_path}")
    report.check()
    for key, value in asdict(report).items():
        print(f"{key}={value}")
    print(f"dataset={spec.out}")
    print(f"sha256={_file_sha256(spec.out)}")
    return 0


def _holdout_split(n: int, fraction: float, seed: int) -> tuple[list[int], list[int]]:
    """Seeded shuffle split; returns (train indices, held-out indices)."""
    order = list(range(n))
    random.Random(seed).shuffle(order)
    n_hold = int(round(n * fraction))
    if 0 < fraction and n_hold == 0 and n > 1:
        n_hold = 1
    return order[n_hold:], order[:n_hold]


def cmd_train(args: argparse.Namespace) -> int:
    doc, _ = _load(args)
    spec = parse_train(doc, Path.cwd())
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    if args.out is not None:
        spec = replace(spec, out=Path(args.out))
    pairs = list(read_pairs(str(spec.dataset)))
    train_idx, hold_idx = _holdout_split(len(pairs), spec.holdout_fraction, spec.seed)
    train_pairs = [pairs[i] for i in train_idx]
    hold_pairs = [pairs[i] for i in hold_idx]
    cfg = TrainConfig(
        epochs=spec.epochs,
        batch_size=spec.batch_size,
        learning_rate=spec.learning_rate,
        seed=spec.seed,
        target=spec.target,
        dimension=spec.dimension,
        backend=spec.backend,
    )
    params, history = train(train_pairs, cfg)
    spec.out.parent.mkdir(parents=True, exist_ok=True)
    save_params(params, str(spec.out))
    curve_path = spec.curve_out or spec.out.with_suffix(".curve.csv")
    curve_path.parent.mkdir(parents=True, exist_ok=True)
    with open(curve_path, "w", encoding="utf-8") as f:
        f.write("epoch,loss\n")
        for epoch, loss in enumerate(history, start=1):
            f.write(f"{epoch},{loss:.12g}\n")
    print(f"pairs={len(pairs)} train={len(train_pairs)} holdout={len(hold_pairs)}")
    print(f"final_epoch_loss={history[-1]:.6f}")
    featurizer = Featurizer(spec.dimension)
    if hold_pairs:
        acc = eval_pairwise_accuracy(params, hold_pairs, featurizer, spec.backend)
        print(f"held_out_accuracy={acc:.6f}")
    else:
        acc = eval_pairwise_accuracy(params, train_pairs, featurizer, spec.backend)
        print(f"train_accuracy={acc:.6f}")
    print(f"model={spec.out}")
    print(f"curve={curve_path}")
    return 0


def cmd_eval_rm(args: argparse.Namespace) -> int:
    doc, _ = _load(args)
    spec = parse_eval(doc, Path.cwd())
    params = load_params(str(spec.model))
    pairs = list(read_pairs(str(spec.dataset)))
    featurizer = Featurizer(spec.dimension if spec.dimension is not None else params.dimension)
    accuracy = eval_pairwise_accuracy(params, pairs, featurizer, spec.backend)
    print(f"pairs={len(pairs)} accuracy={accuracy:.6f}")
    if args.out is not None:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        payload = {"model": str(spec.model), "dataset": str(spec.dataset),
                   "pairs": len(pairs), "accuracy": accuracy}
        out.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        print(f"report={out}")
    return 0


def cmd_plan(args: argparse.Namespace) -> int:
    raw_doc, raw_text = load_document(args.config)
    doc = interpolate_document(raw_doc, os.environ)
    config = parse_run_config(doc, Path.cwd())
    snapshot = raw_text
    if args.seed is not None:
        config = replace(config, seeds=(args.seed,))
        # Fold the override into the snapshot so rerunning from it alone
        # reproduces this run. Secrets stay as ${ENV:...} placeholders.
        raw_doc["run"]["seeds"] = [args.seed]
        snapshot = emit_toml(raw_doc)
    out_dir = Path(args.out) if args.out is not None else config.out
    if out_dir is None:
        raise ConfigError("no output directory: set [run].out or pass --out")
    table = plan_run(config, snapshot, out_dir)
    meta = json.loads((out_dir / "run.json").read_text(encoding="utf-8"))
    print(table.render(), end="")
    print(f"run_id={meta['run_id']}")
    print(f"out={out_dir}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    dirs = [Path(d) for d in args.run_dirs]
    if not dirs and args.config is not None:
        doc, _ = _load(args)
        body = doc.get("report")
        if not isinstance(body, dict) or not isinstance(body.get("dirs"), list):
            raise ConfigError("report needs run directories (positional or [report].dirs)")
        dirs = [Path(d) for d in body["dirs"]]
    if not dirs:
        raise ConfigError("report needs at least one run directory")
    table, duplicates = merge_run_dirs(dirs)
    print(table.render(), end="")
    print(f"runs_merged={len(dirs) - duplicates} duplicates_skipped={duplicates}")
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / METRICS_NAME).write_text(table.to_csv(), encoding="utf-8")
        (out / TABLE_NAME).write_text(table.render(), encoding="utf-8")
        print(f"out={out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rewardplan",
        description="Reward-guided planning: data synthesis, reward training, and planner runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synthesize", help="generate a preference-pair dataset")
    synth.add_argument("--config", required=True)
    synth.add_argument("--seed", type=int, default=None)
    synth.add_argument("--out", default=None)
    synth.set_defaults(func=cmd_synthesize)

    tr = sub.add_parser("train", help="train a reward model on a pair dataset")
    tr.add_argument("--config", required=True)
    tr.add_argument("--seed", type=int, default=None)
    tr.add_argument("--out", default=None)
    tr.set_defaults(func=cmd_train)

    ev = sub.add_parser("eval-rm", help="score a saved reward model on a pair dataset")
    ev.add_argument("--config", required=True)
    ev.add_argument("--out", default=None)
    ev.set_defaults(func=cmd_eval_rm)

    plan = sub.add_parser("plan", help="run a planner suite into a run directory")
    plan.add_argument("--config", required=True)
    plan.add_argument("--seed", type=int, default=None)
    plan.add_argument("--out", default=None)
    plan.set_defaults(func=cmd_plan)

    rep = sub.add_parser("report", help="merge run directories into one table")
    rep.add_argument("run_dirs", nargs="*")
    rep.add_argument("--config", default=None)
    rep.add_argument("--out", default=None)
    rep.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except RewardPlanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception:  # noqa: BLE001 - CLI boundary keeps the exit-code contract
        traceback.print_exc()
        return 3


if __name__ == "__main__":
    sys.exit(main())
