#!/usr/bin/env python3
"""Benchmark the training/scoring kernels on both backends.

Times row scoring, a pairwise-loss epoch, and a classification epoch on
synthetic sparse data with the compiled backend (when installed) against
the pure-numpy fallback, and prints a speedup table. JIT compilation
happens during warmup so steady-state throughput is what gets measured.

Usage: python benchmarks/bench_kernels.py [--rows 20000] [--dim 65536]
       [--nnz 40] [--repeats 5]
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from rewardplan.reward.kernels import (  # noqa: E402
    HAS_NUMBA,
    classification_epoch,
    pairwise_epoch,
    sparse_scores,
)


def synthetic_csr(rows: int, dim: int, nnz: int, seed: int):
    rng = np.random.default_rng(seed)
    indptr = np.arange(0, (rows + 1) * nnz, nnz, dtype=np.int64)
    indices = np.empty(rows * nnz, dtype=np.int64)
    for r in range(rows):
        indices[r * nnz:(r + 1) * nnz] = rng.choice(dim, size=nnz, replace=False)
    values = rng.normal(size=rows * nnz)
    labels = (rng.random(rows) < 0.5).astype(np.float64)
    order = rng.permutation(rows).astype(np.int64)
    return indptr, indices, values, labels, order


def bench(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=20000)
    parser.add_argument("--dim", type=int, default=65536)
    parser.add_argument("--nnz", type=int, default=40)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    indptr, indices, values, labels, order = synthetic_csr(args.rows, args.dim, args.nnz, seed=0)
    backends = ["numpy"] + (["numba"] if HAS_NUMBA else [])
    if not HAS_NUMBA:
        print("numba not installed; benchmarking the numpy path only", file=sys.stderr)

    cases = {
        "scores": lambda be, w: sparse_scores(w, indptr, indices, values, be),
        "pairwise_epoch": lambda be, w: pairwise_epoch(
            w, indptr, indices, values, order, 32, 0.1, be
        ),
        "classification_epoch": lambda be, w: classification_epoch(
            w, 0.0, indptr, indices, values, labels, order, 32, 0.1, be
        ),
    }

    results: dict[tuple[str, str], float] = {}
    for backend in backends:
        for name, fn in cases.items():
            w = np.zeros(args.dim, dtype=np.float64)
            fn(backend, w)  # warmup: first numba call compiles
            w = np.zeros(args.dim, dtype=np.float64)
            results[(name, backend)] = bench(lambda: fn(backend, w), args.repeats)

    print(f"rows={args.rows} dim={args.dim} nnz/row={args.nnz} repeats={args.repeats} (best of)")
    header = f"{'kernel':<22}" + "".join(f"{be + ' (s)':>14}" for be in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name in cases:
        row = f"{name:<22}"
        for backend in backends:
            row += f"{results[(name, backend)]:>14.4f}"
        if len(backends) == 2:
            row += f"{results[(name, 'numpy')] / results[(name, 'numba')]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
