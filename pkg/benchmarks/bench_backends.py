"""Benchmark the hot kernels under the numba and pure-numpy backends.

Runs itself in a subprocess per backend (the backend is frozen at import
time via VOTEOPT_BACKEND) and prints a comparison table.

Usage: python benchmarks/bench_backends.py [--repeats N]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time


def measure(repeats: int) -> dict:
    import numpy as np

    from voteopt import BACKEND, HyperParams, grid_oracle, solve_weighting
    from voteopt.core import AccuracyMatrix, ClassSet, ClassifierSet
    from voteopt.optimizer import build_subset_problem
    from voteopt.qpsolve import solve_qp

    rng = np.random.default_rng(0)
    v = AccuracyMatrix(
        rng.random((8, 5)),
        ClassifierSet(tuple(f"c{i}" for i in range(8))),
        ClassSet(tuple(f"e{j}" for j in range(5))),
    )
    params = HyperParams(k=4, lam=0.9, alpha=0.8)
    problem = build_subset_problem(v, params, (0, 2, 4, 6))
    small = AccuracyMatrix(
        rng.random((4, 2)),
        ClassifierSet(tuple(f"c{i}" for i in range(4))),
        ClassSet(("x", "y")),
    )
    # 8 variables: the widest problem the enumeration oracle accepts
    oracle_problem = build_subset_problem(
        small, HyperParams(k=4, lam=0.9, alpha=0.8), (0, 1, 2, 3)
    )

    # warm-up covers jit compilation on the numba path
    solve_qp(problem)
    grid_oracle(oracle_problem, step=0.05)
    solve_weighting(v, params)

    timings = {}
    start = time.perf_counter()
    for _ in range(repeats * 20):
        solve_qp(problem)
    timings["solve_qp_20vars_ms"] = (
        (time.perf_counter() - start) / (repeats * 20) * 1e3
    )

    start = time.perf_counter()
    for _ in range(repeats):
        grid_oracle(oracle_problem, step=0.01)
    timings["grid_oracle_8vars_ms"] = (
        (time.perf_counter() - start) / repeats * 1e3
    )

    start = time.perf_counter()
    for _ in range(repeats):
        solve_weighting(v, params)
    timings["solve_weighting_8c4_ms"] = (
        (time.perf_counter() - start) / repeats * 1e3
    )
    return {"backend": BACKEND, "timings": timings}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.worker:
        print(json.dumps(measure(args.repeats)))
        return 0

    results = {}
    for backend in ("numba", "numpy"):
        env = dict(os.environ, VOTEOPT_BACKEND=backend)
        proc = subprocess.run(
            [sys.executable, __file__, "--worker", "--repeats", str(args.repeats)],
            env=env, capture_output=True, text=True,
        )
        if proc.returncode != 0:
            print(f"{backend} run failed:\n{proc.stderr}", file=sys.stderr)
            continue
        payload = json.loads(proc.stdout.strip().splitlines()[-1])
        results[backend] = payload["timings"]

    if not results:
        return 1
    names = sorted(next(iter(results.values())))
    width = max(len(n) for n in names)
    header = f"{'kernel':<{width}}  " + "  ".join(
        f"{b:>12}" for b in results
    ) + "     speedup"
    print(header)
    print("-" * len(header))
    for name in names:
        cells = "  ".join(f"{results[b][name]:>10.3f}ms" for b in results)
        if len(results) == 2:
            numba_t = results.get("numba", {}).get(name)
            numpy_t = results.get("numpy", {}).get(name)
            ratio = f"{numpy_t / numba_t:>10.1f}x" if numba_t else ""
        else:
            ratio = ""
        print(f"{name:<{width}}  {cells}  {ratio}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
