#!/usr/bin/env python
"""Benchmark the jitted kernels against the pure-numpy fallback.

Runs the same workloads twice in subprocesses — once with WAVESTAB_NUMBA=1
and once with WAVESTAB_NUMBA=0 — so each process binds its backend at
import time, then prints a side-by-side table.

Usage: python benchmarks/bench_kernels.py [--n 4096] [--steps 2000]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time


def _workloads(n: int, steps: int) -> dict:
    import numpy as np

    from wavestab import (
        FourierModes,
        StepperConfig,
        damped_wave,
        make_grid,
        run,
        sample,
        zeros,
    )
    from wavestab.kernels import backend, laplacian_dirichlet, thomas_solve

    results = {"backend": backend()}

    rng = np.random.default_rng(7)
    f = rng.standard_normal(n)
    dx = np.pi / (n + 1)

    laplacian_dirichlet(f, dx)  # warm the JIT outside the timer
    t0 = time.perf_counter()
    for _ in range(steps):
        f = laplacian_dirichlet(f, dx)
        f /= max(1.0, float(np.max(np.abs(f))))
    results["laplacian"] = time.perf_counter() - t0

    lower = np.full(n, -1.0)
    diag = np.full(n, 4.0)
    upper = np.full(n, -1.0)
    rhs = rng.standard_normal(n)
    thomas_solve(lower, diag, upper, rhs)
    t0 = time.perf_counter()
    for _ in range(steps):
        rhs = thomas_solve(lower, diag, upper, rhs)
    results["tridiagonal"] = time.perf_counter() - t0

    grid = make_grid(np.pi, 512)
    model = damped_wave(1.0, 1.0, 2.0, "dirichlet")
    ctrl = FourierModes(N=2, mu=4.0)
    u0 = sample(grid, lambda x: np.sin(x))
    cfg = StepperConfig(dt=1e-3, t_end=steps * 1e-3, record_every=10**9)
    run(model, ctrl, u0, zeros(grid), cfg)  # warm
    t0 = time.perf_counter()
    run(model, ctrl, u0, zeros(grid), cfg)
    results["closed_loop_run"] = time.perf_counter() - t0

    return results


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=4096, help="vector length for kernel loops")
    parser.add_argument("--steps", type=int, default=2000, help="iterations per workload")
    parser.add_argument("--_child", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args._child:
        print(json.dumps(_workloads(args.n, args.steps)))
        return 0

    rows = {}
    for flag in ("1", "0"):
        env = dict(os.environ, WAVESTAB_NUMBA=flag)
        proc = subprocess.run(
            [sys.executable, __file__, "--_child", "--n", str(args.n), "--steps", str(args.steps)],
            env=env,
            capture_output=True,
            text=True,
        )
        if proc.returncode != 0:
            sys.stderr.write(proc.stderr)
            return proc.returncode
        data = json.loads(proc.stdout.strip().splitlines()[-1])
        rows[data.pop("backend")] = data

    names = sorted(next(iter(rows.values())).keys())
    backends = list(rows)
    print(f"n = {args.n}, steps = {args.steps}")
    print(f"{'workload':<18}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name in names:
        times = [rows[b][name] for b in backends]
        ratio = times[backends.index('numpy')] / times[backends.index('numba')] if 'numba' in backends and 'numpy' in backends else float('nan')
        print(f"{name:<18}" + "".join(f"{t:>11.4f}s" for t in times) + f"{ratio:>9.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
