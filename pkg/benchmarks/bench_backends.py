"""Benchmark the numba and pure-numpy backends on the hot kernels.

The backend is frozen at import time from FRACVOL_BACKEND, so this script
re-executes itself in a subprocess per backend and compares wall times on
identical workloads (fBM transform, Willard moments, conditional pricing,
log-sum-exp of the exponential functional).

Run:  python benchmarks/bench_backends.py
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
import time

WORKLOADS = ("fbm_transform", "willard_moments", "conditional_call",
             "log_trapezoid_exp")


def run_workloads() -> dict:
    import numpy as np

    from fracvol import _kernels, backend
    from fracvol.fbm import get_kernel_grid

    rng = np.random.default_rng(0)
    kg = get_kernel_grid(0.25, 200)
    n_paths = 20000
    dt = kg.grid.dt
    d_bm = np.sqrt(dt) * rng.standard_normal((n_paths, 200))
    scale = np.ascontiguousarray(kg.weights / dt)
    sig = 0.1 + 0.05 * np.tanh(rng.standard_normal((n_paths, 200)))
    spot_eff = np.exp(0.01 * rng.standard_normal(n_paths))
    total_sd = 0.05 + 0.01 * rng.random(n_paths)
    z = rng.standard_normal((n_paths, 512))
    w = np.full(512, 1.0 / 511)

    calls = {
        "fbm_transform": lambda: _kernels.fbm_transform(d_bm, scale),
        "willard_moments": lambda: _kernels.willard_moments(sig, d_bm, dt),
        "conditional_call": lambda: _kernels.conditional_call(
            spot_eff, total_sd, 1.01),
        "log_trapezoid_exp": lambda: _kernels.log_trapezoid_exp(z, w),
    }
    results = {"backend": backend.BACKEND}
    for name in WORKLOADS:
        fn = calls[name]
        fn()  # warm-up (JIT compile on the numba backend)
        best = float("inf")
        for _ in range(5):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
        results[name] = best
    return results


def main() -> None:
    if os.environ.get("_BENCH_CHILD"):
        print(json.dumps(run_workloads()))
        return
    rows = {}
    for backend in ("numpy", "numba"):
        env = dict(os.environ, FRACVOL_BACKEND=backend, _BENCH_CHILD="1")
        out = subprocess.run([sys.executable, os.path.abspath(__file__)],
                             env=env, capture_output=True, text=True,
                             check=True)
        rows[backend] = json.loads(out.stdout.strip().splitlines()[-1])
    print(f"{'workload':<22}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name in WORKLOADS:
        a = rows["numpy"][name] * 1e3
        b = rows["numba"][name] * 1e3
        print(f"{name:<22}{a:>12.3f}{b:>12.3f}{a / b:>10.2f}x")


if __name__ == "__main__":
    main()
