#!/usr/bin/env python3
"""Compare the compiled (numba) and pure-numpy kernel backends.

Each backend is exercised in a fresh subprocess with SWSOLVER_BACKEND set,
because the backend is chosen once at import time. The child process times
the nodal-derivative and scatter-add kernels on benchmark-sized arrays and
a short parabolic-bowl integration, and prints one CSV line per timing.

Usage:
    python benchmarks/bench_kernels.py [--repeat N]
"""
from __future__ import annotations

import argparse
import os
import subprocess
import sys

CHILD = r"""
import json, time, timeit
import numpy as np
from swsolver import kernels
from swsolver.cases import default_config
from swsolver.driver import run_case

rng = np.random.default_rng(0)
results = {"backend": kernels.backend_name()}

# 1D derivative: carrier-runup sized (1250 elements, order 4)
f1 = rng.standard_normal((1250, 5))
D = rng.standard_normal((5, 5))
kernels.deriv_1d(f1, D)  # warm-up / JIT compile
results["deriv_1d"] = min(timeit.repeat(
    lambda: kernels.deriv_1d(f1, D), number=200, repeat=3)) / 200

# 2D derivatives: cone-island sized (304 elements, order 4)
f2 = rng.standard_normal((304, 5, 5))
kernels.deriv_x(f2, D); kernels.deriv_y(f2, D)
results["deriv_x"] = min(timeit.repeat(
    lambda: kernels.deriv_x(f2, D), number=200, repeat=3)) / 200
results["deriv_y"] = min(timeit.repeat(
    lambda: kernels.deriv_y(f2, D), number=200, repeat=3)) / 200

# scatter-add: CG assembly sized
idx = rng.integers(0, 5001, size=(1250, 5))
vals = rng.standard_normal((1250, 5))
out = np.zeros(5001)
kernels.scatter_add(out.copy(), idx, vals)
results["scatter_add"] = min(timeit.repeat(
    lambda: kernels.scatter_add(np.zeros(5001), idx, vals),
    number=200, repeat=3)) / 200

# end-to-end: short parabolic-bowl run (includes everything)
cfg = default_config("bowl_1d", n_elements=(32,), t_end=0.5)
run_case(cfg, max_steps=5)  # warm-up
t0 = time.perf_counter()
res = run_case(cfg)
results["bowl_run"] = time.perf_counter() - t0
results["bowl_steps"] = res.steps
print(json.dumps(results))
"""


def run_backend(backend: str) -> dict:
    env = dict(os.environ, SWSOLVER_BACKEND=backend)
    proc = subprocess.run([sys.executable, "-c", CHILD], env=env,
                          capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"{backend} benchmark failed:\n{proc.stderr}")
    import json
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--skip-numba", action="store_true",
                        help="only run the numpy backend")
    args = parser.parse_args(argv)

    backends = ["numpy"] if args.skip_numba else ["numpy", "numba"]
    rows = {b: run_backend(b) for b in backends}

    keys = ["deriv_1d", "deriv_x", "deriv_y", "scatter_add", "bowl_run"]
    print(f"{'kernel':<14}" + "".join(f"{b:>14}" for b in backends)
          + ("   speedup" if len(backends) == 2 else ""))
    for k in keys:
        line = f"{k:<14}"
        for b in backends:
            line += f"{rows[b][k] * 1e3:>12.3f}ms"
        if len(backends) == 2:
            line += f"{rows['numpy'][k] / rows['numba'][k]:>9.2f}x"
        print(line)
    steps = rows[backends[0]]["bowl_steps"]
    print(f"(bowl_run is a full {steps}-step integration; "
          "kernel rows are per-call times)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
