"""Compare the compiled window-sum kernel against the pure-NumPy fallback.

Run:  python benchmarks/bench_windows.py
The fallback is forced in a subprocess via CHARGELAB_PURE=1 so both variants
are timed in a fresh interpreter.  The kernel takes per-axis half-open index
ranges and evaluates the full cartesian product of windows, so the workload
per case is roughly `queries` window sums.
"""

import json
import os
import subprocess
import sys
import time

import numpy as np


def run_case(d, n, queries, repeats=5):
    from chargelab import windows

    rng = np.random.default_rng(0)
    values = rng.random((n,) * d)
    prefix = windows.build_prefix(values)
    q_axis = max(2, round(queries ** (1.0 / d)))
    i0s = [rng.integers(0, n // 2, size=q_axis) for _ in range(d)]
    i1s = [a + rng.integers(1, n // 2, size=q_axis) for a in i0s]
    # warm up + correctness anchor against direct slicing
    out = windows.box_window_sums(prefix, i0s, i1s)
    for _ in range(20):
        idx = tuple(rng.integers(0, q_axis) for _ in range(d))
        a = [i0s[k][idx[k]] for k in range(d)]
        b = [i1s[k][idx[k]] for k in range(d)]
        ref = windows.box_window_sum_direct(values, a, b)
        assert abs(out[idx] - ref) <= 1e-10 * values.size
    best = min(_time_once(windows, prefix, i0s, i1s) for _ in range(repeats))
    return {"kernel": windows.KERNEL, "d": d, "n": n,
            "queries": q_axis**d, "best_seconds": best}


def _time_once(windows, prefix, i0s, i1s):
    t0 = time.perf_counter()
    windows.box_window_sums(prefix, i0s, i1s)
    return time.perf_counter() - t0


def main():
    if len(sys.argv) > 1 and sys.argv[1] == "--single":
        rows = [run_case(1, 1 << 18, 200_000),
                run_case(2, 1024, 250_000),
                run_case(3, 128, 250_000),
                run_case(4, 32, 200_000)]
        print(json.dumps(rows))
        return
    results = {}
    for pure in (False, True):
        env = dict(os.environ)
        env.pop("CHARGELAB_PURE", None)
        if pure:
            env["CHARGELAB_PURE"] = "1"
        out = subprocess.run(
            [sys.executable, __file__, "--single"],
            env=env, capture_output=True, text=True, check=True,
        )
        rows = json.loads(out.stdout.strip().splitlines()[-1])
        results[rows[0]["kernel"]] = rows
    kernels = sorted(results)
    print(f"{'case':>16} " + " ".join(f"{k:>12}" for k in kernels) + "   speedup")
    for i, row in enumerate(results[kernels[0]]):
        label = f"d={row['d']} n={row['n']}"
        times = [results[k][i]["best_seconds"] for k in kernels]
        cy = results.get("cython", [None] * 4)[i]
        pu = results.get("pure", [None] * 4)[i]
        cells = " ".join(f"{t * 1e3:>10.3f}ms" for t in times)
        if cy and pu:
            speed = f"{pu['best_seconds'] / cy['best_seconds']:7.2f}x"
        else:
            speed = "    n/a"
        print(f"{label:>16} {cells} {speed}")


if __name__ == "__main__":
    main()
