"""Compare the compiled pivot kernel against the pure-numpy fallback.

The kernel is chosen once at import time from WATERNET_PURE_NUMPY, so the
comparison runs this script twice in subprocesses, once per mode, and
prints both timings side by side:

    python3 benchmarks/bench_simplex.py            # both modes
    python3 benchmarks/bench_simplex.py --reps 50  # heavier run
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time


def build_workload(reps: int):
    import numpy as np

    rng = np.random.default_rng(7)
    dense = []
    for _ in range(reps):
        m, n = 40, 60
        A = rng.integers(-3, 4, size=(m, n)).astype(float)
        b = rng.uniform(1.0, 5.0, size=m)
        c = rng.integers(-4, 5, size=n).astype(float)
        dense.append((c, A, b))
    return dense


def run_child(reps: int) -> dict:
    from waternet import _kernels, gen
    from waternet.simplex import LE, solve_lp
    from waternet.solve import solve_network

    import numpy as np

    dense = build_workload(reps)
    sense = np.full(40, LE, dtype=np.int8)
    # warm up: first call compiles (or not) outside the timed region
    c, A, b = dense[0]
    solve_lp(c, A, sense, b)

    t0 = time.perf_counter()
    total_iters = 0
    for c, A, b in dense:
        res = solve_lp(c, A, sense, b, maximize=True)
        total_iters += res.iterations
    lp_time = time.perf_counter() - t0

    net = gen.generate("refinery", seed=1)
    solve_network(net, parts=2)   # warm any lazy setup
    t0 = time.perf_counter()
    sol = solve_network(net, parts=2)
    net_time = time.perf_counter() - t0

    return {
        "using_numba": _kernels.USING_NUMBA,
        "dense_lps": reps,
        "dense_seconds": lp_time,
        "dense_us_per_solve": 1e6 * lp_time / reps,
        "pivot_iterations": total_iters,
        "network_seconds": net_time,
        "network_leaves": sol.leaf_count,
    }


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=200,
                        help="number of dense 40x60 LPs to solve (default 200)")
    parser.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.child:
        print(json.dumps(run_child(args.reps)))
        return 0

    results = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, WATERNET_PURE_NUMPY=flag)
        out = subprocess.run(
            [sys.executable, os.path.abspath(__file__),
             "--child", "--reps", str(args.reps)],
            capture_output=True, text=True, env=env, check=True)
        results[label] = json.loads(out.stdout)

    if results["numba"]["using_numba"] is not True:
        print("note: numba unavailable, both rows use the numpy path")
    print(f"{'path':<8} {'dense us/LP':>12} {'pivots':>9} {'network solve':>14}")
    for label, r in results.items():
        print(f"{label:<8} {r['dense_us_per_solve']:>12.1f} "
              f"{r['pivot_iterations']:>9} {r['network_seconds']*1e3:>11.1f} ms")
    same_pivots = (results["numba"]["pivot_iterations"]
                   == results["numpy"]["pivot_iterations"])
    speed = results["numpy"]["dense_us_per_solve"] / max(
        results["numba"]["dense_us_per_solve"], 1e-9)
    print(f"identical pivot counts: {same_pivots}; numba speedup on dense LPs: "
          f"{speed:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
