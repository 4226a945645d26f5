"""Time the numba and numpy tallies on the same workload and check they agree.

    python benchmarks/bench_backends.py --pairs 2000000 --repeat 5
"""
from __future__ import annotations

import argparse
import time

from eprsim import kernels
from eprsim.engine import RunConfig, run_setting


def main() -> None:
    p = argparse.ArgumentParser()
    p.add_argument("--pairs", type=int, default=2_000_000)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--threads", type=int, default=None, help="numba threads")
    args = p.parse_args()

    cfg = RunConfig(seed=1, pairs_per_setting=args.pairs, decoherence=0.1, threshold=0.1)
    kernels.set_threads(args.threads)
    backends = ["numpy"] + (["numba"] if kernels.HAVE_NUMBA else [])
    results = {}
    for backend in backends:
        run_setting(0.3, cfg.with_(pairs_per_setting=10), backend=backend)  # warm up / compile
        times = []
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            results[backend] = run_setting(0.3, cfg, backend=backend)
            times.append(time.perf_counter() - t0)
        best = min(times)
        print(f"{backend:6s} best {best * 1e3:9.2f} ms  {best / args.pairs * 1e9:7.2f} ns/pair")
    if len(results) == 2:
        same = results["numpy"] == results["numba"]
        print(f"identical counts: {same}")


if __name__ == "__main__":
    main()
