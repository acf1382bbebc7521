"""Seeded runs of several methods on one benchmark, with a Welch comparison.

    python scripts/run_benchmarks.py --benchmark flight --methods rmo-qpso,pso --runs 20
"""

import argparse
import time

import numpy as np

from rmoqpso.benchmarks import get_benchmark
from rmoqpso.config import default_config
from rmoqpso.harness import SUMMARY_FIELDS, repeated_runs
from rmoqpso.stats import welch_t_test


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--benchmark", default="pendulum")
    ap.add_argument("--methods", default="rmo-qpso,pso")
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    bench = get_benchmark(args.benchmark)
    records = {}
    for method in args.methods.split(","):
        start = time.perf_counter()
        records[method] = repeated_runs(default_config(method), bench, args.runs, args.seed)
        vals = np.array([[r.value(f) for f in SUMMARY_FIELDS] for r in records[method]])
        print(f"{method:>9s}  {time.perf_counter() - start:6.1f}s  mean "
              + "  ".join(f"{f}={v:.4g}" for f, v in zip(SUMMARY_FIELDS, vals.mean(axis=0))))

    names = list(records)
    for a in names:
        for b in names:
            if a == b or len(records[a]) < 2:
                continue
            fa = np.array([r.fitness for r in records[a]])
            fb = np.array([r.fitness for r in records[b]])
            if np.all(np.isfinite(fa)) and np.all(np.isfinite(fb)):
                p = welch_t_test(fa, fb).p if np.ptp(np.r_[fa, fb]) > 0 else 0.5
                print(f"{a} < {b}: wins {np.mean(fa < fb):.0%}  fitness Welch p={p:.3g}")


if __name__ == "__main__":
    main()
