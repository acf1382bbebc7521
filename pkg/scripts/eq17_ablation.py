"""Ablation of the penalty/reward factor in the RMO-QPSO fitness.

Runs the three supported modes side by side against plain PSO:

* corrected     sigmoid(-|S| R), times phi when infeasible (package default)
* literal       sigmoid(|S| R) * P_r * phi, read verbatim
* penalty-only  1 when feasible, phi otherwise; the reward term is dropped

    python scripts/eq17_ablation.py --benchmark pendulum --runs 10
"""

import argparse

import numpy as np

from rmoqpso.benchmarks import get_benchmark
from rmoqpso.config import default_config
from rmoqpso.optimizers.runner import run_method

MODES = ("corrected", "literal", "penalty-only")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--benchmark", default="pendulum")
    ap.add_argument("--runs", type=int, default=10)
    args = ap.parse_args()
    bench = get_benchmark(args.benchmark)

    pso = np.array([run_method(default_config("pso", seed=s), bench).fitness for s in range(args.runs)])
    print(f"{'pso':>13s}  mean fitness {pso.mean():.4g}")
    for mode in MODES:
        outs = [run_method(default_config("rmo-qpso", seed=s, eq17_mode=mode), bench) for s in range(args.runs)]
        fit = np.array([o.fitness for o in outs])
        obj = np.array([o.objective.values() for o in outs]).mean(axis=0)
        print(f"{mode:>13s}  mean fitness {fit.mean():.4g}  beats pso {np.mean(fit < pso):.0%}  "
              f"J={obj[0]:.4g} OS={obj[1]:.3g} Tr={obj[2]:.3g} Ts={obj[3]:.3g} tail={obj[4]:.3g}")


if __name__ == "__main__":
    main()
