"""Command-line entry point: tune, compare, sweep and simulate.

Exit codes: 0 success, 2 invalid configuration or input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .benchmarks import IAE, get_benchmark
from .config import METHODS, default_config
from .control import (
    GainMatrix,
    WeightingConfig,
    compute_gain,
    quadratic_index,
    simulate_closed_loop,
    solve_care,
    stability_check,
)
from .errors import NoConvergence, NonControllable, RmoQpsoError
from .harness import (
    SweepPlan,
    comparison_summary,
    export_results,
    factorial_sweep,
    repeated_runs,
    runs_csv,
)
from .metrics import response_metrics
from .objectives import split_position
from .optimizers.runner import run_method

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
DEFAULT_METHODS = "ga,de,abc,pso,cpso,aiwpso,lm,rmo-qpso"

log = logging.getLogger("rmoqpso")


class NumericalFailure(RmoQpsoError):
    """No usable controller came out of a run."""


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _overrides(args) -> dict:
    out = {}
    for attr, key in (("iterations", "iterations"), ("swarm", "swarm_size"), ("g", "g"), ("dwa_f", "dwa_f"),
                      ("eq17_mode", "eq17_mode"), ("rise_sign", "rise_sign")):
        val = getattr(args, attr, None)
        if val is not None:
            out[key] = val
    return out


def _gain_from_weights(bench, q, r):
    weights = WeightingConfig(q, r)
    P = solve_care(bench.model, weights)
    return compute_gain(P, bench.model, weights), weights


def _closed_loop(bench, gain):
    traj = simulate_closed_loop(bench.model, gain, bench.x0, bench.horizon, bench.dt)
    if traj.blown_up:
        raise NumericalFailure("closed-loop simulation diverged")
    return traj


def cmd_tune(args) -> int:
    bench = get_benchmark(args.benchmark)
    config = default_config(args.method, seed=args.seed, **_overrides(args))
    out = run_method(config, bench, verbose=args.verbose)
    if not (out.objective.feasible and out.objective.finite):
        raise NumericalFailure("the run produced no feasible controller with finite objectives")
    q, r = split_position(out.position, bench.model.n)
    gain, _ = _gain_from_weights(bench, q, r)
    traj = _closed_loop(bench, gain)
    summary = {
        "command": "tune",
        "config": config.to_dict(),
        "seed": config.seed,
        "eq17_mode": config.eq17_mode,
        "rise_sign": config.rise_sign,
        "position": out.position,
        "Q": q,
        "R": r,
        "K": gain.K,
        "objective": out.objective.to_dict(),
        "fitness": out.fitness,
        "evaluations": out.evaluations,
        "archive_size": len(out.archive) if out.archive is not None else None,
    }
    export_results(args.out, summary, bench, out.archive, traj, config, timestamp=_now())
    print(f"fitness={out.fitness:.6g} J={out.objective.J:.6g} -> {args.out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    bench = get_benchmark(args.benchmark)
    methods = [m.strip().lower() for m in args.methods.split(",") if m.strip()]
    if not methods:
        raise ValueError("no methods given")
    configs = {m: default_config(m, seed=args.seed, **_overrides(args)) for m in methods}
    by_method = {}
    for m in methods:
        by_method[m] = repeated_runs(configs[m], bench, args.runs, args.seed)
        log.info("%s done", m)
    summary = comparison_summary(by_method, configs, args.seed, args.runs)
    out = Path(args.out)
    export_results(out, summary, bench, timestamp=_now())
    (out / "runs.csv").write_text(runs_csv(by_method, bench.model.n, bench.model.m))
    for m in methods:
        row = summary["summary"][m]["fitness"]
        print(f"{m:>9s} mean fitness {row['mean']}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    plan = SweepPlan.load(args.plan, method=args.method.lower(), benchmark=args.benchmark)
    if args.repetitions is not None:
        plan.repetitions = args.repetitions
    bench = get_benchmark(plan.benchmark)
    result = factorial_sweep(plan, bench)
    out = Path(args.out)
    summary = {
        "command": "sweep",
        "plan": plan.to_dict(),
        "cells": len(result.cells),
        "best_params": result.best_params,
        "best_config": result.best_config.to_dict(),
        "best_mean_fitness": min(c["mean"] for c in result.cells),
    }
    export_results(out, summary, bench, timestamp=_now())
    (out / "sweep.csv").write_text(result.to_csv())
    print(f"best {result.best_params} over {len(result.cells)} cells")
    return EXIT_OK


def _load_gain(path, bench):
    """Gain plus the weights it came from; weights win over a stored K, which gets None."""
    doc = json.loads(Path(path).read_text())
    n, m = bench.model.n, bench.model.m
    if "Q" in doc and "R" in doc:
        return _gain_from_weights(bench, doc["Q"], doc["R"])
    if "position" in doc:
        q, r = split_position(doc["position"], n)
        return _gain_from_weights(bench, q, r)
    if "K" in doc:
        K = np.asarray(doc["K"], dtype=float)
        if K.shape != (m, n):
            raise ValueError(f"K must be {m}x{n}, got {K.shape}")
        return GainMatrix(K), None
    raise ValueError("gains file needs 'K', 'Q' and 'R', or 'position'")


def cmd_simulate(args) -> int:
    bench = get_benchmark(args.benchmark)
    gain, weights = _load_gain(args.gains, bench)
    if stability_check(bench.model, gain) >= 0:
        raise NumericalFailure("gain does not stabilize the plant")
    traj = _closed_loop(bench, gain)
    met = response_metrics(traj, bench.metric_spec, with_iae=bench.tail_kind == IAE)
    summary = {"command": "simulate", "K": gain.K, "metrics": asdict(met)}
    if weights is not None:
        summary["J"] = quadratic_index(traj, weights)
    export_results(args.out, summary, bench, traj=traj, timestamp=_now())
    print(f"simulated {len(traj.times)} samples -> {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rmoqpso", description="Multi-objective LQR weight tuning.")
    parser.add_argument("-v", "--verbose", action="store_true", help="progress log on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--benchmark", default="pendulum", help="pendulum, flight or a model JSON file")
        p.add_argument("--out", required=True, help="output directory")

    def tuning(p):
        p.add_argument("--iterations", type=int)
        p.add_argument("--swarm", type=int)

    p = sub.add_parser("tune", help="run one optimizer once and export its result")
    common(p)
    tuning(p)
    p.add_argument("--method", default="rmo-qpso", choices=METHODS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--g", type=float)
    p.add_argument("--dwa-f", type=int)
    p.add_argument("--eq17-mode", choices=("literal", "corrected", "penalty-only"))
    p.add_argument("--rise-sign", type=float, choices=(1.0, -1.0))
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("compare", help="repeated seeded runs of several methods with statistics")
    common(p)
    tuning(p)
    p.add_argument("--methods", default=DEFAULT_METHODS)
    p.add_argument("--runs", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="full-factorial parameter sweep")
    common(p)
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--plan", required=True, help="JSON sweep plan")
    p.add_argument("--repetitions", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="simulate a given gain and export the time series")
    common(p)
    p.add_argument("--gains", required=True, help="JSON with K, Q and R, or position")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(message)s")
    try:
        return args.func(args)
    except (NoConvergence, NonControllable, NumericalFailure, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
