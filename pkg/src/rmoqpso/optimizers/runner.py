"""Run any configured method on a benchmark and report one selected solution."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..archive import ParetoArchive
from ..benchmarks import BenchmarkSpec
from ..config import OptimizerConfig
from ..errors import UnknownMethod
from ..objectives import Evaluator, ObjectiveVector, scalarized_fitness
from .evolutionary import abc_run, de_run, ga_run
from .lm import lm_run
from .qpso import qpso_run, representative, rmo_qpso_run
from .swarm import pso_run

BASELINES = {
    "pso": pso_run,
    "cpso": pso_run,
    "aiwpso": pso_run,
    "ga": ga_run,
    "de": de_run,
    "abc": abc_run,
    "qpso": qpso_run,
}


@dataclass
class MethodOutcome:
    position: np.ndarray
    objective: ObjectiveVector
    fitness: float
    evaluations: int
    archive: ParetoArchive | None = None
    history: list | None = None


def lm_residual(obj: ObjectiveVector) -> np.ndarray:
    effort = np.log10(max(obj.J, 1.0)) + obj.tail if np.isfinite(obj.J) else np.inf
    return np.array([effort, obj.OS, obj.Ts, obj.Tr], dtype=float)


def baseline_run(config: OptimizerConfig, bench: BenchmarkSpec, evaluator: Evaluator | None = None) -> MethodOutcome:
    """Single-objective baseline on the fixed-weight aggregate of the objectives."""
    evaluator = evaluator or Evaluator(bench)
    dim = bench.dimension

    def fitness(x):
        return scalarized_fitness(evaluator(x), config.phi, config.rise_sign)

    if config.method == "lm":
        res = lm_run(
            lambda x: lm_residual(evaluator(x)),
            np.full(dim, config.x_max / 2.0),
            config.iterations,
            lam=config.lam,
            step=config.fd_step_frac * config.x_max,
            lower=0.0,
            upper=config.x_max,
            objective=fitness,
        )
    elif config.method in BASELINES:
        res = BASELINES[config.method](fitness, dim, config, 0.0, config.x_max)
    else:
        raise UnknownMethod(f"{config.method!r} is not a baseline method")
    obj = evaluator(res.best_x)
    return MethodOutcome(res.best_x, obj, fitness(res.best_x), evaluator.calls, None, res.history)


def run_method(config: OptimizerConfig, bench: BenchmarkSpec, verbose: bool = False) -> MethodOutcome:
    evaluator = Evaluator(bench)
    if config.method == "rmo-qpso":
        res = rmo_qpso_run(config, bench, evaluator=evaluator, verbose=verbose)
        best = representative(res.archive.entries, config.phi, config.rise_sign)
        if best is None:
            obj = ObjectiveVector.sentinel(bench.tail_kind, feasible=False, repair_prob=0.0)
            return MethodOutcome(res.gbest, obj, np.inf, res.evaluations, res.archive, res.history)
        fit = scalarized_fitness(best.objective, config.phi, config.rise_sign)
        return MethodOutcome(best.position, best.objective, fit, res.evaluations, res.archive, res.history)
    return baseline_run(config, bench, evaluator)

