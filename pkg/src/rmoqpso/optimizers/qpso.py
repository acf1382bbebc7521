"""Quantum-behaved PSO and its reinforced multi-objective variant for LQR tuning.

Particles carry no velocity. Each one is resampled around a local attractor
(a random convex combination of its personal best and the global best) at a
distance drawn from the delta-potential-well distribution. The reinforced
variant adds a simulated-annealing initialization, a tournament/blend repair
of infeasible particles, dynamically weighted aggregation and an external
Pareto archive.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..archive import ParetoArchive
from ..config import G_MIN, OptimizerConfig
from ..objectives import (
    DwaSchedule,
    Evaluator,
    ObjectiveVector,
    aggregate_fitness,
    is_feasible,
    penalty_reward_factor,
    repair_probability,
    scalarized_fitness,
    swarm_fitness,
)
from .common import CountingFitness, OptimizeResult, box

log = logging.getLogger(__name__)


def local_attractor(pbest, gbest, rng: np.random.Generator, c_p: float | None = None, c_g: float | None = None):
    """Random convex combination of personal and global best.

    Weights are drawn from U[0, 1] unless given; a (0, 0) draw is redrawn.
    """
    pbest = np.asarray(pbest, dtype=float)
    gbest = np.asarray(gbest, dtype=float)
    if c_p is None or c_g is None:
        c_p, c_g = rng.random(), rng.random()
        while c_p + c_g == 0.0:
            c_p, c_g = rng.random(), rng.random()
    elif c_p + c_g == 0.0:
        raise ValueError("attractor weights must not both be zero")
    return (c_p * pbest + c_g * gbest) / (c_p + c_g)


def qpso_sample(x, p, g: float, rng: np.random.Generator, lower=-np.inf, upper=np.inf, u=None, signs=None):
    """``p -/+ (|x - p| / g) * ln(1/u)`` per component, clamped to the box."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    if u is None:
        u = 1.0 - rng.random(x.shape)  # (0, 1]
    if signs is None:
        signs = np.where(rng.random(x.shape) < 0.5, -1.0, 1.0)
    L = np.abs(x - p) / g
    return np.clip(p + signs * L * np.log(1.0 / u), lower, upper)


def contraction(config: OptimizerConfig, t: int, T: int) -> float:
    """g at iteration t (1-based); the linear option decays g_start -> g_end in units of ln 2."""
    if config.g_schedule == "fixed":
        return config.g
    frac = 0.0 if T <= 1 else (t - 1) / (T - 1)
    return G_MIN * (config.g_start + (config.g_end - config.g_start) * frac)


def qpso_run(fitness, dim: int, config: OptimizerConfig, lower=0.0, upper=None) -> OptimizeResult:
    """Standard single-objective QPSO; returns the global best."""
    upper = config.x_max if upper is None else upper
    lo, hi = box(dim, lower, upper)
    rng = np.random.default_rng(config.seed)
    f = CountingFitness(fitness)
    S, T = config.swarm_size, config.iterations
    X = rng.uniform(lo, hi, size=(S, dim))
    fit = f.many(X)
    pbest, pbest_f = X.copy(), fit.copy()
    gi = int(np.argmin(pbest_f))
    gbest, gbest_f = pbest[gi].copy(), float(pbest_f[gi])
    history = [gbest_f]
    for t in range(1, T + 1):
        g = contraction(config, t, T)
        for i in range(S):
            p = local_attractor(pbest[i], gbest, rng)
            X[i] = qpso_sample(X[i], p, g, rng, lo, hi)
            fit[i] = f(X[i])
            if fit[i] < pbest_f[i]:
                pbest[i], pbest_f[i] = X[i].copy(), fit[i]
                if fit[i] < gbest_f:
                    gbest, gbest_f = X[i].copy(), float(fit[i])
        history.append(gbest_f)
    return OptimizeResult(gbest, gbest_f, history, f.calls)


@dataclass
class SaInitParams:
    iterations: int = 10
    alpha: float = 0.1
    sigma: float = 100.0
    p_succ: float = 0.5
    x_max: float = 1000.0

    def __post_init__(self):
        if self.iterations < 0 or self.alpha <= 0 or self.sigma < 0 or not 0 <= self.p_succ <= 1:
            raise ValueError("invalid simulated-annealing parameters")

    @classmethod
    def from_config(cls, config: OptimizerConfig) -> "SaInitParams":
        return cls(
            iterations=config.sa_iterations,
            alpha=config.sa_alpha,
            sigma=config.sa_sigma_frac * config.x_max,
            p_succ=config.sa_p_succ,
            x_max=config.x_max,
        )


@dataclass
class SaInitResult:
    positions: np.ndarray
    fitness: np.ndarray
    weights: np.ndarray
    objectives: list


def sa_informed_init(params: SaInitParams, size: int, dim: int, fitness, rng: np.random.Generator) -> SaInitResult:
    """Simulated-annealing warm start of a swarm inside ``[0, x_max]^dim``.

    ``fitness(x, w1, w2)`` returns ``(value, payload)``. Each particle draws
    its own random aggregation weights and keeps them for all of its
    annealing steps.
    """
    X = rng.uniform(0.0, params.x_max, size=(size, dim))
    fits = np.empty(size)
    weights = np.empty((size, 2))
    payloads = []
    for i in range(size):
        w1, w2 = rng.random(), rng.random()
        weights[i] = (w1, w2)
        x = X[i].copy()
        fx, px = fitness(x, w1, w2)
        for t in range(1, params.iterations + 1):
            succ = x.copy()
            mutate = rng.random(dim) < params.p_succ
            noise = rng.normal(0.0, 1.0, dim) * params.sigma
            succ[mutate] = np.clip(x[mutate] + noise[mutate], 0.0, params.x_max)
            fs, ps = fitness(succ, w1, w2)
            delta = fx - fs
            temperature = math.exp(-params.alpha * t)
            accept_draw = rng.random()
            if np.isnan(delta) or delta > 0:
                accept = True
            else:
                accept = accept_draw < math.exp(delta / temperature)
            if accept:
                x, fx, px = succ, fs, ps
        X[i] = x
        fits[i] = fx
        payloads.append(px)
    return SaInitResult(X, fits, weights, payloads)


def blend_repair(pos, bad, p1, p2, lam, swap):
    """Overwrite ``bad`` components with ``lam*p1 + (1-lam)*p2`` (or the swapped blend)."""
    out = np.array(pos, dtype=float)
    lam = np.broadcast_to(lam, out.shape)
    swap = np.broadcast_to(swap, out.shape)
    a = np.where(swap, 1.0 - lam, lam)
    blend = a * np.asarray(p1, dtype=float) + (1.0 - a) * np.asarray(p2, dtype=float)
    return np.where(bad, blend, out)


def repair_particle(
    pos,
    n: int,
    swarm_positions,
    swarm_fitness,
    donor_mask,
    rng: np.random.Generator,
    x_max: float = 1000.0,
    neighborhood: int = 5,
):
    """Map an infeasible particle into the feasible set using two strong feasible donors.

    Donors are the two fittest members of a random neighborhood of feasible
    particles. With fewer than two donors the infeasible components are
    resampled uniformly in ``(0, x_max]``.
    """
    pos = np.asarray(pos, dtype=float)
    bad = ~is_feasible(pos, n)
    if not bad.any():
        return pos.copy()
    donors = np.flatnonzero(np.asarray(donor_mask, dtype=bool))
    if donors.size < 2:
        out = pos.copy()
        while True:
            out[bad] = x_max * (1.0 - rng.random(int(bad.sum())))
            bad = ~is_feasible(out, n)
            if not bad.any():
                return out
    hood = rng.choice(donors, size=min(neighborhood, donors.size), replace=False)
    fit = np.asarray(swarm_fitness, dtype=float)[hood]
    order = hood[np.argsort(fit, kind="stable")]
    p1 = np.asarray(swarm_positions[order[0]], dtype=float)
    p2 = np.asarray(swarm_positions[order[1]], dtype=float)
    lam = rng.random(pos.size)
    swap = rng.random(pos.size) < 0.5
    return blend_repair(pos, bad, p1, p2, lam, swap)


@dataclass
class RmoQpsoResult:
    archive: ParetoArchive
    positions: np.ndarray
    objectives: list
    gbest: np.ndarray
    gbest_f: float
    history: list = field(default_factory=list)
    evaluations: int = 0

    def final_front(self) -> list:
        """Feasible non-dominated members of the last evaluated swarm."""
        front = ParetoArchive(capacity=len(self.objectives) + 1)
        for x, o in zip(self.positions, self.objectives):
            if o.feasible and o.finite:
                front.insert(x, o)
        return front.entries


def _archive_swarm(archive, positions, objectives):
    for x, o in zip(positions, objectives):
        if o.feasible and o.finite:
            archive.insert(x, o)


def rescore_bests(pbest_obj, objs, w1, w2, mode="corrected", phi=10.0, sign=1.0) -> np.ndarray:
    """Fitness of each personal best under this iteration's weights.

    Personal best i is ranked against the current swarm minus particle i,
    the same comparison set particle i's own reward uses, so the two values
    are comparable.
    """
    V = np.array([o.values() for o in objs])
    P = np.array([o.values() for o in pbest_obj])
    S = len(objs)
    Pi, Vj = P[:, None, :], V[None, :, :]
    beats = np.all(Pi <= Vj, axis=2) & np.any(Pi < Vj, axis=2)
    beaten = np.all(Vj <= Pi, axis=2) & np.any(Vj < Pi, axis=2)
    np.fill_diagonal(beats, False)
    np.fill_diagonal(beaten, False)
    reward = beats.sum(1) - beaten.sum(1)
    out = np.empty(S)
    for i, o in enumerate(pbest_obj):
        f_pr = penalty_reward_factor(reward[i], S, o.feasible, o.repair_prob, mode, phi)
        out[i] = aggregate_fitness(o, w1, w2, f_pr, sign)
    return out


def rmo_qpso_run(
    config: OptimizerConfig,
    bench,
    dwa: DwaSchedule | None = None,
    evaluator: Evaluator | None = None,
    verbose: bool = False,
) -> RmoQpsoResult:
    """Reinforced multi-objective QPSO over diagonal (Q, R) for one benchmark."""
    evaluator = evaluator or Evaluator(bench)
    dwa = dwa or DwaSchedule(config.dwa_f)
    rng = np.random.default_rng(config.seed)
    n = bench.model.n
    dim = bench.dimension
    lo, hi = np.zeros(dim), np.full(dim, config.x_max)
    S, T = config.swarm_size, config.iterations
    mode, phi, sign = config.eq17_mode, config.phi, config.rise_sign
    archive = ParetoArchive(capacity=config.archive_capacity)

    def sa_fitness(x, w1, w2):
        obj = evaluator(x)
        return aggregate_fitness(obj, w1, w2, 1.0 if obj.feasible else phi, sign), obj

    init = sa_informed_init(SaInitParams.from_config(config), S, dim, sa_fitness, rng)
    X = init.positions
    objs: list[ObjectiveVector] = list(init.objectives)
    _archive_swarm(archive, X, objs)

    pbest = X.copy()
    pbest_f = np.full(S, np.inf)
    gbest, gbest_f = X[int(np.argmin(init.fitness))].copy(), np.inf
    evaluated = X.copy()
    history = []

    for t in range(1, T + 1):
        if t > 1:
            objs = [evaluator(x) for x in X]
        w1, w2 = dwa(t)
        fit = swarm_fitness(objs, w1, w2, mode, phi, sign)

        feasible = np.array([o.feasible for o in objs])
        repaired = False
        for i in np.flatnonzero(~feasible):
            if rng.random() < repair_probability(X[i], n):
                X[i] = repair_particle(X[i], n, X, fit, feasible, rng, config.x_max)
                objs[i] = evaluator(X[i])
                repaired = True
        if repaired:
            fit = swarm_fitness(objs, w1, w2, mode, phi, sign)
        _archive_swarm(archive, X, objs)
        evaluated = X.copy()

        g = contraction(config, t, T)
        if config.best_update == "rescore":
            if t == 1:
                pbest_obj = list(objs)
            pbest_f = rescore_bests(pbest_obj, objs, w1, w2, mode, phi, sign)
            for i in np.flatnonzero(fit < pbest_f):
                pbest[i], pbest_obj[i] = X[i].copy(), objs[i]
            pbest_f = rescore_bests(pbest_obj, objs, w1, w2, mode, phi, sign)
            gi = int(np.argmin(pbest_f))
            gbest, gbest_f = pbest[gi].copy(), float(pbest_f[gi])
        else:
            for i in range(S):
                if fit[i] < pbest_f[i]:
                    pbest[i], pbest_f[i] = X[i].copy(), fit[i]
                    if fit[i] < gbest_f:
                        gbest, gbest_f = X[i].copy(), float(fit[i])
        for i in range(S):
            p = local_attractor(pbest[i], gbest, rng)
            X[i] = qpso_sample(X[i], p, g, rng, lo, hi)
        history.append(gbest_f)
        if verbose:
            log.info("t=%d gbest=%.6g archive=%d", t, gbest_f, len(archive))

    return RmoQpsoResult(archive, evaluated, objs, gbest, gbest_f, history, evaluator.calls)


def representative(entries, phi: float = 10.0, rise_sign: float = 1.0):
    """Archive entry minimizing the fixed-weight (0.5, 0.5) aggregate."""
    if not entries:
        return None
    scores = [scalarized_fitness(e.objective, phi, rise_sign) for e in entries]
    return entries[int(np.argmin(scores))]
