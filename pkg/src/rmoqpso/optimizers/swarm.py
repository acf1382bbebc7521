"""Velocity-based particle swarms: standard PSO, chaotic CPSO and AIWPSO.

The three variants share :func:`pso_step`; they differ only in where the
inertia weight and the two acceleration random vectors come from.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import OptimizerConfig
from .common import CountingFitness, OptimizeResult, box

_LOGISTIC_FIXED = np.array([0.0, 0.25, 0.5, 0.75, 1.0])


@dataclass
class SwarmState:
    positions: np.ndarray
    velocities: np.ndarray
    fitness: np.ndarray
    pbest: np.ndarray
    pbest_f: np.ndarray
    gbest: np.ndarray
    gbest_f: float
    rng: np.random.Generator
    t: int = 0
    aux: dict = field(default_factory=dict)

    @classmethod
    def initialize(cls, positions, fitness, rng) -> "SwarmState":
        positions = np.array(positions, dtype=float)
        fitness = np.asarray(fitness, dtype=float)
        best = int(np.argmin(fitness))
        return cls(
            positions=positions,
            velocities=np.zeros_like(positions),
            fitness=fitness.copy(),
            pbest=positions.copy(),
            pbest_f=fitness.copy(),
            gbest=positions[best].copy(),
            gbest_f=float(fitness[best]),
            rng=rng,
        )

    def update_bests(self) -> np.ndarray:
        improved = self.fitness < self.pbest_f
        self.pbest[improved] = self.positions[improved]
        self.pbest_f[improved] = self.fitness[improved]
        best = int(np.argmin(self.pbest_f))
        if self.pbest_f[best] < self.gbest_f or not np.isfinite(self.gbest_f):
            self.gbest = self.pbest[best].copy()
            self.gbest_f = float(self.pbest_f[best])
        return improved


def _chaotic_seed(rng: np.random.Generator, shape) -> np.ndarray:
    z = rng.random(shape)
    while True:
        near = np.min(np.abs(z[..., None] - _LOGISTIC_FIXED), axis=-1) < 1e-3
        if not near.any():
            return z
        z[near] = rng.random(int(near.sum()))


def _logistic(z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    z = 4.0 * z * (1.0 - z)
    stuck = np.min(np.abs(z[..., None] - _LOGISTIC_FIXED), axis=-1) < 1e-12
    if stuck.any():
        z[stuck] = _chaotic_seed(rng, int(stuck.sum()))
    return z


def inertia(config: OptimizerConfig, t: int, T: int) -> float:
    """Linearly decaying inertia from ``w_max`` to ``w_min``."""
    if T <= 0:
        return config.w_max
    return config.w_max - (config.w_max - config.w_min) * t / T


def pso_step(
    state: SwarmState,
    config: OptimizerConfig,
    fitness,
    lower,
    upper,
    T: int | None = None,
    variant: str = "pso",
) -> SwarmState:
    """Advance the swarm one iteration in place and return it."""
    S, D = state.positions.shape
    lo, hi = box(D, lower, upper)
    T = config.iterations if T is None else T
    rng = state.rng
    v_max = config.v_max_frac * (hi - lo)

    if variant == "cpso":
        zp = state.aux.get("z_p")
        zg = state.aux.get("z_g")
        if zp is None:
            zp, zg = _chaotic_seed(rng, (S, D)), _chaotic_seed(rng, (S, D))
        zp, zg = _logistic(zp, rng), _logistic(zg, rng)
        state.aux["z_p"], state.aux["z_g"] = zp, zg
        r_p, r_g = zp, zg
        w = inertia(config, state.t, T)
    else:
        r_p = rng.random((S, D))
        r_g = rng.random((S, D))
        if variant == "aiwpso":
            frac = state.aux.get("improved_fraction", 1.0)
            w = config.w_min + (config.w_max - config.w_min) * frac
        else:
            w = inertia(config, state.t, T)

    X = state.positions
    V = w * state.velocities + config.c_p * r_p * (state.pbest - X) + config.c_g * r_g * (state.gbest - X)
    V = np.clip(V, -v_max, v_max)
    X = np.clip(X + V, lo, hi)
    state.velocities = V
    state.positions = X
    state.fitness = np.array([fitness(x) for x in X])
    improved = state.update_bests()
    state.aux["improved_fraction"] = float(np.mean(improved))
    state.t += 1
    return state


def pso_run(fitness, dim: int, config: OptimizerConfig, lower=0.0, upper=None, variant: str | None = None) -> OptimizeResult:
    variant = variant or (config.method if config.method in ("pso", "cpso", "aiwpso") else "pso")
    upper = config.x_max if upper is None else upper
    lo, hi = box(dim, lower, upper)
    rng = np.random.default_rng(config.seed)
    f = CountingFitness(fitness)
    X = rng.uniform(lo, hi, size=(config.swarm_size, dim))
    state = SwarmState.initialize(X, f.many(X), rng)
    history = [state.gbest_f]
    for _ in range(config.iterations):
        pso_step(state, config, f, lo, hi, variant=variant)
        history.append(state.gbest_f)
    return OptimizeResult(state.gbest.copy(), state.gbest_f, history, f.calls)
