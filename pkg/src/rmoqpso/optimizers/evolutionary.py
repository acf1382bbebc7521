"""Genetic algorithm, DE/rand/1/bin and artificial bee colony baselines."""

from __future__ import annotations

import numpy as np

from ..config import OptimizerConfig
from .common import CountingFitness, OptimizeResult, box


def _tournament(fit: np.ndarray, k: int, rng) -> int:
    idx = rng.choice(fit.size, size=min(k, fit.size), replace=False)
    return int(idx[np.argmin(fit[idx])])


def ga_run(fitness, dim: int, config: OptimizerConfig, lower=0.0, upper=None) -> OptimizeResult:
    """Generational GA: tournament selection, uniform crossover, Gaussian mutation, one elite."""
    upper = config.x_max if upper is None else upper
    lo, hi = box(dim, lower, upper)
    rng = np.random.default_rng(config.seed)
    f = CountingFitness(fitness)
    S = config.swarm_size
    sigma = config.mutation_sigma_frac * (hi - lo)
    pop = rng.uniform(lo, hi, size=(S, dim))
    fit = f.many(pop)
    best = int(np.argmin(fit))
    best_x, best_f = pop[best].copy(), float(fit[best])
    history = [best_f]
    for _ in range(config.iterations):
        children = [pop[int(np.argmin(fit))].copy()]
        while len(children) < S:
            a = pop[_tournament(fit, config.tournament, rng)]
            b = pop[_tournament(fit, config.tournament, rng)]
            if rng.random() < config.p_c:
                mask = rng.random(dim) < 0.5
                c1, c2 = np.where(mask, a, b), np.where(mask, b, a)
            else:
                c1, c2 = a.copy(), b.copy()
            for child in (c1, c2):
                mut = rng.random(dim) < config.p_m
                child = child + mut * rng.normal(0.0, sigma)
                children.append(np.clip(child, lo, hi))
        pop = np.array(children[:S])
        fit = f.many(pop)
        i = int(np.argmin(fit))
        if fit[i] < best_f:
            best_x, best_f = pop[i].copy(), float(fit[i])
        history.append(best_f)
    return OptimizeResult(best_x, best_f, history, f.calls)


def de_run(fitness, dim: int, config: OptimizerConfig, lower=0.0, upper=None) -> OptimizeResult:
    """DE/rand/1/bin; ``p_m`` is the differential weight and ``p_c`` the crossover rate."""
    upper = config.x_max if upper is None else upper
    lo, hi = box(dim, lower, upper)
    rng = np.random.default_rng(config.seed)
    f = CountingFitness(fitness)
    S = config.swarm_size
    if S < 4:
        raise ValueError("DE needs at least 4 individuals")
    F, CR = config.p_m, config.p_c
    pop = rng.uniform(lo, hi, size=(S, dim))
    fit = f.many(pop)
    history = [float(fit.min())]
    for _ in range(config.iterations):
        for i in range(S):
            others = [j for j in range(S) if j != i]
            r1, r2, r3 = rng.choice(others, size=3, replace=False)
            mutant = np.clip(pop[r1] + F * (pop[r2] - pop[r3]), lo, hi)
            cross = rng.random(dim) < CR
            cross[rng.integers(dim)] = True
            trial = np.where(cross, mutant, pop[i])
            ft = f(trial)
            if ft <= fit[i]:
                pop[i], fit[i] = trial, ft
        history.append(float(fit.min()))
    best = int(np.argmin(fit))
    return OptimizeResult(pop[best].copy(), float(fit[best]), history, f.calls)


def _abc_quality(fit: np.ndarray) -> np.ndarray:
    q = np.where(fit >= 0, 1.0 / (1.0 + np.abs(fit)), 1.0 + np.abs(fit))
    return np.where(np.isfinite(fit), q, 0.0)


def abc_run(fitness, dim: int, config: OptimizerConfig, lower=0.0, upper=None) -> OptimizeResult:
    """Artificial bee colony: half employed, half onlookers, one scout per cycle."""
    upper = config.x_max if upper is None else upper
    lo, hi = box(dim, lower, upper)
    rng = np.random.default_rng(config.seed)
    f = CountingFitness(fitness)
    n_food = max(2, config.swarm_size // 2)
    n_onlook = max(1, config.swarm_size - n_food)
    limit = config.swarm_size * dim / 2.0
    food = rng.uniform(lo, hi, size=(n_food, dim))
    fit = f.many(food)
    trials = np.zeros(n_food, dtype=int)
    best = int(np.argmin(fit))
    best_x, best_f = food[best].copy(), float(fit[best])
    history = [best_f]

    def explore(i):
        k = int(rng.integers(n_food - 1))
        k += k >= i
        j = int(rng.integers(dim))
        cand = food[i].copy()
        cand[j] = np.clip(food[i, j] + rng.uniform(-1.0, 1.0) * (food[i, j] - food[k, j]), lo[j], hi[j])
        fc = f(cand)
        if fc < fit[i]:
            food[i], fit[i], trials[i] = cand, fc, 0
        else:
            trials[i] += 1

    for _ in range(config.iterations):
        for i in range(n_food):
            explore(i)
        q = _abc_quality(fit)
        probs = q / q.sum() if q.sum() > 0 else np.full(n_food, 1.0 / n_food)
        for _ in range(n_onlook):
            explore(int(rng.choice(n_food, p=probs)))
        i = int(np.argmin(fit))
        if fit[i] < best_f:
            best_x, best_f = food[i].copy(), float(fit[i])
        worn = int(np.argmax(trials))
        if trials[worn] > limit:
            food[worn] = rng.uniform(lo, hi)
            fit[worn] = f(food[worn])
            trials[worn] = 0
            if fit[worn] < best_f:
                best_x, best_f = food[worn].copy(), float(fit[worn])
        history.append(best_f)
    return OptimizeResult(best_x, best_f, history, f.calls)
