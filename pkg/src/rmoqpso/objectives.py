"""Candidate decoding, Pareto dominance and the aggregated DWA fitness."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .benchmarks import IAE, BenchmarkSpec
from .control import (
    R_EPS,
    WeightingConfig,
    compute_gain,
    quadratic_index,
    simulate_closed_loop,
    solve_care,
)
from .errors import DimensionMismatch, MixedBenchmarks, NoConvergence, NonControllable
from .metrics import response_metrics

INF = float("inf")
OBJECTIVE_NAMES = ("J", "OS", "Tr", "Ts", "tail")
PENALTY_PHI = 10.0
EQ17_MODES = ("corrected", "literal", "penalty-only")


@dataclass(frozen=True)
class ObjectiveVector:
    J: float
    OS: float
    Tr: float
    Ts: float
    tail: float
    tail_kind: str = "ess"
    feasible: bool = True
    repair_prob: float = 1.0

    def values(self) -> np.ndarray:
        return np.array([self.J, self.OS, self.Tr, self.Ts, self.tail], dtype=float)

    @property
    def finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values())))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def sentinel(cls, tail_kind: str = "ess", feasible: bool = True, repair_prob: float = 1.0):
        return cls(INF, INF, INF, INF, INF, tail_kind, feasible, repair_prob)


def split_position(pos, n: int):
    pos = np.asarray(pos, dtype=float).reshape(-1)
    return pos[:n], pos[n:]


def is_feasible(pos, n: int) -> np.ndarray:
    """Per-component feasibility mask: Q entries >= 0, R entries >= R_EPS."""
    pos = np.asarray(pos, dtype=float).reshape(-1)
    mask = np.empty(pos.size, dtype=bool)
    mask[:n] = pos[:n] >= 0.0
    mask[n:] = pos[n:] >= R_EPS
    return mask


def repair_probability(pos, n: int) -> float:
    """One minus the fraction of components that violate the weight constraints."""
    mask = is_feasible(pos, n)
    return 1.0 - float(np.count_nonzero(~mask)) / mask.size


def decode_and_evaluate(pos, bench: BenchmarkSpec) -> ObjectiveVector:
    """Position -> Riccati -> gain -> closed-loop simulation -> objectives.

    Infeasible positions are measured after clamping into the feasible set
    but keep ``feasible=False`` and their true repair probability.
    """
    n, m = bench.model.n, bench.model.m
    pos = np.asarray(pos, dtype=float).reshape(-1)
    if pos.size != n + m:
        raise DimensionMismatch(f"position has {pos.size} entries, benchmark needs {n + m}")
    mask = is_feasible(pos, n)
    feasible = bool(mask.all())
    p_r = 1.0 - float(np.count_nonzero(~mask)) / mask.size
    q, r = split_position(pos, n)
    weights = WeightingConfig(np.maximum(q, 0.0), np.maximum(r, R_EPS))
    kind = bench.tail_kind
    try:
        P = solve_care(bench.model, weights, check_controllability=False)
    except (NoConvergence, NonControllable, np.linalg.LinAlgError):
        return ObjectiveVector.sentinel(kind, feasible, p_r)
    gain = compute_gain(P, bench.model, weights)
    traj = simulate_closed_loop(bench.model, gain, bench.x0, bench.horizon, bench.dt)
    if traj.blown_up:
        return ObjectiveVector.sentinel(kind, feasible, p_r)
    J = quadratic_index(traj, weights)
    met = response_metrics(traj, bench.metric_spec, with_iae=(kind == IAE))
    tail = met.iae if kind == IAE else met.steady_state_error
    return ObjectiveVector(J, met.overshoot, met.rise_time, met.settling_time, tail, kind, feasible, p_r)


class Evaluator:
    """Memoizing wrapper around :func:`decode_and_evaluate` for one benchmark."""

    def __init__(self, bench: BenchmarkSpec):
        self.bench = bench
        self.calls = 0
        self._cache: dict[bytes, ObjectiveVector] = {}

    @property
    def dimension(self) -> int:
        return self.bench.dimension

    def __call__(self, pos) -> ObjectiveVector:
        pos = np.ascontiguousarray(pos, dtype=float).reshape(-1)
        key = pos.tobytes()
        hit = self._cache.get(key)
        if hit is None:
            self.calls += 1
            hit = decode_and_evaluate(pos, self.bench)
            if len(self._cache) > 50_000:
                self._cache.clear()
            self._cache[key] = hit
        return hit


def dominates(a: ObjectiveVector, b: ObjectiveVector) -> bool:
    """``a`` is no worse than ``b`` everywhere and strictly better somewhere."""
    if a.tail_kind != b.tail_kind:
        raise MixedBenchmarks(f"cannot compare {a.tail_kind} with {b.tail_kind}")
    va, vb = a.values(), b.values()
    return bool(np.all(va <= vb) and np.any(va < vb))


def dominance_matrix(values: np.ndarray) -> np.ndarray:
    """``D[i, j]`` is True when row i dominates row j."""
    V = np.asarray(values, dtype=float)
    le = np.all(V[:, None, :] <= V[None, :, :], axis=2)
    lt = np.any(V[:, None, :] < V[None, :, :], axis=2)
    return le & lt


def domination_rewards(objectives) -> np.ndarray:
    """Count of swarm members each particle dominates minus count dominating it."""
    kinds = {o.tail_kind for o in objectives}
    if len(kinds) > 1:
        raise MixedBenchmarks(f"mixed tail kinds {sorted(kinds)}")
    if len(objectives) == 0:
        return np.zeros(0, dtype=int)
    D = dominance_matrix(np.array([o.values() for o in objectives]))
    return D.sum(axis=1) - D.sum(axis=0)


def domination_reward(i: int, objectives) -> int:
    return int(domination_rewards(objectives)[i])


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def penalty_reward_factor(
    reward: float,
    swarm_size: int,
    feasible: bool,
    repair_prob: float = 1.0,
    mode: str = "corrected",
    phi: float = PENALTY_PHI,
) -> float:
    """Sigmoid-normalized domination reward combined with the constraint penalty.

    ``corrected`` shrinks the (minimized) fitness of dominant particles and
    inflates infeasible ones by ``phi``; ``literal`` is the printed product
    ``sigmoid(|S| R) * P_r * phi``. ``penalty-only`` drops the reward term
    and keeps just the infeasibility penalty; it exists for ablations.
    """
    if mode == "penalty-only":
        return 1.0 if feasible else phi
    if mode == "literal":
        return _sigmoid(swarm_size * reward) * repair_prob * phi
    if mode != "corrected":
        raise ValueError(f"unknown penalty-reward mode {mode!r}")
    return _sigmoid(-swarm_size * reward) * (1.0 if feasible else phi)


def dwa_weights(t: float, F: float) -> tuple[float, float]:
    if F < 1 or t < 0:
        raise ValueError("need t >= 0 and F >= 1")
    w1 = abs(math.sin(2.0 * math.pi * t / F))
    return w1, 1.0 - w1


@dataclass(frozen=True)
class DwaSchedule:
    F: int = 50

    def __post_init__(self):
        if self.F < 1:
            raise ValueError("DWA change frequency must be >= 1")

    def __call__(self, t: float) -> tuple[float, float]:
        return dwa_weights(t, self.F)


def aggregate_fitness(
    obj: ObjectiveVector,
    w1: float,
    w2: float,
    f_pr: float = 1.0,
    rise_sign: float = 1.0,
    j_floor: float = 1.0,
) -> float:
    """``f_pr * (w1*(log10 J + tail) + w2*(OS + Ts + rise_sign*Tr))``.

    J is floored at ``j_floor`` before the log so the bracket cannot go
    negative and flip the meaning of the multiplicative factor.
    """
    if not obj.finite:
        return INF
    effort = math.log10(max(obj.J, j_floor)) + obj.tail
    transient = obj.OS + obj.Ts + rise_sign * obj.Tr
    return f_pr * (w1 * effort + w2 * transient)


def scalarized_fitness(obj: ObjectiveVector, phi: float = PENALTY_PHI, rise_sign: float = 1.0) -> float:
    """Fixed-weight (0.5, 0.5) aggregate used by baselines and for reporting."""
    return aggregate_fitness(obj, 0.5, 0.5, 1.0 if obj.feasible else phi, rise_sign)


def swarm_fitness(
    objectives,
    w1: float,
    w2: float,
    mode: str = "corrected",
    phi: float = PENALTY_PHI,
    rise_sign: float = 1.0,
) -> np.ndarray:
    """Aggregated fitness of every particle of a swarm at one iteration."""
    rewards = domination_rewards(objectives)
    size = len(objectives)
    out = np.empty(size)
    for i, obj in enumerate(objectives):
        f_pr = penalty_reward_factor(rewards[i], size, obj.feasible, obj.repair_prob, mode, phi)
        out[i] = aggregate_fitness(obj, w1, w2, f_pr, rise_sign)
    return out
