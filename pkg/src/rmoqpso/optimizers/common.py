from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class OptimizeResult:
    best_x: np.ndarray
    best_f: float
    history: list = field(default_factory=list)
    evaluations: int = 0


def box(dim: int, lower, upper) -> tuple[np.ndarray, np.ndarray]:
    lo = np.broadcast_to(np.asarray(lower, dtype=float), (dim,)).copy()
    hi = np.broadcast_to(np.asarray(upper, dtype=float), (dim,)).copy()
    if np.any(hi <= lo):
        raise ValueError("upper bound must exceed lower bound")
    return lo, hi


class CountingFitness:
    """Wrap a scalar objective, counting calls and mapping NaN to +inf."""

    def __init__(self, fn):
        self.fn = fn
        self.calls = 0

    def __call__(self, x) -> float:
        self.calls += 1
        f = float(self.fn(x))
        return np.inf if np.isnan(f) else f

    def many(self, X) -> np.ndarray:
        return np.array([self(x) for x in X])
