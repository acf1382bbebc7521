"""Welch's unequal-variance t-test with a one-tailed p-value."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

LESS = "less"
GREATER = "greater"


@dataclass(frozen=True)
class WelchResult:
    t: float
    dof: float
    p: float


def _t_cdf(t: float, dof: float) -> float:
    """Student-t CDF through the regularized incomplete beta function."""
    if np.isinf(t):
        return 1.0 if t > 0 else 0.0
    tail = 0.5 * float(betainc(dof / 2.0, 0.5, dof / (dof + t * t)))
    return 1.0 - tail if t > 0 else tail


def welch_t_test(sample_a, sample_b, direction: str = LESS) -> WelchResult:
    """One-tailed Welch test.

    ``direction="less"`` tests the hypothesis mean(a) < mean(b), so a small p
    supports ``a`` being smaller; ``"greater"`` flips it.

    Both variances zero is handled without division: equal means give
    ``t = 0, p = 0.5`` and unequal means give an infinite statistic.
    """
    a = np.asarray(sample_a, dtype=float).ravel()
    b = np.asarray(sample_b, dtype=float).ravel()
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least two values")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("samples must be finite")
    if direction not in (LESS, GREATER):
        raise ValueError(f"direction must be {LESS!r} or {GREATER!r}")
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    diff = a.mean() - b.mean()
    se2 = va + vb
    if se2 == 0.0:
        dof = float(a.size + b.size - 2)
        t = 0.0 if diff == 0 else float(np.sign(diff) * np.inf)
    else:
        t = float(diff / np.sqrt(se2))
        dof = float(se2**2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1)))
    p = _t_cdf(t, dof) if direction == LESS else _t_cdf(-t, dof)
    return WelchResult(t, dof, p)
