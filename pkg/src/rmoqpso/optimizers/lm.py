"""Levenberg-Marquardt with a fixed blending factor and finite-difference Jacobian."""

from __future__ import annotations

import numpy as np

from .common import OptimizeResult


def fd_jacobian(residual, x: np.ndarray, step: float, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Central differences, pulled inside the box where a side would leave it."""
    cols = []
    for j in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[j] = min(x[j] + step, hi[j])
        xm[j] = max(x[j] - step, lo[j])
        width = xp[j] - xm[j]
        cols.append((np.asarray(residual(xp)) - np.asarray(residual(xm))) / width)
    return np.column_stack(cols)


def lm_run(
    residual,
    x0,
    iterations: int,
    lam: float = 10.0,
    step: float = 0.1,
    lower=-np.inf,
    upper=np.inf,
    objective=None,
) -> OptimizeResult:
    """Minimize ``||r(x)||^2`` by ``x <- x - (J^T J + lam I)^-1 J^T r`` with no damping adaptation.

    ``objective`` ranks iterates for the returned best point; it defaults to
    the squared residual norm. Iteration stops early once the residual is
    non-finite, since no step can be formed there.
    """
    x = np.asarray(x0, dtype=float).copy()
    lo = np.broadcast_to(np.asarray(lower, dtype=float), x.shape).copy()
    hi = np.broadcast_to(np.asarray(upper, dtype=float), x.shape).copy()
    calls = 0

    def r(z):
        nonlocal calls
        calls += 1
        return np.asarray(residual(z), dtype=float)

    def score(z, rz):
        if objective is not None:
            return float(objective(z))
        return float(rz @ rz)

    rx = r(x)
    best_x, best_f = x.copy(), score(x, rx)
    history = [best_f]
    for _ in range(iterations):
        if not np.all(np.isfinite(rx)):
            break
        J = fd_jacobian(r, x, step, lo, hi)
        if not np.all(np.isfinite(J)):
            break
        delta = np.linalg.solve(J.T @ J + lam * np.eye(x.size), J.T @ rx)
        x = np.clip(x - delta, lo, hi)
        rx = r(x)
        fx = score(x, rx)
        if fx < best_f:
            best_x, best_f = x.copy(), fx
        history.append(best_f)
    return OptimizeResult(best_x, best_f, history, calls)
