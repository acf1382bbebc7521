"""Regulation metrics computed on one scalar signal of a trajectory.

All metrics are measured relative to the initial deviation ``y(0)`` of a
signal that should decay to zero. Crossing times are taken at sample
resolution, so they are accurate to one step ``dt``. Responses that never
reach a threshold return ``inf`` rather than raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .control import Trajectory
from .errors import BadSource, WrongBenchmark, ZeroInitialDeviation

FLIGHT_ERROR = "flight_error"
INF = float("inf")

# tracking error of the landing flare: -w + 1.133*theta + 0.2*h
_FLIGHT_ERROR_TERMS = {"w": -1.0, "theta": 1.133, "h": 0.2}


@dataclass(frozen=True)
class MetricSignalSpec:
    source: Union[int, str] = 0
    settle_band: float = 0.02
    rise_hi: float = 0.9
    rise_lo: float = 0.1
    tail_fraction: float = 0.05

    def __post_init__(self):
        if not 0 < self.rise_lo < self.rise_hi <= 1:
            raise ValueError("need 0 < rise_lo < rise_hi <= 1")
        if not 0 < self.settle_band < 1:
            raise ValueError("settle_band must lie in (0, 1)")
        if not 0 < self.tail_fraction < 1:
            raise ValueError("tail_fraction must lie in (0, 1)")

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "settle_band": self.settle_band,
            "rise_hi": self.rise_hi,
            "rise_lo": self.rise_lo,
            "tail_fraction": self.tail_fraction,
        }


@dataclass(frozen=True)
class ResponseMetrics:
    overshoot: float
    rise_time: float
    settling_time: float
    steady_state_error: float
    iae: float | None = None


def _flight_error(traj: Trajectory) -> np.ndarray:
    names = list(traj.state_names)
    try:
        idx = {k: names.index(k) for k in _FLIGHT_ERROR_TERMS}
    except ValueError as exc:
        raise WrongBenchmark(f"trajectory states {names} lack w/theta/h") from exc
    y = np.zeros(traj.states.shape[0])
    for key, coef in _FLIGHT_ERROR_TERMS.items():
        y += coef * traj.states[:, idx[key]]
    return y


def metric_signal(traj: Trajectory, spec: MetricSignalSpec) -> np.ndarray:
    """The scalar series the metrics are computed on."""
    src = spec.source
    if src == FLIGHT_ERROR:
        try:
            return _flight_error(traj)
        except WrongBenchmark as exc:
            raise BadSource(str(exc)) from exc
    if isinstance(src, str):
        if src not in traj.state_names:
            raise BadSource(f"unknown state {src!r}")
        src = list(traj.state_names).index(src)
    n = traj.states.shape[1]
    if not isinstance(src, (int, np.integer)) or not 0 <= src < n:
        raise BadSource(f"state index {src!r} out of range for n={n}")
    return traj.states[:, int(src)]


def _initial(y: np.ndarray) -> float:
    y0 = float(y[0])
    if y0 == 0.0:
        raise ZeroInitialDeviation("metric needs a nonzero initial deviation")
    return y0


def overshoot(y, spec: MetricSignalSpec | None = None) -> float:
    y = np.asarray(y, dtype=float)
    y0 = _initial(y)
    return float(max(0.0, np.max(-math.copysign(1.0, y0) * y)))


def _first_below(mag: np.ndarray, level: float) -> int | None:
    hits = np.flatnonzero(mag <= level)
    return int(hits[0]) if hits.size else None


def rise_time(y, dt: float, spec: MetricSignalSpec | None = None) -> float:
    """Time for |y| to fall from ``rise_hi`` to ``rise_lo`` of |y(0)|."""
    spec = spec or MetricSignalSpec()
    y = np.asarray(y, dtype=float)
    a0 = abs(_initial(y))
    mag = np.abs(y)
    k_hi = _first_below(mag, spec.rise_hi * a0)
    k_lo = _first_below(mag, spec.rise_lo * a0)
    if k_hi is None or k_lo is None:
        return INF
    return (k_lo - k_hi) * dt


def settling_time(y, dt: float, spec: MetricSignalSpec | None = None) -> float:
    """Earliest sample time after which |y| stays inside the settle band."""
    spec = spec or MetricSignalSpec()
    y = np.asarray(y, dtype=float)
    a0 = abs(_initial(y))
    outside = np.flatnonzero(np.abs(y) > spec.settle_band * a0)
    last = int(outside[-1])
    if last == y.size - 1:
        return INF
    return (last + 1) * dt


def steady_state_error(y, dt: float, spec: MetricSignalSpec | None = None) -> float:
    spec = spec or MetricSignalSpec()
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ValueError("empty series")
    horizon = (y.size - 1) * dt
    t = np.arange(y.size) * dt
    tail = np.abs(y[t >= horizon * (1.0 - spec.tail_fraction) - 1e-12 * dt])
    return float(tail.mean())


def integrated_absolute_error(traj: Trajectory) -> float:
    """Trapezoidal integral of the absolute landing-flare tracking error."""
    if traj.blown_up:
        return INF
    e = np.abs(_flight_error(traj))
    if e.size < 2:
        return 0.0
    return float(np.trapezoid(e, dx=traj.dt))


def response_metrics(traj: Trajectory, spec: MetricSignalSpec, with_iae: bool = False) -> ResponseMetrics:
    """All metrics for one trajectory; a blown-up trajectory yields all-inf."""
    if traj.blown_up:
        return ResponseMetrics(INF, INF, INF, INF, INF if with_iae else None)
    y = metric_signal(traj, spec)
    dt = traj.dt
    return ResponseMetrics(
        overshoot=overshoot(y, spec),
        rise_time=rise_time(y, dt, spec),
        settling_time=settling_time(y, dt, spec),
        steady_state_error=steady_state_error(y, dt, spec),
        iae=integrated_absolute_error(traj) if with_iae else None,
    )
