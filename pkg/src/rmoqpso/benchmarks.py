"""Built-in plants (cart-pole and landing flare) and a JSON model loader."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .control import StateSpaceModel
from .errors import DimensionMismatch, SchemaError
from .metrics import FLIGHT_ERROR, MetricSignalSpec

ESS = "ess"
IAE = "iae"


class UncontrollableWarning(UserWarning):
    pass


@dataclass(eq=False)
class BenchmarkSpec:
    name: str
    model: StateSpaceModel
    x0: np.ndarray
    horizon: float
    dt: float
    metric_spec: MetricSignalSpec = field(default_factory=MetricSignalSpec)
    tail_kind: str = ESS

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float).reshape(-1)
        if self.x0.size != self.model.n:
            raise DimensionMismatch(f"x0 has length {self.x0.size}, model has n={self.model.n}")
        if self.tail_kind not in (ESS, IAE):
            raise SchemaError(f"tail_kind must be {ESS!r} or {IAE!r}")
        if self.dt <= 0 or self.horizon < self.dt:
            raise SchemaError("need dt > 0 and horizon >= dt")

    @property
    def dimension(self) -> int:
        return self.model.n + self.model.m

    def to_dict(self) -> dict:
        doc = {"name": self.name}
        doc.update(self.model.to_dict())
        doc.update(
            {
                "x0": self.x0.tolist(),
                "horizon_s": self.horizon,
                "dt_s": self.dt,
                "metric_source": self.metric_spec.source,
                "tail_kind": self.tail_kind,
            }
        )
        return doc

    def __eq__(self, other):
        if not isinstance(other, BenchmarkSpec):
            return NotImplemented
        return self.to_dict() == other.to_dict() and self.metric_spec == other.metric_spec


def pendulum_model(M: float = 0.5, m: float = 0.2, l: float = 0.6, gravity: float = 9.81) -> BenchmarkSpec:
    """Linearized cart-pole about the upright position; states x, v, theta, omega."""
    A = [
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, -m * gravity / M, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, gravity * (m + M) / (l * M), 0.0],
    ]
    B = [[0.0], [1.0 / M], [0.0], [-1.0 / (l * M)]]
    model = StateSpaceModel(A, B, state_names=("x", "v", "theta", "omega"), input_names=("u",))
    return BenchmarkSpec(
        name="pendulum",
        model=model,
        x0=[0.0, 0.0, 0.0, 9.0],
        horizon=5.0,
        dt=0.005,
        metric_spec=MetricSignalSpec(source=3),
        tail_kind=ESS,
    )


def flight_model() -> BenchmarkSpec:
    """Aircraft landing flare; states u, w, q, theta, h, e and inputs mu, gamma, delta."""
    A = [
        [-0.058, 0.065, 0.0, -0.171, 0.0, 1.0],
        [-0.303, -0.685, 1.109, 0.0, 0.0, 0.0],
        [0.072, -0.685, 0.947, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 1.133, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, -0.571],
    ]
    B = [
        [0.0, 0.0, -0.119],
        [-0.054, 0.0, 0.074],
        [-1.117, 0.0, 0.115],
        [0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0],
        [0.0, 0.571, 0.0],
    ]
    model = StateSpaceModel(
        A,
        B,
        state_names=("u", "w", "q", "theta", "h", "e"),
        input_names=("mu", "gamma", "delta"),
    )
    return BenchmarkSpec(
        name="flight",
        model=model,
        x0=[5.0, -2.5, -1.0, -3.0, 15.0, 0.5],
        horizon=30.0,
        dt=0.01,
        metric_spec=MetricSignalSpec(source=FLIGHT_ERROR),
        tail_kind=IAE,
    )


BUILTIN = {"pendulum": pendulum_model, "flight": flight_model}

_REQUIRED = ("A", "B", "x0", "horizon_s", "dt_s", "metric_source", "tail_kind")


def load_model(document) -> BenchmarkSpec:
    """Validate a model document (dict, JSON string or path) into a BenchmarkSpec.

    An uncontrollable (A, B) pair is reported with ``UncontrollableWarning``
    but still returned.
    """
    if isinstance(document, Path) or (isinstance(document, str) and not document.lstrip().startswith("{")):
        document = json.loads(Path(document).read_text())
    elif isinstance(document, str):
        document = json.loads(document)
    if not isinstance(document, dict):
        raise SchemaError("model document must be a JSON object")
    missing = [k for k in _REQUIRED if k not in document]
    if missing:
        raise SchemaError(f"missing keys: {missing}")
    try:
        model = StateSpaceModel.from_dict(document)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DimensionMismatch):
            raise
        raise SchemaError(str(exc)) from exc
    source = document["metric_source"]
    spec = BenchmarkSpec(
        name=document.get("name", "custom"),
        model=model,
        x0=document["x0"],
        horizon=float(document["horizon_s"]),
        dt=float(document["dt_s"]),
        metric_spec=MetricSignalSpec(source=source),
        tail_kind=document["tail_kind"],
    )
    if not model.is_controllable():
        warnings.warn(f"model {spec.name!r} is not controllable", UncontrollableWarning, stacklevel=2)
    return spec


def get_benchmark(name_or_path: str) -> BenchmarkSpec:
    if name_or_path in BUILTIN:
        return BUILTIN[name_or_path]()
    return load_model(Path(name_or_path))
