"""Optimizer configuration and the tuned per-method defaults."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace

from .errors import UnknownMethod

LN_SQRT2 = math.log(math.sqrt(2.0))
# Lower bound on g for the sampler x' = p +/- |x - p| ln(1/u) / g: above ln 2 a
# move lands closer to the attractor than it started more often than not.
# The classic ln(sqrt 2) bound belongs to the half-length form |x - p| ln(1/u) / (2g),
# so a setting of c*ln(sqrt 2) there reads as c*ln 2 here.
G_MIN = math.log(2.0)
DEFAULT_G = 1.5 * G_MIN
X_MAX = 1000.0

METHODS = ("pso", "cpso", "aiwpso", "qpso", "rmo-qpso", "ga", "de", "abc", "lm")
STOCHASTIC = tuple(m for m in METHODS if m != "lm")


@dataclass(frozen=True)
class OptimizerConfig:
    method: str = "rmo-qpso"
    swarm_size: int = 20
    iterations: int = 75
    seed: int = 0
    x_max: float = X_MAX
    # PSO family
    c_p: float = 0.7
    c_g: float = 1.5
    w_min: float = 0.4
    w_max: float = 0.9
    v_max_frac: float = 0.2
    # QPSO
    g: float = DEFAULT_G
    g_schedule: str = "fixed"
    g_start: float = 2.0
    g_end: float = 1.5
    # simulated-annealing initialization
    sa_iterations: int = 10
    sa_alpha: float = 0.1
    sa_sigma_frac: float = 0.1
    sa_p_succ: float = 0.5
    # multi-objective fitness
    dwa_f: int = 50
    eq17_mode: str = "corrected"
    rise_sign: float = 1.0
    phi: float = 10.0
    archive_capacity: int = 200
    # "rescore": personal/global bests are re-ranked under each iteration's
    # weights; "stored": compare against the value recorded when they were set
    best_update: str = "rescore"
    # GA / DE
    p_c: float = 0.9
    p_m: float = 0.1
    tournament: int = 5
    mutation_sigma_frac: float = 0.05
    # LM
    lam: float = 10.0
    fd_step_frac: float = 1e-4

    def __post_init__(self):
        method = self.method.lower()
        object.__setattr__(self, "method", method)
        if method not in METHODS:
            raise UnknownMethod(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.swarm_size < 1 or self.iterations < 0:
            raise ValueError("swarm_size must be >= 1 and iterations >= 0")
        if method in ("qpso", "rmo-qpso") and not self.g > G_MIN:
            raise ValueError(f"g must exceed ln 2 = {G_MIN:.4f}")
        if self.g_schedule == "linear" and not min(self.g_start, self.g_end) > 1.0:
            raise ValueError("linear g schedule endpoints are multiples of ln 2 and must exceed 1")
        if self.eq17_mode not in ("corrected", "literal", "penalty-only"):
            raise ValueError("eq17_mode must be 'corrected', 'literal' or 'penalty-only'")
        if self.best_update not in ("rescore", "stored"):
            raise ValueError("best_update must be 'rescore' or 'stored'")
        if self.g_schedule not in ("fixed", "linear"):
            raise ValueError("g_schedule must be 'fixed' or 'linear'")

    def to_dict(self) -> dict:
        return asdict(self)

    def with_(self, **changes) -> "OptimizerConfig":
        return replace(self, **changes)

    @classmethod
    def field_names(cls) -> tuple:
        return tuple(f.name for f in fields(cls))


# Tuned settings from the full-factorial sensitivity analysis.
METHOD_DEFAULTS = {
    "lm": dict(lam=10.0, iterations=150, swarm_size=1),
    "ga": dict(swarm_size=70, iterations=150, p_c=0.9, p_m=0.1),
    "de": dict(swarm_size=50, iterations=150, p_c=0.15, p_m=0.8),
    "abc": dict(swarm_size=30, iterations=175),
    "pso": dict(swarm_size=40, iterations=50, c_p=0.7, c_g=1.5),
    "cpso": dict(swarm_size=20, iterations=175, c_p=0.7, c_g=1.5),
    "aiwpso": dict(swarm_size=40, iterations=70, w_min=0.05, w_max=0.95),
    "qpso": dict(swarm_size=20, iterations=75, g=DEFAULT_G),
    "rmo-qpso": dict(swarm_size=20, iterations=75, g=DEFAULT_G),
}


def default_config(method: str, seed: int = 0, **overrides) -> OptimizerConfig:
    method = method.lower()
    if method not in METHOD_DEFAULTS:
        raise UnknownMethod(f"unknown method {method!r}")
    params = dict(METHOD_DEFAULTS[method])
    params.update(overrides)
    return OptimizerConfig(method=method, seed=seed, **params)
