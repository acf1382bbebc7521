from .common import OptimizeResult
from .evolutionary import abc_run, de_run, ga_run
from .lm import lm_run
from .qpso import (
    RmoQpsoResult,
    SaInitParams,
    local_attractor,
    qpso_run,
    qpso_sample,
    repair_particle,
    representative,
    rmo_qpso_run,
    sa_informed_init,
)
from .runner import MethodOutcome, baseline_run, run_method
from .swarm import SwarmState, pso_run, pso_step
