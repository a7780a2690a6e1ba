"""Underloading load balancing (ULBA): cost model, LB-interval search, runtime
policy and an emulated-parallel erosion application."""

from .model import (
    AppInstance,
    LBSchedule,
    ModelError,
    NoImbalanceError,
    PostLBWorkloads,
    cost_imbalance,
    cost_overhead,
    menon_interval,
    sigma_minus,
    sigma_plus,
    sigma_plus_schedule,
    t_par_std,
    t_par_ulba,
    t_total,
    workload_after_lb,
    workload_at,
)
from .optimizer import AnnealParams, ScheduleState, anneal, exhaustive_best, relative_gain
from .sampling import SamplingSpec, sample_instance
from .erosion import SimConfig, SimResult, run_simulation

__version__ = "0.1.0"
