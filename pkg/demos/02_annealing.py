"""
Searching LB schedules with simulated annealing
===============================================

A schedule is a boolean per iteration (call the balancer or not). The
upper-bound schedule is compared with annealed schedules and, on a short
horizon, with the exact optimum.
"""

from dataclasses import replace

from ulba.model import sigma_plus_schedule, t_total
from ulba.optimizer import AnnealParams, ScheduleState, anneal, dp_best, exhaustive_best, relative_gain
from ulba.sampling import SamplingSpec, child_rng, sample_instance

spec = SamplingSpec()
# instance 23 rebalances a few times within 100 iterations
inst = sample_instance(spec, child_rng(0, 23))
print(inst)

bound = sigma_plus_schedule(inst)
bound_time = t_total(inst, "ulba", bound)
print("bound schedule", list(bound), "time", bound_time)

state, e = anneal(inst, "ulba", AnnealParams(seed=1))
print("annealed schedule", list(state.calls), "time", e)
print("bound over anneal (%)", relative_gain(e, bound_time))

# warm start from the bound schedule
start = ScheduleState.from_calls(bound, inst.gamma)
_, warm = anneal(inst, "ulba", AnnealParams(seed=1), initial=start)
print("warm-started anneal", warm)

# exact optimum by dynamic programming
_, opt = dp_best(inst, "ulba")
print("optimum", opt, "bound gap (%)", relative_gain(opt, bound_time))

# tiny horizon: brute force agrees
small = replace(sample_instance(replace(spec, alpha_range=(0, 0.01), z_range=(1e-4, 1e-3)), child_rng(0, 5)), gamma=10)
best, best_e = exhaustive_best(small, "ulba")
print("exhaustive", list(best.calls), best_e)
print("anneal    ", anneal(small, "ulba", AnnealParams(seed=2))[1])
