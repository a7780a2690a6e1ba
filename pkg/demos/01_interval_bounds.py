"""
LB interval bounds on a small instance
======================================

Four PEs, one of them growing faster than the rest. Balancing hands the
overloading PE only half of its share, so it takes a while to catch up.
"""

from ulba import model
from ulba.model import AppInstance

inst = AppInstance(P=4, N=1, gamma=100, w0=1200, a=5, m=10, alpha=0.5, omega=1, c_seconds=100)

# loads right after a balance at iteration 0
post = model.workload_after_lb(inst, 0)
print("overloading PE gets", post.w_star, "others get", post.w)

# no degradation before sigma-, rebalance at sigma+
print("sigma- =", model.sigma_minus(inst, 0))
print("sigma+ =", model.sigma_plus(inst, 0))
A, B, K = model.upper_bound_coefficients(inst, 0)
print(f"quadratic: {A} tau^2 + {B} tau + {K} = 0, root {model.upper_bound_root(inst, 0)}")

# step times around the catch-up point
for t in (18, 19, 20, 21, 22, 23):
    print(t, model.t_par_ulba(inst, 0, t), model.t_par_std(inst, 0, t))

# same machine, alpha = 0: the classic interval sqrt(2 C / m_hat)
std = AppInstance(P=4, N=1, gamma=100, w0=1200, a=5, m=10, c_seconds=100)
print("standard interval", model.menon_interval(std))

sched = model.sigma_plus_schedule(inst)
print("ULBA schedule", list(sched))
print("total ULBA", model.t_total(inst, "ulba", sched))
print("total standard", model.t_total(std, "standard", model.sigma_plus_schedule(std)))

# alpha = 0.5 overshoots here; scan for a better one
from dataclasses import replace
best = min((model.t_total(replace(inst, alpha=a), "ulba", model.sigma_plus_schedule(replace(inst, alpha=a))), a)
           for a in [k / 20 for k in range(21)])
print("best alpha %.2f, total %.2f" % (best[1], best[0]))
