"""
Detecting overloading PEs
=========================

Each PE fits its workload growth, gossips the estimate, and flags itself
when its rate is an outlier. The balancer fires once the accumulated
slowdown pays for a rebalance.
"""

import numpy as np

from ulba import policy

rng = np.random.default_rng(0)
P = 32

# loads grow by 10/iteration, except PE 7 at 100/iteration
rates = np.full(P, 10.0)
rates[7] = 100.0
history = [[1000 + r * t + rng.normal(0, 2) for t in range(5)] for r in rates]

dbs = [policy.WirDatabase() for _ in range(P)]
for p in range(P):
    dbs[p].record(p, policy.estimate_wir(history[p]), 0)

# a few push-gossip rounds spread the estimates
for r in range(8):
    dbs = policy.gossip_round(dbs, r, rng)
    print("round", r, "known entries at PE 0:", len(dbs[0]))

flags = [policy.detect_overloading(dbs[p], p) for p in range(P)]
print("self-flagged:", [p for p in range(P) if flags[p]])

alphas = policy.majority_rule([0.4 if f else 0.0 for f in flags])
targets = policy.partition_weights(alphas, 32_000.0)
print("targets:", targets[:9].round(1), "...")

# degradation trigger
tracker = policy.DegradationTracker()
for t, step in enumerate([1.0, 1.0, 1.1, 1.3, 1.6, 2.0, 2.5]):
    policy.update_degradation(tracker, step)
    print(t, round(tracker.degradation, 3), policy.should_balance(tracker, 1.5))
