"""
Erosion mini-app under two LB policies
======================================

Sixteen virtual PEs, one rock disk each; one disk erodes fast. Every
erosion event turns a rock cell into four units of fluid work.
"""

from dataclasses import replace

from ulba.erosion import SimConfig, run_simulation

cfg = SimConfig()
print(cfg)

for pol, alpha in (("standard", 0.0), ("ulba", 0.4)):
    res = run_simulation(cfg, pol, alpha, seed=0)
    s = res.summary()
    print(f"{pol:8s} total {s['total_time_s']:.4f}s  LB calls {s['lb_calls']:3d}  "
          f"mean PE usage {s['mean_pe_usage_pct']:.2f}%")
    # first few rebalances
    for e in res.events[:4]:
        print("   it", e.iteration, e.mode, "moved", e.migrated_weight, "cost", round(e.cost, 6))

# no strongly erodible rock: nobody stands out, both policies agree
calm = replace(cfg, strong_count=0, iterations=200)
print(run_simulation(calm, "standard", 0.0, 0).lb_calls, run_simulation(calm, "ulba", 0.4, 0).lb_calls)
