"""
Monte-Carlo gain over the overloading fraction
==============================================

Sampled applications, best alpha per instance, gain of ULBA over the
standard method. Few PEs overloading is where underloading pays off.
"""

from ulba.experiments import exp_gain_vs_overload
from ulba.sampling import SamplingSpec

records, per_fraction = exp_gain_vs_overload(SamplingSpec(count=200, seed=0), alpha_grid_size=50)
for f, s in per_fraction.items():
    print(f"{f:5.0%}  median {s['median']:6.2f}%  max {s['max']:6.2f}%  mean alpha {s['mean_best_alpha']:.2f}")

# the instance with the largest gain
top = max(records, key=lambda r: r.gain_pct)
print("best:", top)
