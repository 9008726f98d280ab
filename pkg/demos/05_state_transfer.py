"""
Moving a boson configuration across the chain
=============================================

Transport efficiency P = max_t |<out|U(t)|in>|^2 from the all-left
state to its mirror image, with and without centrosymmetry.
"""

import numpy as np

from begoe import EnsembleSpec
from begoe.dynamics import efficiency_distribution, ks_same_distribution

# %%
# Two levels, nine bosons: d = 10.  No one-body part here.
for k in (1, 3, 5):
    out = {}
    for variant in ("plain", "k_cs", "cs"):
        spec = EnsembleSpec(2, 9, k, members=300, seed=9, include_h1=False, variant=variant)
        out[variant] = efficiency_distribution(spec, "endpoints", points=1000).P
    print(k, {v: round(float(np.mean(P > 0.9)), 3) for v, P in out.items()},
          "KS p(k_cs, cs) =", round(ks_same_distribution(out["k_cs"], out["cs"]), 3))

# %%
# With two levels the k-space exchange and the level reversal coincide,
# so k_cs and cs give the same matrices member by member.

# %%
# Three levels: the medians stay well below one within a Heisenberg time.
for variant in ("plain", "cs"):
    spec = EnsembleSpec(3, 6, 3, members=300, seed=9, include_h1=False, variant=variant)
    print(variant, np.median(efficiency_distribution(spec, points=1000).P))
