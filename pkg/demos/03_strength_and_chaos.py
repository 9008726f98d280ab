"""
Strength functions and how chaotic the eigenstates are
======================================================

Spread one basis state over the eigenstates (the LDOS), then summarize
each eigenstate by its participation number and entropy length.
"""

import numpy as np

from begoe import EnsembleSpec
from begoe.experiments import ensemble_pass, ldos_series, lh_series, npc_series
from begoe.spectral_analysis import HistogramSpec

hist = HistogramSpec(50, (-3, 3))

# %%
# Larger lambda mixes more: zeta drops and the LDOS flattens a little.
for lam in (0.05, 0.5):
    res = ensemble_pass(EnsembleSpec(4, 10, 4, lam=lam, members=20, seed=2), ldos=True, hist=hist)
    ser, summary = ldos_series(res, hist)
    print(f"lambda={lam}: zeta={summary['zeta']:.3f}  peak LDOS={ser.value.max():.3f}")

# %%
# NPC and l_H across the spectrum, compared with the smooth curves.
res = ensemble_pass(EnsembleSpec(4, 10, 6, lam=0.5, members=20, seed=2), states=True)
npc, _ = npc_series(res, 25, (-2.5, 2.5))
lh, _ = lh_series(res, 25, (-2.5, 2.5))
bulk = np.abs(npc.abscissa) <= 1.5
print(np.round(npc.value[bulk] / npc.extra["theory"][bulk], 3))
print(np.round(lh.value[bulk] / lh.extra["theory"][bulk], 3))

# the GOE ceiling for NPC is d/3
print(res.spec.dim / 3, npc.value[bulk].max())
