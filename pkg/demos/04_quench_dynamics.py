"""
After a quench
==============

Start from a basis state in the middle of the spectrum and watch it
spread: survival probability F(t) and Shannon entropy S(t).
"""

import numpy as np

from begoe import EnsembleSpec
from begoe.dynamics import TimeGrid
from begoe.experiments import ensemble_pass, entropy_series

grid = TimeGrid.uniform(3.0, 31)

# %%
# F(t) decays roughly like a Gaussian at short times.
res = ensemble_pass(EnsembleSpec(4, 10, 6, lam=0.5, members=20, seed=13), time_grid=grid)
ser, summary = entropy_series(res)
for t, F, S in zip(ser.abscissa[::5], ser.extra["survival"][::5], ser.value[::5]):
    print(f"t={t:.1f}  F={F:.4f}  S={S:.3f}")

# %%
# The F-based estimate of S(t) has one free parameter alpha.
print(f"alpha={summary['alpha']:.3f}  rms={summary['rms_residual']:.3f}")

# the entropy saturates below ln d
print(ser.value[-1], np.log(res.spec.dim))
