"""
Bosons in a handful of levels
=============================

Build the occupation-number basis, sample one k-body interaction and
push it up to the many-particle space.
"""

import numpy as np

from begoe import EnsembleSpec, assemble, enumerate_basis, sample_vk
from begoe.kbody_ensemble import embed

# %%
# Four bosons in three levels: 15 states, most-occupied-first.
basis = enumerate_basis(3, 4)
print(basis.dim)
for i, s in enumerate(basis.states[:5]):
    print(i, s)

# %%
# A two-body GOE matrix lives on the 6-dimensional two-boson space.
spec = EnsembleSpec(N=3, m=4, k=2, seed=1, include_h1=False)
Vk = sample_vk(spec, member=0)
print(Vk.V.shape)

# the embedded operator is dense-ish but obeys the two-body selection rule:
H = embed(basis, Vk).H
print(np.allclose(H, H.T), np.count_nonzero(H), H.size)

# %%
# With k = m the embedding is the identity map; the ensemble is just GOE.
full = EnsembleSpec(N=3, m=4, k=4, seed=1, include_h1=False)
Vm = sample_vk(full, 0)
print(np.max(np.abs(embed(basis, Vm).H - Vm.V)))

# %%
# Adding the one-body part: diagonal energies i + 1/i on the levels.
ham = assemble(EnsembleSpec(N=3, m=4, k=2, lam=0.3, seed=1), 0)
print(np.round(np.diag(ham.H)[:5], 3))
