"""Bosonic embedded GOE ensembles and q-Hermite theory of eigenstate structure."""

__version__ = "0.1.0"

from .fock_basis import BosonBasis, CapacityError, dimension, enumerate_basis
from .kbody_ensemble import EnsembleSpec, assemble, embed, sample_vk
from .qtheory import QTheoryParams, fk_conditional, q_formula, weight_v
from .spectral_analysis import SpectralData, diagonalize

__all__ = [
    "BosonBasis",
    "CapacityError",
    "EnsembleSpec",
    "QTheoryParams",
    "SpectralData",
    "assemble",
    "diagonalize",
    "dimension",
    "embed",
    "enumerate_basis",
    "fk_conditional",
    "q_formula",
    "sample_vk",
    "weight_v",
]
