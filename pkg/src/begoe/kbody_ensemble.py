"""Random k-body interactions embedded into the m-boson space.

The interaction ``V(k) = sum_{a,b} V_ab B^dagger(a) B(b)`` is sampled as a GOE
in the k-particle space and propagated to m particles.  ``assemble`` adds the
one-body mean field ``h(1) = sum_i (i + 1/i) n_i`` when requested.

Three symmetry variants are supported:

``plain``
    GOE in the k-particle space, no symmetry imposed.
``k_cs``
    V(k) projected onto matrices commuting with the anti-diagonal exchange
    matrix of the stored k-particle ordering.  The embedded H is generally
    not centrosymmetric.
``cs``
    V(k) projected onto matrices commuting with the permutation induced by
    reversing the single-particle levels.  The embedded H then commutes with
    the induced permutation of the m-particle basis.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fock_basis import BosonBasis, create_monomial, dimension, enumerate_basis

__all__ = [
    "VARIANTS",
    "EnsembleSpec",
    "KBodyMatrix",
    "ManyBodyHamiltonian",
    "InducedInvolution",
    "member_rng",
    "sample_vk",
    "embed",
    "h1_diagonal",
    "sp_energies",
    "assemble",
    "induce_involution",
    "centrosymmetrize",
    "dump_matrix",
    "load_matrix",
]

VARIANTS = ("plain", "k_cs", "cs")


@dataclass(frozen=True)
class EnsembleSpec:
    """Everything needed to regenerate every member of an ensemble."""

    N: int
    m: int
    k: int
    lam: float = 0.5
    members: int = 100
    seed: int = 0
    variant: str = "plain"
    include_h1: bool = True
    diag_variance: float = 2.0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if not 1 <= self.k <= self.m:
            raise ValueError(f"need 1 <= k <= m, got k={self.k}, m={self.m}")
        if self.members < 1:
            raise ValueError(f"members must be >= 1, got {self.members}")
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.diag_variance < 0:
            raise ValueError("diag_variance must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        dimension(self.N, self.m)

    @property
    def dim(self) -> int:
        return dimension(self.N, self.m)


@dataclass(frozen=True)
class KBodyMatrix:
    k: int
    basis_k: BosonBasis
    V: np.ndarray


@dataclass(frozen=True)
class ManyBodyHamiltonian:
    basis_m: BosonBasis
    H: np.ndarray
    spec: EnsembleSpec | None = None
    member: int | None = None

    @property
    def dim(self) -> int:
        return self.H.shape[0]


@dataclass(frozen=True)
class InducedInvolution:
    """Permutation of a basis induced by the level reversal i -> N+1-i."""

    perm: np.ndarray

    @property
    def as_matrix(self) -> np.ndarray:
        d = len(self.perm)
        P = np.zeros((d, d))
        P[np.arange(d), self.perm] = 1.0
        return P

    def apply(self, M: np.ndarray) -> np.ndarray:
        """Return ``P M P`` for a square matrix ``M``."""
        return M[np.ix_(self.perm, self.perm)]


def member_rng(seed: int, member: int) -> np.random.Generator:
    """Independent generator for one ensemble member.

    The pair ``(seed, member)`` is hashed by numpy's ``SeedSequence`` into a
    PCG64 state, so members can be generated in any order or in parallel.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(member)]))


def _goe(d: int, rng: np.random.Generator, diag_variance: float) -> np.ndarray:
    A = rng.standard_normal((d, d))
    V = np.triu(A, 1)
    V = V + V.T
    V[np.diag_indices(d)] = np.sqrt(diag_variance) * np.diag(A)
    return V


def sample_vk(spec: EnsembleSpec, member: int, rng: np.random.Generator | None = None) -> KBodyMatrix:
    """Sample the k-body GOE matrix for one member (before any symmetry projection).

    Off-diagonal entries have unit variance and diagonal entries variance
    ``spec.diag_variance`` (2 by default).
    """
    if not 0 <= member < spec.members:
        raise IndexError(f"member {member} out of range for {spec.members} members")
    if rng is None:
        rng = member_rng(spec.seed, member)
    basis_k = enumerate_basis(spec.N, spec.k)
    return KBodyMatrix(spec.k, basis_k, _goe(basis_k.dim, rng, spec.diag_variance))


@dataclass(frozen=True)
class _EmbeddingPlan:
    # upper-triangle contributions: flat target index, (a, b) in k-space, amplitude product
    flat: np.ndarray
    a: np.ndarray
    b: np.ndarray
    coef: np.ndarray
    dim: int


@lru_cache(maxsize=32)
def _embedding_plan(N: int, m: int, k: int) -> _EmbeddingPlan:
    """Precompute every ``(nu, mu, a, b, amplitude)`` term of the embedding.

    For each spectator state gamma with m-k bosons, ``B^dagger(a)`` maps gamma
    to a distinct m-particle state.  Matrix element (nu, mu) collects
    ``V_ab * amp(gamma, a) * amp(gamma, b)`` over all gamma with
    nu = gamma + a and mu = gamma + b.  Work and memory scale as
    ``d_{m-k} * d_k**2``.
    """
    basis_m = enumerate_basis(N, m)
    basis_k = enumerate_basis(N, k)
    basis_s = enumerate_basis(N, m - k)
    dk, ds, dm = basis_k.dim, basis_s.dim, basis_m.dim
    target = np.empty((ds, dk), dtype=np.int64)
    amp = np.empty((ds, dk))
    for g, gamma in enumerate(basis_s.states):
        for a, mono in enumerate(basis_k.states):
            act = create_monomial(gamma, mono)
            target[g, a] = basis_m.index_of[act.target]
            amp[g, a] = act.amplitude
    rows = np.broadcast_to(target[:, :, None], (ds, dk, dk))
    cols = np.broadcast_to(target[:, None, :], (ds, dk, dk))
    keep = rows <= cols
    aa = np.broadcast_to(np.arange(dk)[None, :, None], (ds, dk, dk))[keep]
    bb = np.broadcast_to(np.arange(dk)[None, None, :], (ds, dk, dk))[keep]
    coef = (amp[:, :, None] * amp[:, None, :])[keep]
    flat = rows[keep] * dm + cols[keep]
    return _EmbeddingPlan(flat, aa, bb, coef, dm)


def embed(basis_m: BosonBasis, Vk: KBodyMatrix) -> ManyBodyHamiltonian:
    """Propagate a k-particle operator to the m-particle space.

    Only the upper triangle is accumulated; it is then mirrored so the
    result is symmetric bit-for-bit.
    """
    if Vk.k > basis_m.m or Vk.basis_k.N != basis_m.N:
        raise ValueError(
            f"cannot embed rank-{Vk.k} operator on N={Vk.basis_k.N} into m={basis_m.m}, N={basis_m.N}"
        )
    plan = _embedding_plan(basis_m.N, basis_m.m, Vk.k)
    d = plan.dim
    upper = np.bincount(plan.flat, weights=plan.coef * Vk.V[plan.a, plan.b], minlength=d * d)
    upper = upper.reshape(d, d)
    H = upper + np.triu(upper, 1).T
    return ManyBodyHamiltonian(basis_m, H)


def sp_energies(N: int) -> np.ndarray:
    """Single-particle energies ``i + 1/i`` for levels i = 1..N."""
    i = np.arange(1, N + 1, dtype=float)
    return i + 1.0 / i


def h1_diagonal(basis_m: BosonBasis) -> np.ndarray:
    """Diagonal of the one-body mean field on the m-particle basis."""
    return basis_m.as_array() @ sp_energies(basis_m.N)


@lru_cache(maxsize=64)
def _involution_perm(N: int, p: int) -> np.ndarray:
    basis = enumerate_basis(N, p)
    perm = np.array([basis.index_of[s[::-1]] for s in basis.states], dtype=np.int64)
    perm.setflags(write=False)
    return perm


def induce_involution(N: int, p: int) -> InducedInvolution:
    """Permutation of the p-particle basis induced by reversing the N levels."""
    if p < 0:
        raise ValueError("p must be non-negative")
    return InducedInvolution(_involution_perm(N, p))


def centrosymmetrize(Vk: KBodyMatrix, mode: str = "induced") -> KBodyMatrix:
    """Project ``V`` onto matrices commuting with an involution, ``(V + J V J)/2``.

    ``mode="literal_exchange"`` uses the anti-diagonal exchange matrix in the
    stored k-particle ordering; ``mode="induced"`` uses the level-reversal
    permutation.
    """
    V = Vk.V
    if mode == "literal_exchange":
        JVJ = V[::-1, ::-1]
    elif mode == "induced":
        JVJ = induce_involution(Vk.basis_k.N, Vk.k).apply(V)
    else:
        raise ValueError(f"unknown centrosymmetrization mode {mode!r}")
    return KBodyMatrix(Vk.k, Vk.basis_k, (V + JVJ) / 2.0)


_VARIANT_MODE = {"k_cs": "literal_exchange", "cs": "induced"}


def assemble(spec: EnsembleSpec, member: int) -> ManyBodyHamiltonian:
    """Build the m-particle Hamiltonian of one ensemble member.

    With ``include_h1`` the result is ``h(1) + lam * V(k)``; otherwise the
    (variant-projected) ``V(k)`` alone, unscaled.
    """
    basis_m = enumerate_basis(spec.N, spec.m)
    Vk = sample_vk(spec, member)
    if spec.variant != "plain":
        Vk = centrosymmetrize(Vk, _VARIANT_MODE[spec.variant])
    HV = embed(basis_m, Vk).H
    if spec.include_h1:
        H = spec.lam * HV
        H[np.diag_indices_from(H)] += h1_diagonal(basis_m)
    else:
        H = HV
    H.setflags(write=False)
    return ManyBodyHamiltonian(basis_m, H, spec, member)


def dump_matrix(path, H: np.ndarray) -> None:
    """Write ``H`` as an 8-byte little-endian dimension header followed by
    row-major little-endian float64 entries.  Debugging aid only."""
    H = np.asarray(H, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", H.shape[0]))
        fh.write(np.ascontiguousarray(H).tobytes())


def load_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        (d,) = struct.unpack("<Q", fh.read(8))
        return np.frombuffer(fh.read(), dtype="<f8").reshape(d, d).copy()
