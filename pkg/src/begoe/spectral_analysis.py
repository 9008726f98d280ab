"""Diagonalization and static eigenstate observables.

Per-eigenstate quantities (NPC, information entropy, l_H) are reported
against the standardized energy ``(E - centroid) / sigma_H`` of each member;
ensemble curves pool eigenstates of all members into fixed bins.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import linalg
from scipy.special import xlogy

from .kbody_ensemble import EnsembleSpec, ManyBodyHamiltonian, assemble
from .qtheory import DensityCurve
from .series import ObservableSeries

__all__ = [
    "GOE_ENTROPY_FACTOR",
    "SpectralData",
    "HistogramSpec",
    "diagonalize",
    "standardize",
    "density_histogram",
    "ldos",
    "ldos_ensemble",
    "ldos_counts",
    "default_nk",
    "zeta_from_H",
    "zeta_from_spectrum",
    "npc_numeric",
    "info_entropy",
    "lh_numeric",
    "bin_series",
    "map_members",
    "thread_count",
]

GOE_ENTROPY_FACTOR = 0.48

DENSITY_BINS = (50, (-3.0, 3.0))
STATE_BINS = (25, (-2.5, 2.5))


@dataclass(frozen=True)
class SpectralData:
    """Eigen-decomposition of one member.

    ``eigenvectors[k, E]`` is the component C_k^E of basis state k in
    eigenstate E; columns are orthonormal.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    diag_energies: np.ndarray
    centroid: float
    sigma_H: float

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    @property
    def standardized_eigenvalues(self) -> np.ndarray:
        return standardize(self.eigenvalues, self.centroid, self.sigma_H)

    @property
    def standardized_diag(self) -> np.ndarray:
        """Basis-state energies centred on the centroid and scaled by their own spread."""
        sk = float(np.std(self.diag_energies))
        if sk == 0.0:
            return np.zeros_like(self.diag_energies)
        return standardize(self.diag_energies, self.centroid, sk)


@dataclass(frozen=True)
class HistogramSpec:
    bins: int = 50
    range: tuple = (-3.0, 3.0)

    def __post_init__(self):
        lo, hi = self.range
        if not lo < hi:
            raise ValueError(f"histogram range must satisfy lo < hi, got {self.range}")
        if self.bins < 10:
            raise ValueError(f"need at least 10 bins, got {self.bins}")

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.range[0], self.range[1], self.bins + 1)

    @property
    def centers(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[1:] + e[:-1])


def _matrix(H) -> np.ndarray:
    return H.H if isinstance(H, ManyBodyHamiltonian) else np.asarray(H, dtype=float)


def diagonalize(H) -> SpectralData:
    """Full symmetric eigendecomposition (LAPACK ``syevd``), eigenvalues ascending."""
    A = _matrix(H)
    if not np.all(np.isfinite(A)):
        raise ValueError("Hamiltonian has non-finite entries")
    w, C = linalg.eigh(A, driver="evd")
    return SpectralData(
        eigenvalues=w,
        eigenvectors=C,
        diag_energies=np.diag(A).copy(),
        centroid=float(np.mean(w)),
        sigma_H=float(np.std(w)),
    )


def standardize(values, centroid: float, sigma: float) -> np.ndarray:
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return (np.asarray(values, dtype=float) - centroid) / sigma


def _eigs(item) -> np.ndarray:
    if isinstance(item, SpectralData):
        return item.standardized_eigenvalues
    w = np.asarray(item, dtype=float)
    return standardize(w, w.mean(), w.std())


def density_histogram(ensemble: Iterable, spec: HistogramSpec = HistogramSpec()) -> DensityCurve:
    """Pooled histogram of per-member standardized eigenvalues, unit integral.

    Items may be :class:`SpectralData` or raw eigenvalue arrays.
    """
    pooled = [_eigs(item) for item in ensemble]
    if not pooled:
        raise ValueError("empty ensemble")
    counts, edges = np.histogram(np.concatenate(pooled), bins=spec.edges)
    values = counts / (counts.sum() * np.diff(edges))
    return DensityCurve(spec.centers, values, edges)


def _select_states(member: SpectralData, target_Ek: float, n_k: int) -> np.ndarray:
    dist = np.abs(member.standardized_diag - target_Ek)
    return np.argsort(dist, kind="stable")[:n_k]


def default_nk(d: int) -> int:
    return min(d, max(10, d // 100))


def _ldos_counts(member: SpectralData, target_Ek: float, n_k: int, spec: HistogramSpec) -> np.ndarray:
    idx = _select_states(member, target_Ek, n_k)
    weights = np.sum(member.eigenvectors[idx, :] ** 2, axis=0)
    counts, _ = np.histogram(member.standardized_eigenvalues, bins=spec.edges, weights=weights)
    return counts


def ldos(member: SpectralData, target_Ek: float = 0.0, n_k: int | None = None,
         spec: HistogramSpec = HistogramSpec()) -> DensityCurve:
    """Strength function of the ``n_k`` basis states nearest ``target_Ek``.

    Each selected state's weights |C_k^E|^2 are histogrammed over the
    standardized eigenvalues; the average is normalized to unit integral.
    """
    return ldos_ensemble([member], target_Ek, n_k, spec)


def ldos_ensemble(members: Iterable, target_Ek: float = 0.0, n_k: int | None = None,
                  spec: HistogramSpec = HistogramSpec()) -> DensityCurve:
    """Ensemble average of :func:`ldos`.

    Items may be :class:`SpectralData` or precomputed weighted histogram
    counts (see ``ldos_counts``) from :func:`map_members`.
    """
    total = np.zeros(spec.bins)
    for member in members:
        if isinstance(member, SpectralData):
            nk = n_k if n_k is not None else default_nk(member.dim)
            member = _ldos_counts(member, target_Ek, nk, spec)
        total += member
    if total.sum() == 0:
        raise ValueError("no LDOS weight inside the histogram range")
    return DensityCurve(spec.centers, total / (total.sum() * np.diff(spec.edges)), spec.edges)


def ldos_counts(member: SpectralData, target_Ek: float = 0.0, n_k: int | None = None,
                spec: HistogramSpec = HistogramSpec()) -> np.ndarray:
    """Unnormalized weighted LDOS histogram of one member (sums to n_k inside range)."""
    nk = n_k if n_k is not None else default_nk(member.dim)
    return _ldos_counts(member, target_Ek, nk, spec)


def zeta_from_H(H) -> float:
    """Correlation coefficient zeta from traces, without diagonalizing.

    zeta^2 = Var_k(E_k) / sigma_H^2, the spread of the LDOS centroids
    E_k = <k|H|k> relative to the spectral variance.
    """
    A = _matrix(H)
    d = A.shape[0]
    if d < 2:
        raise ValueError("zeta needs d_m >= 2")
    diag = np.diag(A)
    sigma2 = float(np.sum(A * A)) / d - float(np.mean(diag)) ** 2
    if not sigma2 > 0:
        raise ValueError("spectral variance is zero; zeta undefined")
    return float(np.sqrt(np.clip(np.var(diag) / sigma2, 0.0, 1.0)))


def zeta_from_spectrum(data: SpectralData) -> float:
    """Same quantity as :func:`zeta_from_H`, from the eigendecomposition."""
    centroids = (data.eigenvectors**2) @ data.eigenvalues
    return float(np.sqrt(np.clip(np.var(centroids) / data.sigma_H**2, 0.0, 1.0)))


def npc_numeric(member: SpectralData) -> ObservableSeries:
    """NPC(E) = 1 / sum_k |C_k^E|^4 for every eigenstate."""
    npc = 1.0 / np.sum(member.eigenvectors**4, axis=0)
    assert np.all(npc >= 1.0 - 1e-9) and np.all(npc <= member.dim * (1.0 + 1e-9))
    return ObservableSeries("npc", member.standardized_eigenvalues, npc)


def info_entropy(member: SpectralData) -> np.ndarray:
    p = member.eigenvectors**2
    S = -np.sum(xlogy(p, p), axis=0)
    assert np.all(S >= -1e-9) and np.all(S <= np.log(member.dim) + 1e-9)
    return S


def lh_numeric(member: SpectralData) -> ObservableSeries:
    """l_H(E) = exp(S_info(E)) / (0.48 d_m), normalized to 1 for the GOE."""
    S = info_entropy(member)
    return ObservableSeries(
        "lh",
        member.standardized_eigenvalues,
        np.exp(S) / (GOE_ENTROPY_FACTOR * member.dim),
        extra={"s_info": S},
    )


def bin_series(series: Sequence[ObservableSeries], bins: int = 25, range=(-2.5, 2.5),
               label: str | None = None) -> ObservableSeries:
    """Pool per-state series into bins: bin means with standard errors.

    Empty bins are NaN.  The ``count`` column records samples per bin.
    """
    x = np.concatenate([s.abscissa for s in series])
    y = np.concatenate([s.value for s in series])
    edges = np.linspace(range[0], range[1], bins + 1)
    which = np.digitize(x, edges) - 1
    ok = (which >= 0) & (which < bins)
    which, y = which[ok], y[ok]
    count = np.bincount(which, minlength=bins).astype(float)
    s1 = np.bincount(which, weights=y, minlength=bins)
    s2 = np.bincount(which, weights=y * y, minlength=bins)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = s1 / count
        var = np.maximum(s2 / count - mean**2, 0.0) * count / np.maximum(count - 1, 1)
        err = np.sqrt(var / count)
    return ObservableSeries(label or series[0].label, 0.5 * (edges[1:] + edges[:-1]), mean, err,
                            extra={"count": count})


def thread_count() -> int:
    """Worker threads for member-parallel work, from ``BEGOE_THREADS`` (default 1)."""
    try:
        n = int(os.environ.get("BEGOE_THREADS", "1"))
    except ValueError:
        raise ValueError("BEGOE_THREADS must be an integer") from None
    return max(1, n)


def map_members(spec: EnsembleSpec, fn: Callable[[ManyBodyHamiltonian, SpectralData], object],
                threads: int | None = None, diagonalize_members: bool = True) -> list:
    """Apply ``fn(hamiltonian, spectral_data)`` to every member, in member order.

    Members are independent so they run on a thread pool; results are
    returned in member order regardless of completion order.  With
    ``diagonalize_members=False`` the second argument is None.
    """
    threads = thread_count() if threads is None else threads

    def one(member):
        ham = assemble(spec, member)
        data = diagonalize(ham) if diagonalize_members else None
        return fn(ham, data)

    if threads == 1:
        return [one(i) for i in range(spec.members)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(spec.members)))
