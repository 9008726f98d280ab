import math

import numpy as np
import pytest

from begoe.kbody_ensemble import EnsembleSpec, assemble
from begoe.qtheory import gaussian_density
from begoe.spectral_analysis import (
    HistogramSpec,
    SpectralData,
    bin_series,
    density_histogram,
    diagonalize,
    info_entropy,
    ldos,
    ldos_counts,
    lh_numeric,
    map_members,
    npc_numeric,
    standardize,
    zeta_from_H,
    zeta_from_spectrum,
)


def _fake(C, E=None):
    d = C.shape[0]
    E = np.linspace(-1, 1, d) if E is None else E
    return SpectralData(E, C, np.zeros(d), float(np.mean(E)), float(np.std(E)))


def test_diagonalize_diagonal_matrix():
    data = diagonalize(np.diag([3.0, -1.0, 2.0]))
    np.testing.assert_array_equal(data.eigenvalues, [-1.0, 2.0, 3.0])
    assert np.array_equal(np.abs(data.eigenvectors), np.abs(data.eigenvectors).round())
    np.testing.assert_array_equal(np.abs(data.eigenvectors).sum(0), 1.0)


def test_diagonalize_pauli_x():
    np.testing.assert_allclose(diagonalize(np.array([[0.0, 1.0], [1.0, 0.0]])).eigenvalues, [-1.0, 1.0])


def test_diagonalize_residual_contract(rng):
    A = rng.standard_normal((50, 50))
    H = A + A.T
    data = diagonalize(H)
    C, w = data.eigenvectors, data.eigenvalues
    assert np.max(np.abs(H @ C - C * w)) <= 1e-8 * np.max(np.abs(H))
    assert np.max(np.abs(C.T @ C - np.eye(50))) < 1e-9
    np.testing.assert_allclose((C**2).sum(0), 1.0, atol=1e-10)
    np.testing.assert_allclose((C**2).sum(1), 1.0, atol=1e-9)
    assert np.all(np.diff(w) >= 0)
    assert data.centroid == pytest.approx(np.mean(w))
    assert data.sigma_H**2 == pytest.approx(np.var(w))


def test_diagonalize_rejects_nonfinite():
    with pytest.raises(ValueError):
        diagonalize(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_standardize():
    x = standardize([1.0, 2.0, 3.0], 2.0, np.std([1.0, 2.0, 3.0]))
    assert x.mean() == pytest.approx(0.0)
    assert x.var() == pytest.approx(1.0)
    np.testing.assert_allclose(standardize(x, x.mean(), x.std()), x)
    with pytest.raises(ValueError):
        standardize([2.0, 2.0], 2.0, 0.0)


def test_histogram_spec_validation():
    with pytest.raises(ValueError):
        HistogramSpec(5)
    with pytest.raises(ValueError):
        HistogramSpec(20, (1.0, -1.0))


def test_density_histogram_of_gaussian_draws(rng):
    dc = density_histogram([rng.standard_normal(200_000)])
    assert dc.integral() == pytest.approx(1.0, abs=1e-9)
    assert np.max(np.abs(dc.values - gaussian_density(dc.abscissa))) < 0.02
    with pytest.raises(ValueError):
        density_histogram([])


def test_density_histogram_unit_integral_for_ensemble():
    spec = EnsembleSpec(3, 4, 2, members=5, seed=1)
    eigs = map_members(spec, lambda h, d: d)
    assert density_histogram(eigs).integral() == pytest.approx(1.0, abs=1e-9)


def test_ldos_diagonal_hamiltonian_is_a_spike():
    H = np.diag(np.linspace(-5, 5, 41))
    data = diagonalize(H)
    spec = HistogramSpec(50, (-3, 3))
    counts = ldos_counts(data, 0.0, 1, spec)
    assert counts.sum() == pytest.approx(1.0)
    assert np.count_nonzero(counts) == 1
    assert counts[np.searchsorted(spec.edges, 0.0, side="right") - 1] == pytest.approx(1.0)


def test_ldos_total_weight_before_normalization():
    data = diagonalize(assemble(EnsembleSpec(3, 5, 2, seed=2), 0))
    counts = ldos_counts(data, 0.0, 7, HistogramSpec(50, (-10, 10)))
    assert counts.sum() == pytest.approx(7.0)
    assert ldos(data, 0.0, 7).integral() == pytest.approx(1.0)


def test_zeta_extremes():
    assert zeta_from_H(np.diag([1.0, 2.0, 4.0])) == pytest.approx(1.0)
    A = np.array([[0.0, 1.0, 0.5], [1.0, 0.0, -0.3], [0.5, -0.3, 0.0]])
    assert zeta_from_H(A) == 0.0
    with pytest.raises(ValueError):
        zeta_from_H(np.eye(3))


@pytest.mark.parametrize("k, lam", [(2, 0.3), (3, 0.1), (4, 1.0)])
def test_zeta_two_routes_agree(k, lam):
    ham = assemble(EnsembleSpec(3, 6, k, lam=lam, seed=4), 0)
    assert zeta_from_H(ham) == pytest.approx(zeta_from_spectrum(diagonalize(ham)), abs=1e-10)


def test_zeta_decreases_with_lambda():
    z = [np.mean([zeta_from_H(assemble(EnsembleSpec(3, 6, 2, lam=lam, members=5, seed=3), i)) for i in range(5)])
         for lam in (0.05, 0.1, 0.2, 0.5)]
    assert all(a > b for a, b in zip(z, z[1:]))


def test_npc_and_lh_extremes():
    d = 16
    uniform = np.full((d, d), 1 / math.sqrt(d))
    data = _fake(uniform)
    np.testing.assert_allclose(npc_numeric(data).value, d)
    np.testing.assert_allclose(info_entropy(data), math.log(d))
    np.testing.assert_allclose(lh_numeric(data).value, 1 / 0.48)
    basis = _fake(np.eye(d))
    np.testing.assert_allclose(npc_numeric(basis).value, 1.0)
    np.testing.assert_allclose(info_entropy(basis), 0.0)
    np.testing.assert_allclose(lh_numeric(basis).value, 1 / (0.48 * d))


def test_npc_and_entropy_bounds_on_ensemble():
    data = diagonalize(assemble(EnsembleSpec(3, 6, 3, seed=9), 0))
    npc = npc_numeric(data).value
    S = info_entropy(data)
    assert np.all((npc >= 1) & (npc <= data.dim))
    assert np.all((S >= 0) & (S <= math.log(data.dim) + 1e-12))


def test_bin_series_statistics():
    from begoe.series import ObservableSeries

    s = ObservableSeries("x", [-0.9, -0.8, 0.1, 0.2, 0.3, 5.0], [1.0, 3.0, 2.0, 4.0, 6.0, 100.0])
    out = bin_series([s], bins=2, range=(-1, 1))
    np.testing.assert_allclose(out.value, [2.0, 4.0])
    np.testing.assert_allclose(out.extra["count"], [2, 3])
    np.testing.assert_allclose(out.stderr, [1.0, 2.0 / math.sqrt(3)])


def test_map_members_threads_match_serial():
    spec = EnsembleSpec(3, 4, 2, members=6, seed=12)
    serial = map_members(spec, lambda h, d: d.eigenvalues, threads=1)
    parallel = map_members(spec, lambda h, d: d.eigenvalues, threads=3)
    for a, b in zip(serial, parallel):
        assert np.array_equal(a, b)


def test_symmetry_of_curves_without_h1():
    spec = EnsembleSpec(3, 6, 2, members=40, seed=21, include_h1=False)
    rows = map_members(spec, lambda h, d: (npc_numeric(d), lh_numeric(d)))
    for idx in (0, 1):
        curve = bin_series([r[idx] for r in rows], bins=10, range=(-1.5, 1.5))
        diff = np.abs(curve.value - curve.value[::-1])
        err = np.hypot(curve.stderr, curve.stderr[::-1])
        assert np.all(diff < 3 * err + 1e-12)
