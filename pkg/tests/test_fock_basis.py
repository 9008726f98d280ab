import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from begoe.fock_basis import (
    CapacityError,
    annihilate_monomial,
    create_monomial,
    dimension,
    enumerate_basis,
)

from conftest import brute_force_states


@pytest.mark.parametrize("N, p, expected", [(2, 9, 10), (3, 6, 28), (5, 10, 1001), (4, 10, 286)])
def test_dimension_reference_values(N, p, expected):
    assert dimension(N, p) == expected


@pytest.mark.parametrize("N", [1, 2, 7])
def test_dimension_vacuum(N):
    assert dimension(N, 0) == 1


@pytest.mark.parametrize("N, p", [(1, 3), (2, 4), (3, 5), (4, 4), (5, 3)])
def test_dimension_matches_stars_and_bars_enumeration(N, p):
    assert dimension(N, p) == len(brute_force_states(N, p))


def test_dimension_capacity_error():
    assert dimension(32, 32) == math.comb(63, 32)
    with pytest.raises(CapacityError):
        dimension(40, 30)
    with pytest.raises(ValueError):
        dimension(0, 3)


def test_enumerate_small_listings():
    assert enumerate_basis(2, 2).states == ((2, 0), (1, 1), (0, 2))
    assert enumerate_basis(3, 1).states == ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def test_enumerate_4_10():
    basis = enumerate_basis(4, 10)
    assert basis.dim == 286 == len(brute_force_states(4, 10))
    assert basis.states[0] == (10, 0, 0, 0)
    assert basis.states[-1] == (0, 0, 0, 10)


@pytest.mark.parametrize("N, m", [(2, 9), (3, 6), (4, 5), (5, 4)])
def test_basis_invariants(N, m):
    basis = enumerate_basis(N, m)
    assert len(set(basis.states)) == basis.dim
    assert all(sum(s) == m and len(s) == N for s in basis.states)
    assert all(a > b for a, b in zip(basis.states, basis.states[1:]))
    assert all(basis.index_of[s] == i for i, s in enumerate(basis.states))
    assert sorted(basis.states, reverse=True) == sorted(brute_force_states(N, m), reverse=True)
    assert basis.as_array().shape == (basis.dim, N)


def test_annihilate_examples():
    act = annihilate_monomial((2, 0), (2, 0))
    assert act.target == (0, 0) and act.amplitude == pytest.approx(1.0)
    act = annihilate_monomial((1, 1), (2, 0))
    assert act.is_null and act.amplitude == 0.0
    act = annihilate_monomial((3, 0), (1, 0))
    assert act.target == (2, 0) and act.amplitude == pytest.approx(math.sqrt(3))


def test_create_examples():
    act = create_monomial((0, 0), (2, 0))
    assert act.target == (2, 0) and act.amplitude == pytest.approx(1.0)
    act = create_monomial((1, 0), (1, 0))
    assert act.target == (2, 0) and act.amplitude == pytest.approx(math.sqrt(2))
    act = create_monomial((1, 1), (0, 1))
    assert act.target == (1, 2) and act.amplitude == pytest.approx(math.sqrt(2))


def test_length_mismatch_is_usage_error():
    with pytest.raises(ValueError):
        create_monomial((1, 0), (1, 0, 0))
    with pytest.raises(ValueError):
        annihilate_monomial((1, 0, 0), (1, 0))


occupations = st.lists(st.integers(0, 5), min_size=1, max_size=4)


@given(occupations, st.data())
@settings(max_examples=200, deadline=None)
def test_round_trip_and_adjointness(state, data):
    b = data.draw(st.lists(st.integers(0, 3), min_size=len(state), max_size=len(state)))
    down = annihilate_monomial(state, b)
    if down.is_null:
        assert any(s < x for s, x in zip(state, b))
        return
    up = create_monomial(down.target, b)
    assert up.target == tuple(state)
    # <state|B^dagger(b)|target> equals <target|B(b)|state>
    assert up.amplitude == pytest.approx(down.amplitude, rel=1e-12)


def test_normalized_creation_on_vacuum_has_unit_norm():
    for mono in enumerate_basis(3, 4).states:
        assert create_monomial((0, 0, 0), mono).amplitude == pytest.approx(1.0)


def test_large_occupation_has_no_overflow():
    act = annihilate_monomial((60, 0), (30, 0))
    expected = math.exp(0.5 * (math.lgamma(61) - math.lgamma(31) - math.lgamma(31)))
    assert act.amplitude == pytest.approx(expected, rel=1e-10)
    assert np.isfinite(act.amplitude)
