"""Occupation-number basis for m spinless bosons in N levels.

States are stored as integer tuples and ordered descending-lexicographically,
so ``(m, 0, ..., 0)`` is index 0 and ``(0, ..., 0, m)`` is the last index.
k-boson monomial operators are normalized by ``1/sqrt(prod a_i!)`` so that
``B^dagger(a)|0>`` has unit norm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

__all__ = [
    "MAX_LEVELS_PLUS_PARTICLES",
    "CapacityError",
    "BosonBasis",
    "MonomialAction",
    "dimension",
    "enumerate_basis",
    "annihilate_monomial",
    "create_monomial",
]

# C(63, p) always fits in a signed 64-bit integer; larger arguments are refused.
MAX_LEVELS_PLUS_PARTICLES = 64


class CapacityError(ValueError):
    """Raised when a requested Fock space exceeds the supported size."""


def dimension(N: int, p: int) -> int:
    """Number of ways to place ``p`` bosons in ``N`` levels, C(N+p-1, p)."""
    if N < 1 or p < 0:
        raise ValueError(f"need N >= 1 and p >= 0, got N={N}, p={p}")
    if N + p > MAX_LEVELS_PLUS_PARTICLES:
        raise CapacityError(
            f"N + p = {N + p} exceeds capacity bound {MAX_LEVELS_PLUS_PARTICLES} (N={N}, p={p})"
        )
    return math.comb(N + p - 1, p)


def _compositions(N: int, p: int):
    # descending lexicographic generation
    if N == 1:
        yield (p,)
        return
    for first in range(p, -1, -1):
        for rest in _compositions(N - 1, p - first):
            yield (first,) + rest


@dataclass(frozen=True)
class BosonBasis:
    """Ordered basis of occupation vectors with an inverse index map.

    Attributes
    ----------
    N : int
        Number of single-particle levels.
    m : int
        Number of bosons.
    states : tuple of tuple of int
        Occupation vectors in descending lexicographic order.
    index_of : dict
        Map from occupation tuple to its position in ``states``.
    """

    N: int
    m: int
    states: tuple
    index_of: dict = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return len(self.states)

    def as_array(self) -> np.ndarray:
        """Occupations as an int array of shape ``(dim, N)``."""
        return np.array(self.states, dtype=np.int64).reshape(len(self.states), self.N)

    def index(self, occ: Sequence[int]) -> int:
        return self.index_of[tuple(int(x) for x in occ)]


@lru_cache(maxsize=64)
def enumerate_basis(N: int, m: int) -> BosonBasis:
    """Enumerate all occupation vectors of ``m`` bosons in ``N`` levels."""
    if m < 0:
        raise ValueError(f"m must be non-negative, got {m}")
    d = dimension(N, m)
    states = tuple(_compositions(N, m))
    assert len(states) == d
    return BosonBasis(N=N, m=m, states=states, index_of={s: i for i, s in enumerate(states)})


@dataclass(frozen=True)
class MonomialAction:
    """Result of applying a normalized k-boson monomial to a basis state.

    ``target`` is None when the state is annihilated, in which case
    ``amplitude`` is 0.
    """

    target: tuple | None
    amplitude: float

    @property
    def is_null(self) -> bool:
        return self.target is None


NULL_ACTION = MonomialAction(None, 0.0)


def _falling_ratio(top: int, steps: int) -> float:
    # top! / (top - steps)!, multiplied out to avoid large factorials
    r = 1.0
    for j in range(steps):
        r *= top - j
    return r


def _check_lengths(state, mono):
    if len(state) != len(mono):
        raise ValueError(f"length mismatch: state has {len(state)} levels, monomial {len(mono)}")
    if any(x < 0 for x in mono) or any(x < 0 for x in state):
        raise ValueError("occupations must be non-negative")


def annihilate_monomial(state: Sequence[int], b: Sequence[int]) -> MonomialAction:
    """Apply ``B(b) = prod_i b_i^{b_i} / sqrt(prod_i b_i!)`` to ``|state>``."""
    _check_lengths(state, b)
    if any(s < x for s, x in zip(state, b)):
        return NULL_ACTION
    amp2 = 1.0
    for s, x in zip(state, b):
        amp2 *= _falling_ratio(s, x) / math.factorial(x)
    return MonomialAction(tuple(s - x for s, x in zip(state, b)), math.sqrt(amp2))


def create_monomial(state: Sequence[int], a: Sequence[int]) -> MonomialAction:
    """Apply ``B^dagger(a) = prod_i (b_i^dagger)^{a_i} / sqrt(prod_i a_i!)`` to ``|state>``."""
    _check_lengths(state, a)
    amp2 = 1.0
    for s, x in zip(state, a):
        amp2 *= _falling_ratio(s + x, x) / math.factorial(x)
    return MonomialAction(tuple(s + x for s, x in zip(state, a)), math.sqrt(amp2))
