"""Parity of the joint excitation number and the dark-state couplings."""
from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .hilbert import EmitterLevel, HilbertSpace, index_of

# excitation weight of each level in N = a^dag a + 2|f><f| + |e><e|
_LEVEL_WEIGHT = {EmitterLevel.G: 0, EmitterLevel.E: 1, EmitterLevel.F: 2}


class ParityWeights(NamedTuple):
    even: float
    odd: float


def parity_of_basis(level, n: int) -> int:
    if n < 0:
        raise ValueError(f"photon number must be >= 0, got {n}")
    return -1 if (n + _LEVEL_WEIGHT[EmitterLevel.parse(level)]) % 2 else 1


@lru_cache(maxsize=16)
def _parity_diagonal(space: HilbertSpace) -> np.ndarray:
    signs = np.array(
        [parity_of_basis(*space.label_of(i)) for i in range(space.dim)], dtype=float
    )
    signs.setflags(write=False)
    return signs


def parity_signs(space: HilbertSpace) -> np.ndarray:
    """Diagonal of the parity operator, read-only."""
    return _parity_diagonal(space)


def parity_operator(space: HilbertSpace) -> np.ndarray:
    return np.diag(_parity_diagonal(space)).astype(complex)


def parity_weights(psi: np.ndarray) -> ParityWeights:
    signs = _parity_diagonal(HilbertSpace.from_dim(psi.shape[0]))
    prob = np.abs(psi) ** 2
    return ParityWeights(float(prob[signs > 0].sum()), float(prob[signs < 0].sum()))


def effective_coupling(bra_level, bra_n: int, ket: np.ndarray, h0: np.ndarray) -> complex:
    """Matrix element <bra_level, bra_n| h0 |ket>."""
    space = HilbertSpace.from_dim(h0.shape[0])
    return complex(h0[index_of(space, bra_level, bra_n)] @ ket)


def commutator_max_abs(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a @ b - b @ a)))


def anticommutator_max_abs(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a @ b + b @ a)))
