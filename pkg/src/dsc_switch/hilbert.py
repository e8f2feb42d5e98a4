"""Truncated Fock x three-level basis, ladder operators and named states.

Basis ordering interleaves the emitter levels inside each Fock shell, so the
basis index of ``|level, n>`` is ``3 * n + level``. States and operators are
plain numpy arrays over this basis.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache
from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import ValidationError

DEFAULT_N_MAX = 40
NORM_SLACK = 1e-9


class EmitterLevel(IntEnum):
    """Cascade levels; the integer value is the rank inside a Fock shell."""

    G = 0
    E = 1
    F = 2

    @classmethod
    def parse(cls, value: Union["EmitterLevel", str, int]) -> "EmitterLevel":
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            try:
                return cls[value.upper()]
            except KeyError:
                raise ValidationError(f"unknown emitter level {value!r}") from None
        return cls(int(value))


@dataclass(frozen=True)
class HilbertSpace:
    n_max: int = DEFAULT_N_MAX

    def __post_init__(self):
        if isinstance(self.n_max, bool) or not isinstance(self.n_max, (int, np.integer)):
            raise ValidationError(f"n_max must be an integer, got {self.n_max!r}")
        if self.n_max < 1:
            raise ValidationError(f"n_max must be >= 1, got {self.n_max}")

    @property
    def dim(self) -> int:
        return 3 * (self.n_max + 1)

    @classmethod
    def from_dim(cls, dim: int) -> "HilbertSpace":
        if dim % 3:
            raise ValidationError(f"dimension {dim} is not a multiple of 3")
        return cls(dim // 3 - 1)

    def index_of(self, level, n: int) -> int:
        return index_of(self, level, n)

    def label_of(self, index: int) -> tuple[EmitterLevel, int]:
        """Inverse of :func:`index_of`."""
        if not 0 <= index < self.dim:
            raise ValidationError(f"index {index} outside [0, {self.dim})")
        n, rank = divmod(int(index), 3)
        return EmitterLevel(rank), n

    def basis(self, level, n: int) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[index_of(self, level, n)] = 1.0
        return psi


def index_of(space: HilbertSpace, level, n: int) -> int:
    if not 0 <= n <= space.n_max:
        raise ValidationError(f"photon number n={n} outside [0, n_max={space.n_max}]")
    return 3 * int(n) + int(EmitterLevel.parse(level))


class Operators(NamedTuple):
    a: np.ndarray
    a_dag: np.ndarray
    P_g: np.ndarray
    P_e: np.ndarray
    P_f: np.ndarray
    sigma_eg: np.ndarray
    sigma_fe: np.ndarray


def _frozen(m: np.ndarray) -> np.ndarray:
    m.setflags(write=False)
    return m


@lru_cache(maxsize=16)
def build_operators(space: HilbertSpace) -> Operators:
    """Ladder operators and emitter projectors/transitions on the joint space.

    Results are cached per space and returned read-only.
    """
    photon_id = np.eye(space.n_max + 1)
    a_photon = np.diag(np.sqrt(np.arange(1, space.n_max + 1, dtype=float)), k=1)

    def emitter(i: int, j: int) -> np.ndarray:
        m = np.zeros((3, 3))
        m[i, j] = 1.0
        return np.kron(photon_id, m)

    a = np.kron(a_photon, np.eye(3))
    return Operators(
        a=_frozen(a),
        a_dag=_frozen(a.T.copy()),
        P_g=_frozen(emitter(0, 0)),
        P_e=_frozen(emitter(1, 1)),
        P_f=_frozen(emitter(2, 2)),
        sigma_eg=_frozen(emitter(1, 0)),
        sigma_fe=_frozen(emitter(2, 1)),
    )


_PARITY_NAME = re.compile(r"^(plus|minus|antisym)(\d+)$")
_BASIS_NAME = re.compile(r"^([gefGEF])(\d+)$")

StateName = Union[str, Sequence[complex], np.ndarray]


def make_named_state(space: HilbertSpace, name: StateName) -> np.ndarray:
    """Build a normalized initial state.

    Accepted names:

    * ``plusN`` / ``minusN``: the even/odd parity state with N photons,
      ``(|gN> + |fN>)/sqrt(2)`` or ``|eN>`` depending on which of the two has
      the requested parity (``plus0``, ``plus2``, ``minus1`` are the symmetric
      combinations; ``plus1``, ``minus0`` are ``|e1>``, ``|e0>``).
    * ``antisymN``: ``(|gN> - |fN>)/sqrt(2)``.
    * ``gN``, ``eN``, ``fN``: a single basis state.
    * a sequence of ``dim`` amplitudes, normalized on return.
    """
    if not isinstance(name, str):
        amps = np.asarray(name, dtype=complex)
        if amps.shape != (space.dim,):
            raise ValidationError(
                f"custom state needs {space.dim} amplitudes, got shape {amps.shape}"
            )
        norm = np.linalg.norm(amps)
        if not np.isfinite(norm) or norm == 0.0:
            raise ValidationError("custom state has zero or non-finite norm")
        return amps / norm

    m = _BASIS_NAME.match(name)
    if m:
        return space.basis(m.group(1), int(m.group(2)))
    m = _PARITY_NAME.match(name)
    if not m:
        raise ValidationError(f"unknown state name {name!r}")
    kind, n = m.group(1), int(m.group(2))
    psi = np.zeros(space.dim, dtype=complex)
    g, e, f = (index_of(space, lvl, n) for lvl in EmitterLevel)
    symmetric_even = n % 2 == 0  # (g+f) has parity (-1)^n
    if kind == "antisym":
        psi[g], psi[f] = 1.0, -1.0
    elif (kind == "plus") == symmetric_even:
        psi[g], psi[f] = 1.0, 1.0
    else:
        psi[e] = 1.0
    return psi / np.linalg.norm(psi)


def norm2(psi: np.ndarray) -> float:
    return float(np.vdot(psi, psi).real)
