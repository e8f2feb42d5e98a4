"""Hamiltonians of the resonator + ladder emitter and the Gaussian control pulse.

All rates are absolute (``omega_c`` need not be 1); the config layer takes
care of the conversion from units of ``omega_c``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import ValidationError
from .hilbert import HilbertSpace, build_operators

CONVENTIONS = ("divide", "multiply")
WINDOW_SIGMAS = 6.0


@dataclass(frozen=True)
class SystemParams:
    omega_c: float = 1.0
    omega_q: float = 0.0
    g1: float = 1.0
    g2: float = 1.0
    kappa: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("omega_c", "omega_q", "g1", "g2", "kappa", "gamma"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value!r}")
        if self.omega_c <= 0:
            raise ValidationError(f"omega_c must be > 0, got {self.omega_c}")
        for name in ("omega_q", "g1", "g2", "kappa", "gamma"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0, got {getattr(self, name)}")

    @property
    def lossless(self) -> bool:
        return self.kappa == 0 and self.gamma == 0

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega_c


@dataclass(frozen=True)
class PulseSpec:
    A: float
    omega: float
    tau: float
    t_c: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.A, self.omega, self.tau, self.t_c)):
            raise ValidationError("pulse parameters must be finite")
        if self.tau <= 0:
            raise ValidationError(f"pulse tau must be > 0, got {self.tau}")
        if self.t_c < 0:
            raise ValidationError(f"pulse t_c must be >= 0, got {self.t_c}")

    def width(self, convention: str = "divide") -> float:
        """Standard deviation of the Gaussian under the given exponent convention."""
        # "multiply" reads the exponent as -(t - t_c)^2 * 2 tau^2
        return self.tau if convention == "divide" else 1.0 / (2.0 * self.tau)

    def window(self, convention: str = "divide") -> tuple[float, float]:
        half = WINDOW_SIGMAS * self.width(convention)
        return self.t_c - half, self.t_c + half

    def rotation_angle(self) -> float:
        """Integrated envelope area, A cos(omega t_c) exp(-omega^2 tau^2 / 2)."""
        return self.A * math.cos(self.omega * self.t_c) * math.exp(-0.5 * (self.omega * self.tau) ** 2)


def pulse_envelope(p: PulseSpec, t, convention: str = "divide"):
    """Real drive amplitude of one pulse; vectorized over ``t``."""
    t = np.asarray(t, dtype=float)
    dt2 = (t - p.t_c) ** 2
    if convention == "divide":
        gauss = np.exp(-dt2 / (2.0 * p.tau**2))
    elif convention == "multiply":
        gauss = np.exp(-dt2 * (2.0 * p.tau**2))
    else:
        raise ValidationError(f"unknown pulse exponent convention {convention!r}")
    out = p.A * np.cos(p.omega * t) * gauss / (p.tau * math.sqrt(2.0 * math.pi))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PulseSchedule:
    pulses: tuple[PulseSpec, ...] = ()
    convention: str = "divide"
    _windows: tuple[tuple[float, float], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise ValidationError(
                f"pulse_exponent_convention must be one of {CONVENTIONS}, got {self.convention!r}"
            )
        pulses = tuple(sorted(self.pulses, key=lambda p: p.t_c))
        object.__setattr__(self, "pulses", pulses)
        windows = tuple(p.window(self.convention) for p in pulses)
        object.__setattr__(self, "_windows", windows)
        for (_, hi), (lo, _) in zip(windows, windows[1:]):
            if lo < hi:
                warnings.warn("control pulse windows overlap", RuntimeWarning, stacklevel=3)

    @classmethod
    def of(cls, pulses: Iterable[PulseSpec], convention: str = "divide") -> "PulseSchedule":
        return cls(tuple(pulses), convention)

    def __len__(self) -> int:
        return len(self.pulses)

    @property
    def windows(self) -> tuple[tuple[float, float], ...]:
        return self._windows

    def merged_windows(self) -> list[tuple[float, float]]:
        """Pulse windows with overlapping ones fused."""
        merged: list[list[float]] = []
        for lo, hi in self._windows:
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        return [(lo, hi) for lo, hi in merged]

    def active(self, t: float) -> bool:
        return any(lo <= t <= hi for lo, hi in self._windows)

    def envelope(self, t) -> float:
        if not self.pulses:
            return 0.0 * np.asarray(t, dtype=float) if np.ndim(t) else 0.0
        return sum(pulse_envelope(p, t, self.convention) for p in self.pulses)


def build_h0(params: SystemParams, space: HilbertSpace) -> np.ndarray:
    """Lossless, undriven Hamiltonian with counter-rotating terms kept."""
    ops = build_operators(space)
    x = ops.a + ops.a_dag
    h = (
        params.omega_c * ops.a_dag @ ops.a
        + 2.0 * params.omega_q * ops.P_f
        + params.omega_q * ops.P_e
        + params.g1 * x @ (ops.sigma_eg + ops.sigma_eg.T)
        + params.g2 * x @ (ops.sigma_fe + ops.sigma_fe.T)
    )
    return h.astype(complex)


def drive_operator(space: HilbertSpace) -> np.ndarray:
    """|f><e| + |e><f| on the emitter, identity on the resonator."""
    ops = build_operators(space)
    return (ops.sigma_fe + ops.sigma_fe.T).astype(complex)


def build_hd(schedule: PulseSchedule, t: float, space: HilbertSpace) -> np.ndarray:
    return schedule.envelope(t) * drive_operator(space)


def build_heff(params: SystemParams, space: HilbertSpace) -> np.ndarray:
    """Time-independent part of the non-Hermitian effective Hamiltonian."""
    ops = build_operators(space)
    loss = 0.5 * params.kappa * ops.a_dag @ ops.a + 0.5 * params.gamma * (ops.P_f + ops.P_e)
    return build_h0(params, space) - 1j * loss


def hamiltonian_at(base: np.ndarray, schedule: PulseSchedule, t: float) -> np.ndarray:
    """``base + H_d(t)``; returns ``base`` itself when no pulse window covers ``t``."""
    if not schedule.active(t):
        return base
    return base + schedule.envelope(t) * drive_operator(HilbertSpace.from_dim(base.shape[0]))
