"""Photon statistics, overlaps, reduced cavity state and its Wigner function.

Quadrature convention: ``x = (a^dag + a)/sqrt(2)``, ``y = i(a^dag - a)/sqrt(2)``,
``alpha = (x + i y)/sqrt(2)``. With this choice the vacuum Wigner function is
``exp(-(x^2 + y^2))/pi`` and integrates to one over ``dx dy``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

QUADRATURE_CONVENTION = "x=(a^dag+a)/sqrt(2), y=i(a^dag-a)/sqrt(2), alpha=(x+iy)/sqrt(2)"
DEFAULT_WIGNER_EXTENT = 7.0
DEFAULT_WIGNER_POINTS = 201


def _shells(psi: np.ndarray) -> np.ndarray:
    """Amplitudes reshaped to (photon number, emitter level)."""
    return np.asarray(psi).reshape(-1, 3)


def photon_distribution(psi: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(_shells(psi)) ** 2, axis=1)


def mean_photon_number(psi: np.ndarray) -> float:
    probs = photon_distribution(psi)
    return float(np.arange(probs.size) @ probs)


def overlap_probability(psi: np.ndarray, phi: np.ndarray) -> float:
    return float(abs(np.vdot(psi, phi)) ** 2)


def reduced_cavity_density(psi: np.ndarray) -> np.ndarray:
    """Partial trace over the emitter."""
    m = _shells(psi)
    return m @ m.conj().T


@dataclass(frozen=True)
class WignerGrid:
    xs: np.ndarray
    ys: np.ndarray
    w: np.ndarray  # shape (len(ys), len(xs))

    def integral(self) -> float:
        """Riemann sum of W dx dy (uniform grids)."""
        dx = (self.xs[-1] - self.xs[0]) / (len(self.xs) - 1)
        dy = (self.ys[-1] - self.ys[0]) / (len(self.ys) - 1)
        return float(self.w.sum() * dx * dy)

    def local_maxima(self, threshold: float = 0.0) -> list[tuple[float, float, float]]:
        """Interior grid points strictly above all 8 neighbours and ``threshold``.

        Returns ``(x, y, W)`` triples sorted by decreasing W.
        """
        w = self.w
        core = w[1:-1, 1:-1]
        mask = core > threshold
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dy or dx:
                    mask &= core > w[1 + dy : w.shape[0] - 1 + dy, 1 + dx : w.shape[1] - 1 + dx]
        iy, ix = np.nonzero(mask)
        peaks = [(float(self.xs[j + 1]), float(self.ys[i + 1]), float(core[i, j])) for i, j in zip(iy, ix)]
        return sorted(peaks, key=lambda p: -p[2])


def default_grid(extent: float = DEFAULT_WIGNER_EXTENT, points: int = DEFAULT_WIGNER_POINTS) -> np.ndarray:
    return np.linspace(-extent, extent, points)


def _wigner_sum(rho: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Complex double sum over rho[m, n] * W_{|m><n|}; imaginary part is rounding."""
    rho = np.asarray(rho, dtype=complex)
    X, Y = np.meshgrid(np.asarray(xs, float), np.asarray(ys, float))
    alpha = (X + 1j * Y) / np.sqrt(2.0)
    r2 = np.abs(alpha) ** 2
    z = 4.0 * r2
    phase = np.exp(-1j * np.angle(alpha))  # conj(alpha)/|alpha|; angle(0) = 0
    with np.errstate(divide="ignore"):
        log_two_r = np.log(2.0 * np.sqrt(r2))

    size = rho.shape[0]
    total = np.zeros_like(alpha)
    for k in range(size):
        # |m><n| with m = n + k carries conj(2 alpha)^k; log scaling keeps each
        # prefactor finite for large k and |alpha|
        radial_log = (k * log_two_r if k else 0.0) - 2.0 * r2
        ang = phase**k
        lag_prev = np.zeros_like(z)
        lag = np.ones_like(z)
        for n in range(size - k):
            m = n + k
            if n == 1:
                lag_prev, lag = lag, 1.0 + k - z
            elif n > 1:
                lag_prev, lag = lag, ((2 * n - 1 + k - z) * lag - (n - 1 + k) * lag_prev) / n
            with np.errstate(under="ignore", invalid="ignore"):
                mag = np.exp(radial_log + 0.5 * (gammaln(n + 1) - gammaln(m + 1)))
            term = (-1) ** n * mag * ang * lag
            if k == 0:
                total += rho[n, n] * term
            else:
                total += rho[m, n] * term + rho[n, m] * np.conj(term)
    return total / np.pi


def wigner(rho: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> WignerGrid:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size == 0 or ys.size == 0:
        raise ValueError("Wigner grids must be nonempty")
    if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
        raise ValueError("Wigner grids must be strictly ascending")
    return WignerGrid(xs, ys, _wigner_sum(rho, xs, ys).real)
