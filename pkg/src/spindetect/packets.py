"""Gaussian wave packets: momentum amplitudes and free evolution.

The incident particle is a minimum-uncertainty Gaussian moving in +x with
momentum-space amplitude

    psi(k) = (hbar/(dp*sqrt(2 pi)))^(1/2) * exp(-hbar^2 (k - k0)^2/(4 dp^2))

normalized so that integral |psi(k)|^2 dk = 1, with k0 = m v0/hbar and dp
the momentum-width parameter. focus_time/focus_position place the
minimum-width instant: at t = focus_time the real-space packet is an
unchirped Gaussian centered at focus_position. The free evolution is known
in closed form (chirped Gaussian) and doubles as the propagation oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .model import Grid1D
from .units import HBAR


@dataclass(frozen=True)
class GaussianPacketSpec:
    """Incident Gaussian packet, all fields SI."""

    mass: float                 # kg
    mean_velocity: float        # m/s, > 0 (incidence from the left)
    momentum_width: float       # kg m/s (dp)
    focus_time: float = 0.0     # s
    focus_position: float = 0.0  # m

    def __post_init__(self):
        if not (self.mass > 0 and np.isfinite(self.mass)):
            raise ConfigurationError(f"mass must be positive, got {self.mass}")
        if not (self.mean_velocity > 0 and np.isfinite(self.mean_velocity)):
            raise ConfigurationError(
                f"mean_velocity must be positive, got {self.mean_velocity}")
        if not (self.momentum_width > 0 and np.isfinite(self.momentum_width)):
            raise ConfigurationError(
                f"momentum_width must be positive, got {self.momentum_width}")

    @property
    def mean_wavenumber(self) -> float:
        """k0 = m v0/hbar, 1/m."""
        return self.mass * self.mean_velocity / HBAR

    @property
    def wavenumber_width(self) -> float:
        """sigma_k = dp/hbar, 1/m."""
        return self.momentum_width / HBAR

    @property
    def position_width(self) -> float:
        """Minimal real-space std dev sigma_x = hbar/(2 dp), m."""
        return HBAR / (2.0 * self.momentum_width)

    def wavenumber_window(self, n_sigma: float = 8.0) -> tuple[float, float]:
        """Synthesis window [k0 - n_sigma*sigma_k, k0 + n_sigma*sigma_k].

        The scattering basis assumes incidence from the left, so the window
        must stay strictly positive; k0/sigma_k > n_sigma is required.
        """
        k0, sk = self.mean_wavenumber, self.wavenumber_width
        lo = k0 - n_sigma * sk
        if lo <= 0.0:
            raise ConfigurationError(
                f"momentum window reaches k <= 0 (k0/sigma_k = {k0 / sk:.3g} "
                f"<= {n_sigma:.3g}); narrow the packet or reduce the window")
        return (lo, k0 + n_sigma * sk)

    def quadrature_nodes(self, n_nodes: int, n_sigma: float = 8.0
                         ) -> tuple[np.ndarray, np.ndarray]:
        """Uniform trapezoid nodes and weights over the synthesis window."""
        if n_nodes < 9:
            raise ConfigurationError(f"need at least 9 quadrature nodes, got {n_nodes}")
        lo, hi = self.wavenumber_window(n_sigma)
        k = np.linspace(lo, hi, n_nodes)
        w = np.full(n_nodes, k[1] - k[0])
        w[0] *= 0.5
        w[-1] *= 0.5
        return k, w


def momentum_amplitude(spec: GaussianPacketSpec, k) -> np.ndarray:
    """psi(k) in m^(1/2), including focus phases.

    The phase factors exp(-i k x_f) exp(i E_k t_f/hbar) translate the
    minimum-width instant to (focus_time, focus_position).
    """
    k = np.asarray(k, dtype=float)
    dp = spec.momentum_width
    k0 = spec.mean_wavenumber
    amp = np.sqrt(HBAR / (dp * np.sqrt(2.0 * np.pi))) * np.exp(
        -HBAR**2 * (k - k0) ** 2 / (4.0 * dp**2))
    phase = (-k * spec.focus_position
             + (HBAR * k**2 / (2.0 * spec.mass)) * spec.focus_time)
    return amp * np.exp(1j * phase)


def free_evolved_packet(spec: GaussianPacketSpec, t: float, grid: Grid1D,
                        *, resolution_check: bool = True) -> np.ndarray:
    """Closed-form freely evolved packet psi(x, t) on the grid, m^(-1/2).

    Chirped Gaussian: with sigma_k = dp/hbar, b = 1/(4 sigma_k^2) + i theta/2,
    theta = hbar (t - t_f)/m, X = x - x_f,

        psi = (2 pi sigma_k^2)^(-1/4) (2 b)^(-1/2)
              * exp(-(X - theta k0)^2/(4 b)) * exp(i k0 X - i theta k0^2/2)
    """
    if resolution_check:
        k_hi = spec.wavenumber_window()[1]
        if grid.spacing >= np.pi / k_hi:
            raise ConfigurationError(
                f"grid spacing {grid.spacing:.3e} m does not resolve the packet "
                f"(needs < pi/k_max = {np.pi / k_hi:.3e} m)")
    x = grid.points()
    sk = spec.wavenumber_width
    k0 = spec.mean_wavenumber
    theta = HBAR * (t - spec.focus_time) / spec.mass
    big_x = x - spec.focus_position
    b = 1.0 / (4.0 * sk**2) + 0.5j * theta
    return ((2.0 * np.pi * sk**2) ** -0.25 / np.sqrt(2.0 * b)
            * np.exp(-((big_x - theta * k0) ** 2) / (4.0 * b))
            * np.exp(1j * (k0 * big_x - 0.5 * theta * k0**2)))


class TabulatedMomentumAmplitude:
    """Escape hatch: a packet given by tabulated psi(k) samples.

    Nodes must be strictly increasing and positive; the table is used
    directly as the synthesis quadrature (trapezoid weights). The norm
    integral |psi|^2 dk must equal 1 within 1e-6.
    """

    def __init__(self, k_nodes, values):
        k = np.asarray(k_nodes, dtype=float)
        v = np.asarray(values, dtype=complex)
        if k.ndim != 1 or k.shape != v.shape or k.size < 9:
            raise ConfigurationError("tabulated amplitude needs matching 1D tables, >= 9 rows")
        if not np.all(np.diff(k) > 0):
            raise ConfigurationError("tabulated k nodes must be strictly increasing")
        if k[0] <= 0:
            raise ConfigurationError("tabulated k nodes must be positive")
        norm = np.trapezoid(np.abs(v) ** 2, k)
        if abs(norm - 1.0) > 1e-6:
            raise ConfigurationError(
                f"tabulated amplitude norm {norm:.8f} differs from 1 by more than 1e-6")
        self.k_nodes = k
        self.values = v

    def quadrature_nodes(self, n_nodes: int | None = None, n_sigma: float = 8.0
                         ) -> tuple[np.ndarray, np.ndarray]:
        k = self.k_nodes
        w = np.empty_like(k)
        w[1:-1] = 0.5 * (k[2:] - k[:-2])
        w[0] = 0.5 * (k[1] - k[0])
        w[-1] = 0.5 * (k[-1] - k[-2])
        return k, w

    def __call__(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        re = np.interp(k, self.k_nodes, self.values.real, left=0.0, right=0.0)
        im = np.interp(k, self.k_nodes, self.values.imag, left=0.0, right=0.0)
        return re + 1j * im
