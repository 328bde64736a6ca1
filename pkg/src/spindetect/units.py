"""Internal unit system for the detector models.

All public interfaces of this package use SI. Internally every solver works
in natural units with hbar = mass = 1, built from a reference angular
frequency omega_ref (the spin resonance for the detector models):

    time unit    T0 = 1/omega_ref
    length unit  L0 = sqrt(hbar/(mass*omega_ref))
    energy unit  E0 = hbar*omega_ref

This keeps every matrix entry within a few orders of magnitude of unity
instead of mixing hbar ~ 1e-34 with wavenumbers ~ 1e9.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

HBAR = 1.054571817e-34  # J s
CESIUM_MASS_KG = 2.2069e-25  # cesium-133 atom


@dataclass(frozen=True)
class UnitSystem:
    """Conversion factors between SI and the internal natural units."""

    reference_frequency: float  # rad/s
    mass: float  # kg

    def __post_init__(self):
        if not (self.reference_frequency > 0.0 and np.isfinite(self.reference_frequency)):
            raise ConfigurationError(
                f"reference_frequency must be positive and finite, got {self.reference_frequency}")
        if not (self.mass > 0.0 and np.isfinite(self.mass)):
            raise ConfigurationError(f"mass must be positive and finite, got {self.mass}")

    @property
    def time_unit(self) -> float:
        """T0 in seconds."""
        return 1.0 / self.reference_frequency

    @property
    def length_unit(self) -> float:
        """L0 in meters."""
        return np.sqrt(HBAR / (self.mass * self.reference_frequency))

    @property
    def energy_unit(self) -> float:
        """E0 in joules."""
        return HBAR * self.reference_frequency

    # --- SI -> internal -------------------------------------------------
    def time_in(self, t_si):
        return np.asarray(t_si) * self.reference_frequency

    def length_in(self, x_si):
        return np.asarray(x_si) / self.length_unit

    def wavenumber_in(self, k_si):
        return np.asarray(k_si) * self.length_unit

    def frequency_in(self, omega_si):
        """Angular frequencies and rates alike (1/s)."""
        return np.asarray(omega_si) / self.reference_frequency

    def energy_in(self, e_si):
        return np.asarray(e_si) / self.energy_unit

    def velocity_in(self, v_si):
        return np.asarray(v_si) * self.time_unit / self.length_unit

    # --- internal -> SI -------------------------------------------------
    def time_out(self, t_int):
        return np.asarray(t_int) * self.time_unit

    def length_out(self, x_int):
        return np.asarray(x_int) * self.length_unit

    def wavenumber_out(self, k_int):
        return np.asarray(k_int) / self.length_unit

    def frequency_out(self, omega_int):
        return np.asarray(omega_int) * self.reference_frequency

    def energy_out(self, e_int):
        return np.asarray(e_int) * self.energy_unit

    def velocity_out(self, v_int):
        return np.asarray(v_int) * self.length_unit / self.time_unit
