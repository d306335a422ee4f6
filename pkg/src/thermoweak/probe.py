"""Thermal Gaussian probe state.

A Gaussian wave packet of position width ``sigma`` whose initial momentum
is drawn from a Maxwell-Boltzmann distribution at temperature ``T``.  The
ensemble average over the drift momentum is done analytically, so the
kernels below are the averaged density matrix elements.

Atomic units are the default (hbar = 1, k_B = 3.167e-6 per kelvin, mass in
electron masses); every constant can be overridden.
"""

from dataclasses import dataclass

import numpy as np

K_BOLTZMANN_AU = 3.167e-6
# one unified atomic mass unit in electron masses
ATOMIC_MASS_UNIT_AU = 1822.888486


@dataclass(frozen=True)
class ThermalGaussianProbe:
    sigma: float = 1.0
    mass: float = 50.0
    temperature: float = 0.0
    hbar: float = 1.0
    k_boltzmann: float = K_BOLTZMANN_AU

    def __post_init__(self):
        for name in ("sigma", "mass", "hbar", "k_boltzmann"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be positive, got {value!r}")
        if not np.isfinite(self.temperature) or self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature!r}")

    @property
    def thermal_momentum_variance(self) -> float:
        """m k_B T, the variance of the Maxwell-Boltzmann drift momentum."""
        return self.mass * self.k_boltzmann * self.temperature

    @property
    def alpha(self) -> float:
        return 2.0 * self.thermal_momentum_variance * self.sigma**2

    @property
    def beta(self) -> float:
        return self.hbar**2 + 2.0 * self.alpha

    @property
    def momentum_variance(self) -> float:
        """Variance of the momentum distribution, beta / (4 sigma^2)."""
        return self.beta / (4.0 * self.sigma**2)

    def replace(self, **changes) -> "ThermalGaussianProbe":
        fields = dict(
            sigma=self.sigma,
            mass=self.mass,
            temperature=self.temperature,
            hbar=self.hbar,
            k_boltzmann=self.k_boltzmann,
        )
        fields.update(changes)
        return ThermalGaussianProbe(**fields)


def density_kernel_x(probe: ThermalGaussianProbe, x, x_prime):
    """<x|rho|x'> of the thermal probe; broadcasts over array arguments.

    The thermal factor enters with a negative sign, exp(-m k_B T (x-x')^2 / 2 hbar^2),
    which is what averaging exp(i p0 (x - x') / hbar) over the Maxwell-Boltzmann
    distribution gives.
    """
    x = np.asarray(x, dtype=float)
    x_prime = np.asarray(x_prime, dtype=float)
    s2 = probe.sigma**2
    exponent = -(x**2 + x_prime**2) / (4.0 * s2) - (
        probe.thermal_momentum_variance * (x - x_prime) ** 2 / (2.0 * probe.hbar**2)
    )
    return np.exp(exponent) / np.sqrt(2.0 * np.pi * s2)


def density_kernel_p(probe: ThermalGaussianProbe, p, p_prime):
    """<p|rho|p'> of the thermal probe; broadcasts over array arguments."""
    p = np.asarray(p, dtype=float)
    p_prime = np.asarray(p_prime, dtype=float)
    hbar, s2 = probe.hbar, probe.sigma**2
    mkt = probe.thermal_momentum_variance
    prefactor = np.sqrt(2.0 * s2) / np.sqrt(np.pi * probe.beta)
    numerator = hbar**2 * s2 * (p**2 + p_prime**2) + 2.0 * mkt * s2**2 * (p - p_prime) ** 2
    denominator = hbar**4 + 4.0 * hbar**2 * mkt * s2
    return prefactor * np.exp(-numerator / denominator)


def purity(probe: ThermalGaussianProbe) -> float:
    """Tr[rho^2] = hbar / sqrt(hbar^2 + 4 m k_B T sigma^2)."""
    hbar = probe.hbar
    return hbar / np.sqrt(hbar**2 + 4.0 * probe.thermal_momentum_variance * probe.sigma**2)
