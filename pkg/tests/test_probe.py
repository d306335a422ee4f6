import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from thermoweak.probe import (
    K_BOLTZMANN_AU,
    ThermalGaussianProbe,
    density_kernel_p,
    density_kernel_x,
    purity,
)


def averaged_x_kernel(probe, x, xp):
    """Average |psi_p0><psi_p0| over Maxwell-Boltzmann p0 by quadrature."""
    s2 = probe.sigma**2
    env = math.exp(-(x * x + xp * xp) / (4 * s2)) / math.sqrt(2 * math.pi * s2)
    var = probe.thermal_momentum_variance
    if var == 0:
        return env
    weight = lambda p0: math.exp(-p0 * p0 / (2 * var)) / math.sqrt(2 * math.pi * var)
    # the imaginary part vanishes by symmetry of the distribution
    val, _ = integrate.quad(lambda p0: weight(p0) * math.cos(p0 * (x - xp) / probe.hbar), -np.inf, np.inf)
    return env * val


@pytest.mark.parametrize("temperature", [0.0, 50.0, 300.0])
@pytest.mark.parametrize("x, xp", [(0.0, 0.0), (0.4, -0.7), (1.5, 1.1), (-2.0, 0.3)])
def test_x_kernel_matches_thermal_average(temperature, x, xp):
    probe = ThermalGaussianProbe(temperature=temperature)
    assert density_kernel_x(probe, x, xp) == pytest.approx(averaged_x_kernel(probe, x, xp), rel=1e-9, abs=1e-14)


def test_x_kernel_thermal_factor_suppresses_coherence():
    hot = ThermalGaussianProbe(temperature=5000.0)
    cold = ThermalGaussianProbe(temperature=0.0)
    assert density_kernel_x(hot, 1.0, -1.0) < density_kernel_x(cold, 1.0, -1.0)
    # diagonal elements do not see the temperature
    assert density_kernel_x(hot, 0.7, 0.7) == pytest.approx(density_kernel_x(cold, 0.7, 0.7))


def test_p_kernel_is_fourier_transform_of_x_kernel():
    probe = ThermalGaussianProbe(temperature=50.0)
    p, pp = 0.3, -0.2
    hbar = probe.hbar

    def integrand(xp, x):
        return math.cos((p * x - pp * xp) / hbar) * density_kernel_x(probe, x, xp)

    val, _ = integrate.dblquad(integrand, -12, 12, -12, 12, epsabs=1e-11, epsrel=1e-10)
    assert density_kernel_p(probe, p, pp) == pytest.approx(val / (2 * math.pi * hbar), rel=1e-7)


@pytest.mark.parametrize("temperature", [0.0, 100.0, 1000.0])
def test_p_kernel_has_unit_trace(temperature):
    probe = ThermalGaussianProbe(temperature=temperature)
    val, _ = integrate.quad(lambda p: density_kernel_p(probe, p, p), -np.inf, np.inf)
    assert val == pytest.approx(1.0, abs=1e-10)


def test_momentum_variance_from_kernel():
    probe = ThermalGaussianProbe(temperature=200.0)
    val, _ = integrate.quad(lambda p: p * p * density_kernel_p(probe, p, p), -np.inf, np.inf)
    assert val == pytest.approx(probe.momentum_variance, rel=1e-10)
    assert probe.momentum_variance == pytest.approx(0.25 + 50 * K_BOLTZMANN_AU * 200.0)


@pytest.mark.parametrize("temperature", [0.0, 300.0])
def test_purity_matches_double_integral(temperature):
    probe = ThermalGaussianProbe(temperature=temperature)
    val, _ = integrate.dblquad(
        lambda pp, p: density_kernel_p(probe, p, pp) ** 2, -8, 8, -8, 8, epsabs=1e-12
    )
    assert purity(probe) == pytest.approx(val, abs=1e-9)


def test_pure_probe_has_unit_purity(probe):
    assert purity(probe) == 1.0
    assert probe.alpha == 0.0
    assert probe.beta == probe.hbar**2


@pytest.mark.parametrize("field, value", [("sigma", 0.0), ("mass", -1.0), ("temperature", -1.0), ("hbar", math.nan)])
def test_invalid_parameters_rejected(field, value):
    with pytest.raises(ValueError):
        ThermalGaussianProbe(**{field: value})


def test_replace_keeps_other_fields():
    probe = ThermalGaussianProbe(sigma=2.0, mass=7.0)
    hot = probe.replace(temperature=10.0)
    assert (hot.sigma, hot.mass, hot.temperature) == (2.0, 7.0, 10.0)


def test_kernels_broadcast():
    probe = ThermalGaussianProbe(temperature=30.0)
    p = np.linspace(-2, 2, 5)
    mat = density_kernel_p(probe, p[:, None], p[None, :])
    assert mat.shape == (5, 5)
    assert mat[1, 3] == pytest.approx(density_kernel_p(probe, p[1], p[3]))


@settings(max_examples=50, deadline=None)
@given(
    temperature=st.floats(0, 1e4),
    sigma=st.floats(0.1, 5),
    p=st.floats(-5, 5),
    pp=st.floats(-5, 5),
)
def test_p_kernel_symmetric_and_bounded(temperature, sigma, p, pp):
    probe = ThermalGaussianProbe(sigma=sigma, temperature=temperature)
    a = density_kernel_p(probe, p, pp)
    assert a == density_kernel_p(probe, pp, p)
    # Cauchy-Schwarz for a positive kernel
    assert a * a <= density_kernel_p(probe, p, p) * density_kernel_p(probe, pp, pp) * (1 + 1e-12) + 1e-300
    assert 0 < purity(probe) <= 1
