"""Weak-regime Gaussian description of the post-selected meter.

To first order in theta the post-selected probe is a displaced Gaussian.
Its covariance, purity and mean derivatives feed the general single-mode
Gaussian QFI

    I = Tr[(S^-1 S')^2] / (2 (1 + P^2)) + 2 P'^2 / (1 - P^4) + dX'^T S^-1 dX'

The covariance uses the (x, p) ordering with Var(x) = 4 sigma^2, the
convention in which det S = hbar^2 for the pure probe.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import SingularCovariance
from .grid import MomentumGrid
from .probe import ThermalGaussianProbe
from .selection import (
    SelectionContext,
    postselection_overlap,
    weak_value,
    weak_value_abs_sq,
)

DET_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class GaussianSummary:
    mean: np.ndarray
    covariance: np.ndarray
    purity: float
    mean_derivative: np.ndarray
    covariance_derivative: np.ndarray
    purity_derivative: float

    def __post_init__(self):
        cov = np.asarray(self.covariance, dtype=float)
        if cov.shape != (2, 2) or not np.allclose(cov, cov.T, rtol=0, atol=1e-12):
            raise ValueError("covariance must be a symmetric 2x2 matrix")
        for name, shape in (
            ("mean", (2,)),
            ("mean_derivative", (2,)),
            ("covariance_derivative", (2, 2)),
        ):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "covariance", cov)


def gaussian_summary_weak(probe: ThermalGaussianProbe, ctx: SelectionContext, theta) -> GaussianSummary:
    """First-order moments of the post-selected meter.

    S = diag(4 sigma^2, hbar^2 / (4 sigma^2) + m k_B T) does not depend on
    theta, so S' = 0 and P' = 0; the mean moves along
    (2 hbar Re A_w, Im A_w (hbar^2 + 4 m k_B T sigma^2) / (2 sigma^2)).
    """
    a_w = weak_value(ctx)
    s2 = probe.sigma**2
    hbar = probe.hbar
    mkt = probe.thermal_momentum_variance
    cov = np.diag([4.0 * s2, hbar**2 / (4.0 * s2) + mkt])
    slope = np.array([2.0 * hbar * a_w.real, a_w.imag * (hbar**2 + 4.0 * mkt * s2) / (2.0 * s2)])
    return GaussianSummary(
        mean=theta * slope,
        covariance=cov,
        purity=1.0 / math.sqrt(hbar**2 + 4.0 * mkt * s2),
        mean_derivative=slope,
        covariance_derivative=np.zeros((2, 2)),
        purity_derivative=0.0,
    )


def gaussian_qfi(summary: GaussianSummary) -> float:
    """QFI of a single-mode Gaussian state from its moments and their derivatives."""
    cov = summary.covariance
    det = float(np.linalg.det(cov))
    if det < DET_TOL:
        raise SingularCovariance(f"det covariance = {det:.3e}")
    inv = np.linalg.inv(cov)
    m = inv @ summary.covariance_derivative
    p = summary.purity
    dp = summary.purity_derivative
    shape_term = np.trace(m @ m) / (2.0 * (1.0 + p * p))
    if dp == 0.0:
        purity_term = 0.0
    else:
        purity_term = 2.0 * dp * dp / (1.0 - p**4)
    d = summary.mean_derivative
    return float(shape_term + purity_term + d @ inv @ d)


def qfi_weak_closed_form(probe: ThermalGaussianProbe, ctx: SelectionContext) -> float:
    """(hbar^2 |A_w|^2 + 2 alpha Im(A_w)^2) / sigma^2; the T = 0 value is hbar^2 |A_w|^2 / sigma^2."""
    a_w = weak_value(ctx)
    return (probe.hbar**2 * weak_value_abs_sq(ctx) + 2.0 * probe.alpha * a_w.imag**2) / probe.sigma**2


def _wigner_exponent_coefficients(probe, ctx, theta, as_printed):
    a_w = weak_value(ctx)
    s2 = probe.sigma**2
    var_x = 4.0 * s2
    var_p = probe.beta / (4.0 * s2)
    if as_printed:
        tilt_x = probe.hbar * theta * a_w.real / s2
        tilt_p = 4.0 * theta * a_w.imag
    else:
        # chosen so the means equal theta times the mean_derivative above
        tilt_x = probe.hbar * theta * a_w.real / (2.0 * s2)
        tilt_p = 2.0 * theta * a_w.imag
    return var_x, var_p, tilt_x, tilt_p


def wigner_weak(probe, ctx, theta, x, p, as_printed=False):
    """First-order Wigner function of the post-selected meter, normalized to 1.

    Envelope exp(-x^2 / (8 sigma^2) - 2 p^2 sigma^2 / beta) times a linear
    tilt in the exponent.  The reference tilt coefficients
    (4 theta Im A_w for p, hbar theta Re A_w / sigma^2 for x) displace the
    means by twice the first-order shifts, so by default they are halved to
    agree with :func:`gaussian_summary_weak`; ``as_printed=True`` keeps them.
    The normalization is done analytically by completing the square.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    var_x, var_p, tilt_x, tilt_p = _wigner_exponent_coefficients(probe, ctx, theta, as_printed)
    exponent = -x**2 / (2.0 * var_x) - p**2 / (2.0 * var_p) + tilt_x * x + tilt_p * p
    log_norm = 0.5 * (tilt_x**2 * var_x + tilt_p**2 * var_p)
    return np.exp(exponent - log_norm) / (2.0 * np.pi * math.sqrt(var_x * var_p))


class NoPostselectionQFI(NamedTuple):
    closed_form: float
    numeric: float


def qfi_no_postselection(probe, ctx, theta=0.025, grid=None) -> NoPostselectionQFI:
    """QFI of the standard strategy, without post-selection.

    ``closed_form`` is hbar^2 <A^2>_i / sigma^2 for a pure probe and the
    low-temperature value hbar^2 <A>_i^2 / sigma^2 otherwise.  ``numeric`` is
    the SLD QFI of the meter state Tr_s[rho'] at coupling ``theta``.
    """
    from .numeric_qfi import discretize_unselected, sld_qfi

    hbar2_s2 = probe.hbar**2 / probe.sigma**2
    if probe.temperature == 0:
        closed = hbar2_s2 * ctx.expectation(2)
    else:
        closed = hbar2_s2 * ctx.expectation(1) ** 2
    if grid is None:
        grid = MomentumGrid.for_probe(probe, theta)
    numeric = sld_qfi(discretize_unselected(probe, ctx, theta, grid))
    return NoPostselectionQFI(closed, numeric)


def qfi_ratios(probe, ctx):
    """(R_pure, R_post) with the post-selection probability included.

    R_pure = |<f|A|i>|^2.  R_post is taken verbatim:
    1 + 4 m k_B T sigma^2 Im(<f|A|i>)^2 |<f|i>|^2 / (hbar^2 |A_w|^2).
    """
    amp = ctx.transition_amplitude()
    a2 = weak_value_abs_sq(ctx)
    overlap = postselection_overlap(ctx)
    r_pure = abs(amp) ** 2
    r_post = 1.0 + (
        4.0 * probe.thermal_momentum_variance * amp.imag**2 * probe.sigma**2
        / (probe.hbar**2 * a2)
        * overlap
    )
    return r_pure, r_post
