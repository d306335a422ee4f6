"""All-order interaction, post-selection and signal-to-noise ratios.

With A^2 = I the coupling exp(-i theta A P) acts on the momentum basis as
cos(theta p) - i A sin(theta p).  Projecting the system onto |f> leaves the
probe multiplied by

    K(p) = cos(theta p) - i A_w sin(theta p)

so the post-selected meter kernel is K(p) rho(p, p') K*(p') / Z1.  All
quantities here are evaluated in the momentum representation by quadrature.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import (
    GridUnderresolved,
    ImaginaryDenominator,
    ValidityWarning,
    ZeroPostselection,
)
from .grid import MomentumGrid
from .probe import ThermalGaussianProbe, density_kernel_p
from .selection import (
    ORTHOGONALITY_TOL,
    SelectionContext,
    postselection_overlap,
    weak_value,
    weak_value_abs_sq,
)

log = logging.getLogger(__name__)

TAIL_TOL = 1e-8
NORMALIZATION_TOL = 1e-10
MAX_REFINEMENTS = 6
DEFAULT_VALIDITY_THRESHOLD = 0.1


@dataclass(frozen=True, eq=False)
class PostSelectedMeterState:
    """Probe after coupling strength ``theta`` and post-selection.

    When ``grid`` is omitted a window of ten momentum standard deviations is
    used and the point count is doubled until Z1 is stable to 1e-10.
    """

    probe: ThermalGaussianProbe
    ctx: SelectionContext
    theta: float
    grid: Optional[MomentumGrid] = None
    overlap: float = field(init=False)
    weak_value: complex = field(init=False)
    weak_value_abs_sq: float = field(init=False)

    def __post_init__(self):
        if not self.ctx.is_involutive:
            raise ValueError("the all-order meter state requires an observable with A^2 = I")
        if not np.isfinite(self.theta):
            raise ValueError(f"theta must be finite, got {self.theta!r}")
        overlap = postselection_overlap(self.ctx)
        object.__setattr__(self, "overlap", overlap)
        if overlap < ORTHOGONALITY_TOL:
            # no ensemble survives; K(p) is undefined but the probability is 0
            object.__setattr__(self, "weak_value", complex("nan"))
            object.__setattr__(self, "weak_value_abs_sq", math.nan)
        else:
            object.__setattr__(self, "weak_value", weak_value(self.ctx))
            object.__setattr__(self, "weak_value_abs_sq", weak_value_abs_sq(self.ctx))
        if self.grid is None:
            object.__setattr__(self, "grid", self._converged_grid())

    def _converged_grid(self):
        grid = MomentumGrid.for_probe(self.probe, self.theta)
        if self.overlap < ORTHOGONALITY_TOL:
            return grid
        z = _normalization(self, grid)
        for _ in range(MAX_REFINEMENTS):
            finer = grid.refined()
            z_finer = _normalization(self, finer)
            if abs(z_finer - z) <= NORMALIZATION_TOL * abs(z_finer):
                break
            grid, z = finer, z_finer
        return grid

    def with_theta(self, theta) -> "PostSelectedMeterState":
        """Same probe, selection and grid at another coupling strength."""
        return PostSelectedMeterState(self.probe, self.ctx, theta, self.grid)

    @property
    def weak_parameter(self) -> float:
        """theta |Im A_w| sqrt(2 omega'), small in the weak regime."""
        return weak_parameter(self.probe, self.weak_value, self.theta)

    @property
    def normalization(self) -> float:
        """Z1 on the state's grid."""
        return _normalization(self, self.grid)


def weak_parameter(probe, a_w, theta) -> float:
    return abs(theta * complex(a_w).imag) * math.sqrt(probe.beta) / probe.sigma


def interaction_factor(state: PostSelectedMeterState, p):
    """K(p) = cos(theta p) - i A_w sin(theta p)."""
    p = np.asarray(p, dtype=float)
    tp = state.theta * p
    return np.cos(tp) - 1j * state.weak_value * np.sin(tp)


def interaction_factor_derivative(state: PostSelectedMeterState, p):
    """dK/dtheta = -p sin(theta p) - i A_w p cos(theta p)."""
    p = np.asarray(p, dtype=float)
    tp = state.theta * p
    return -p * np.sin(tp) - 1j * state.weak_value * p * np.cos(tp)


def interaction_weight(state: PostSelectedMeterState, p):
    """cos^2 + 2 Im(A_w) sin cos + |A_w|^2 sin^2, with the trace-form |A_w|^2."""
    p = np.asarray(p, dtype=float)
    s, c = np.sin(state.theta * p), np.cos(state.theta * p)
    return c * c + 2.0 * state.weak_value.imag * s * c + state.weak_value_abs_sq * s * s


def interaction_weight_derivative(state: PostSelectedMeterState, p):
    """d/dtheta of :func:`interaction_weight`."""
    p = np.asarray(p, dtype=float)
    s2, c2 = np.sin(2.0 * state.theta * p), np.cos(2.0 * state.theta * p)
    return p * ((state.weak_value_abs_sq - 1.0) * s2 + 2.0 * state.weak_value.imag * c2)


def _normalization(state, grid):
    p = grid.points
    return grid.integrate(interaction_weight(state, p) * density_kernel_p(state.probe, p, p))


def _gaussian_tail(limit, variance, order):
    """Integral of |p|^order N(0, variance) over |p| > limit."""
    a = limit / math.sqrt(2.0 * variance)
    edge = math.sqrt(variance / (2.0 * math.pi)) * math.exp(-a * a)
    if order == 0:
        return math.erfc(a)
    if order == 1:
        return 2.0 * edge
    if order == 2:
        return variance * math.erfc(a) + 2.0 * limit * edge
    raise ValueError(f"order must be 0, 1 or 2, got {order!r}")


def check_resolution(state: PostSelectedMeterState, order=0, z=None):
    """Raise GridUnderresolved if the grid truncates or undersamples the state.

    The tail bound uses |K|^2 <= 1 + |A_w|^2 against the Gaussian envelope.
    """
    grid = state.grid
    var = state.probe.momentum_variance
    if z is None:
        z = _normalization(state, grid)
    bound = (1.0 + state.weak_value_abs_sq) / z
    tail = bound * _gaussian_tail(grid.p_max, var, order)
    if tail > TAIL_TOL:
        raise GridUnderresolved(
            f"tail mass {tail:.2e} beyond p_max={grid.p_max:g} exceeds {TAIL_TOL:g}"
        )
    if abs(state.theta) * grid.dp > math.pi / 8.0:
        raise GridUnderresolved(
            f"dp={grid.dp:.3g} undersamples cos(theta p) at theta={state.theta:g}"
        )
    if grid.dp > 0.25 * math.sqrt(var):
        raise GridUnderresolved(
            f"dp={grid.dp:.3g} is coarse against the momentum width {math.sqrt(var):.3g}"
        )


def _require_postselection(state, z):
    # written so that a NaN probability also fails
    if not z * state.overlap >= ORTHOGONALITY_TOL:
        raise ZeroPostselection(
            f"post-selection probability {z * state.overlap:.3e} is below {ORTHOGONALITY_TOL:g}"
        )


def meter_kernel(state: PostSelectedMeterState, p, p_prime):
    """Normalized post-selected kernel K(p) rho(p, p') K*(p') / Z1."""
    z = state.normalization if state.overlap >= ORTHOGONALITY_TOL else 0.0
    _require_postselection(state, z)
    k = interaction_factor(state, p)
    k_prime = interaction_factor(state, p_prime)
    return k * density_kernel_p(state.probe, p, p_prime) * np.conj(k_prime) / z


def postselected_diagonal(state: PostSelectedMeterState) -> np.ndarray:
    """Momentum distribution of the post-selected meter on the state's grid."""
    p = state.grid.points
    raw = interaction_weight(state, p) * density_kernel_p(state.probe, p, p)
    z = state.grid.integrate(raw)
    _require_postselection(state, z)
    return raw / z


def postselection_probability_allorder(state: PostSelectedMeterState) -> float:
    """|<f|i>|^2 Z1, the probability of landing in |f> at any coupling."""
    if state.overlap < ORTHOGONALITY_TOL:
        return 0.0
    return state.overlap * state.normalization


def momentum_moments(state: PostSelectedMeterState, order: int) -> float:
    """<P^order> in the post-selected meter state (order 1 or 2)."""
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order!r}")
    if state.overlap < ORTHOGONALITY_TOL:
        _require_postselection(state, 0.0)
    check_resolution(state, order)
    rho = postselected_diagonal(state)
    return state.grid.integrate(state.grid.points**order * rho)


def snr_postselected_numeric(state: PostSelectedMeterState, n_trials: int) -> float:
    """sqrt(N P) |<P>_ps| / Delta p_ps with the all-order probability P."""
    if n_trials <= 0:
        raise ValueError(f"n_trials must be positive, got {n_trials!r}")
    prob = postselection_probability_allorder(state)
    m1 = momentum_moments(state, 1)
    m2 = momentum_moments(state, 2)
    spread = m2 - m1 * m1
    if spread <= 0:
        raise ValueError("post-selected momentum variance is not positive")
    # <P>_i = 0 for the thermal probe
    return math.sqrt(n_trials * prob) * abs(m1) / math.sqrt(spread)


def snr_mixed_closed_form(probe, ctx, theta, n_trials, as_printed=True) -> float:
    """Closed-form all-order momentum SNR.

    ``as_printed=True`` evaluates the reference expression term by term.  It
    does not reduce to the pure-state expression at T = 0 and carries an
    unsquared Im(A_w) in the radicand, so it is kept only for comparison.

    ``as_printed=False`` evaluates the expression re-derived from the exact
    Gaussian moments of |K|^2 rho(p, p):

        2 theta sqrt(beta) sqrt(N P) |Im A_w|
        / sqrt([(beta theta^2 - sigma^2) eps + e sigma^2 (1 + |A_w|^2)]
               (e (1 + |A_w|^2) - eps) - 4 beta theta^2 Im(A_w)^2)

    with e = exp(theta^2 omega') and P the all-order probability.  This
    agrees with :func:`snr_postselected_numeric` to quadrature accuracy.
    """
    a_w = weak_value(ctx)
    a2 = weak_value_abs_sq(ctx)
    amp = math.sqrt(postselection_overlap(ctx))
    im = a_w.imag
    sigma2 = probe.sigma**2
    beta = probe.beta
    eps = a2 - 1.0
    omega = beta / (2.0 * sigma2)
    e = math.exp(theta**2 * omega)
    if as_printed:
        numerator = math.sqrt(n_trials) * amp * math.sqrt(beta) * theta * im
        radicand = (
            (probe.hbar**2 * theta**2 - sigma2 + 2.0 * probe.alpha * theta**2) * eps
            + e * sigma2 * (1.0 + a2) * (eps + e * (1.0 + a2))
            - 4.0 * beta * theta**2 * im
        )
    else:
        z1 = (e * (1.0 + a2) - eps) / (2.0 * e)
        numerator = 2.0 * theta * math.sqrt(beta) * math.sqrt(n_trials * z1) * amp * abs(im)
        radicand = ((beta * theta**2 - sigma2) * eps + e * sigma2 * (1.0 + a2)) * (
            e * (1.0 + a2) - eps
        ) - 4.0 * beta * theta**2 * im**2
    if radicand < 0:
        raise ImaginaryDenominator(f"radicand {radicand:.4g} < 0 at theta={theta}")
    return numerator / math.sqrt(radicand)


def snr_pure_closed_form(probe, ctx, theta, n_trials) -> float:
    """Reference T = 0 all-order SNR (uses the zeroth-order |<f|i>|)."""
    a_w = weak_value(ctx)
    a2 = weak_value_abs_sq(ctx)
    amp = math.sqrt(postselection_overlap(ctx))
    hbar, sigma2 = probe.hbar, probe.sigma**2
    e = math.exp(hbar**2 * theta**2 / (2.0 * sigma2))
    numerator = 2.0 * hbar * theta * math.sqrt(n_trials) * amp * abs(a_w.imag)
    radicand = ((-sigma2 + hbar**2 * theta**2) * (a2 - 1.0) + e * sigma2 * (1.0 + a2)) * (
        1.0 + e * (1.0 + a2) - a2
    ) - 4.0 * hbar**4 * theta**2 * a_w.imag**2
    if radicand < 0:
        raise ImaginaryDenominator(f"radicand {radicand:.4g} < 0 at theta={theta}")
    return numerator / math.sqrt(radicand)


class WeakLimitSNR(NamedTuple):
    value: float
    weak_parameter: float
    valid: bool


def snr_weak_limit(
    probe, ctx, theta, n_trials, validity_threshold=DEFAULT_VALIDITY_THRESHOLD
) -> WeakLimitSNR:
    """First-order SNR sqrt(N) |<f|i>| theta Im(A_w) sqrt(1 + 4 m k_B T sigma^2 / hbar^2) hbar / sigma.

    Emits ValidityWarning when theta |Im A_w| sqrt(2 omega') reaches the threshold.
    """
    a_w = weak_value(ctx)
    amp = math.sqrt(postselection_overlap(ctx))
    hbar = probe.hbar
    thermal = 1.0 + 4.0 * probe.thermal_momentum_variance * probe.sigma**2 / hbar**2
    value = math.sqrt(n_trials) * amp * abs(theta * a_w.imag) * math.sqrt(thermal) * hbar / probe.sigma
    param = weak_parameter(probe, a_w, theta)
    valid = param < validity_threshold
    if not valid:
        warnings.warn(
            f"weak-coupling parameter {param:.3g} >= {validity_threshold:g}; "
            "first-order SNR is unreliable",
            ValidityWarning,
            stacklevel=2,
        )
    return WeakLimitSNR(value, param, valid)


@dataclass
class SNRComparison:
    """All SNR routes at one parameter point, plus an optional reference value."""

    theta: float
    temperature: float
    numeric: float
    weak_limit: float
    closed_form_printed: Optional[float]
    closed_form_derived: float
    reference: Optional[float] = None

    def relative(self, value):
        return abs(value - self.numeric) / self.numeric if self.numeric else math.inf

    def lines(self):
        rows = [
            ("numeric (all orders)", self.numeric),
            ("closed form, derived", self.closed_form_derived),
            ("closed form, as printed", self.closed_form_printed),
            ("weak limit", self.weak_limit),
        ]
        out = [f"SNR at theta={self.theta:g}, T={self.temperature:g} K"]
        for name, value in rows:
            if value is None:
                out.append(f"  {name:<26} undefined (negative radicand)")
            else:
                out.append(f"  {name:<26} {value:.6g}  (rel. to numeric {self.relative(value):.2e})")
        if self.reference is not None:
            out.append(
                f"  {'reference':<26} {self.reference:.6g}  (rel. to numeric "
                f"{self.relative(self.reference):.2e})"
            )
        return out


def compare_snr(probe, ctx, theta, n_trials, reference=None, grid=None) -> SNRComparison:
    """Evaluate every SNR route and log the mismatch against ``reference``."""
    state = PostSelectedMeterState(probe, ctx, theta, grid)
    try:
        printed = snr_mixed_closed_form(probe, ctx, theta, n_trials, as_printed=True)
    except ImaginaryDenominator:
        printed = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        weak = snr_weak_limit(probe, ctx, theta, n_trials).value
    report = SNRComparison(
        theta=theta,
        temperature=probe.temperature,
        numeric=snr_postselected_numeric(state, n_trials),
        weak_limit=weak,
        closed_form_printed=printed,
        closed_form_derived=snr_mixed_closed_form(probe, ctx, theta, n_trials, as_printed=False),
        reference=reference,
    )
    for line in report.lines():
        log.info(line)
    return report
