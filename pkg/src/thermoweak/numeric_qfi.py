"""Quantum Fisher information at arbitrary coupling from discretized states.

The post-selected kernel is discretized on a momentum grid with symmetric
quadrature weights, rho_ij = sqrt(w_i) rho(p_i, p_j) sqrt(w_j), so that the
matrix has unit trace and its spectrum approximates that of the operator.
The QFI is Tr[rho L^2] with the symmetric logarithmic derivative built in
the eigenbasis of rho.

Because rho(p, p') of the probe is real, the post-selected matrix is
U R U^dagger with U = diag(K / |K|) and R real symmetric.  When a
:class:`DiscretizedState` carries those phases the eigenproblem is solved in
real arithmetic; eigenvectors are mapped back exactly.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DegenerateSupport, NonPositiveState
from .grid import MomentumGrid
from .meter import (
    PostSelectedMeterState,
    check_resolution,
    interaction_factor,
    interaction_factor_derivative,
    interaction_weight,
    interaction_weight_derivative,
    postselection_probability_allorder,
    _require_postselection,
)
from .probe import density_kernel_p
from .selection import weak_value, weak_value_abs_sq

log = logging.getLogger(__name__)

# SLD pairs with d_i + d_j below this fraction of d_max are dropped
SLD_CUTOFF = 1e-12
# fraction of ||d rho||_F^2 allowed on the dropped pairs
SKIPPED_MASS_TOL = 1e-6
# fidelity keeps eigenvalues above this fraction of the largest one
FIDELITY_CUTOFF = 1e-14
NEGATIVITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DiscretizedState:
    """Trace-one matrix of a theta-dependent state and its theta-derivative.

    ``phases``, when set, is a unit-modulus vector u with
    diag(u)^* matrix diag(u) real symmetric.
    """

    grid: MomentumGrid
    matrix: np.ndarray
    matrix_derivative: np.ndarray
    phases: Optional[np.ndarray] = None

    def validate(self, hermitian_tol=1e-12, trace_tol=1e-8):
        m, dm = self.matrix, self.matrix_derivative
        scale = max(np.abs(m).max(), 1.0)
        if np.abs(m - m.conj().T).max() > hermitian_tol * scale:
            raise ValueError("matrix is not Hermitian")
        dscale = max(np.abs(dm).max(), 1.0)
        if np.abs(dm - dm.conj().T).max() > hermitian_tol * dscale:
            raise ValueError("matrix_derivative is not Hermitian")
        if abs(np.trace(m).real - 1.0) > trace_tol:
            raise ValueError(f"trace {np.trace(m).real!r} != 1")
        if abs(np.trace(dm).real) > trace_tol * dscale:
            raise ValueError(f"derivative trace {np.trace(dm).real!r} != 0")
        return self


def _hermitian(m):
    return 0.5 * (m + m.conj().T)


def discretize(state: PostSelectedMeterState) -> DiscretizedState:
    """Matrix of the normalized post-selected kernel and its analytic theta-derivative.

    d/dtheta [K rho K^* / Z] = (K' rho K^* + K rho K'^*) / Z - K rho K^* Z' / Z^2.
    """
    grid = state.grid
    p = grid.points
    w = grid.weights
    rho_d = density_kernel_p(state.probe, p[:, None], p[None, :])
    diag = np.diagonal(rho_d)
    z = float(np.dot(w, interaction_weight(state, p) * diag))
    _require_postselection(state, z)
    check_resolution(state, 0, z)
    dz = float(np.dot(w, interaction_weight_derivative(state, p) * diag))

    sw = np.sqrt(w)
    k = interaction_factor(state, p) * sw
    dk = interaction_factor_derivative(state, p) * sw
    left = k[:, None] * rho_d
    matrix = _hermitian(left * k.conj()[None, :] / z)
    cross = dk[:, None] * rho_d * k.conj()[None, :]
    derivative = _hermitian(cross + cross.conj().T) / z - matrix * (dz / z)

    modulus = np.abs(k)
    phases = np.ones_like(k)
    nonzero = modulus > 0
    phases[nonzero] = k[nonzero] / modulus[nonzero]
    return DiscretizedState(grid, matrix, derivative, phases)


def discretize_unselected(probe, ctx, theta, grid: MomentumGrid) -> DiscretizedState:
    """Meter state Tr_s[rho'] without post-selection, and its theta-derivative.

    With A = sum_k a_k |k><k| the reduced meter kernel is
    sum_k |<k|i>|^2 exp(-i theta a_k (p - p')) rho(p, p').
    """
    p = grid.points
    sw = np.sqrt(grid.weights)
    rho_d = density_kernel_p(probe, p[:, None], p[None, :]) * sw[:, None] * sw[None, :]
    eigvals, eigvecs = np.linalg.eigh(ctx.observable)
    populations = np.abs(eigvecs.conj().T @ ctx.pre_state) ** 2
    diff = p[:, None] - p[None, :]
    matrix = np.zeros_like(rho_d, dtype=complex)
    derivative = np.zeros_like(rho_d, dtype=complex)
    for a_k, pop in zip(eigvals, populations):
        if pop == 0:
            continue
        term = pop * np.exp(-1j * theta * a_k * diff) * rho_d
        matrix += term
        derivative += -1j * a_k * diff * term
    norm = np.trace(matrix).real
    matrix = _hermitian(matrix / norm)
    derivative = _hermitian(derivative / norm)
    phases = None
    if np.abs(matrix.imag).max() <= 1e-14 * np.abs(matrix.real).max():
        phases = np.ones(len(p), dtype=complex)
    return DiscretizedState(grid, matrix, derivative, phases)


class Spectrum(NamedTuple):
    values: np.ndarray  # ascending
    vectors: np.ndarray  # columns


def spectrum(d: DiscretizedState) -> Spectrum:
    """Ascending eigenvalues and eigenvectors of ``d.matrix``."""
    if d.phases is None:
        values, vectors = np.linalg.eigh(d.matrix)
        return Spectrum(values, vectors)
    u = d.phases
    real_part = (u.conj()[:, None] * d.matrix * u[None, :]).real
    values, vectors = np.linalg.eigh(0.5 * (real_part + real_part.T))
    return Spectrum(values, u[:, None] * vectors)


def sld_qfi(d: DiscretizedState, cutoff=SLD_CUTOFF) -> float:
    """Tr[rho L^2] = sum_ij 2 |(d rho)_ij|^2 / (d_i + d_j) in the eigenbasis of rho.

    Pairs with d_i + d_j < cutoff * d_max are skipped.  Raises
    DegenerateSupport when those pairs carry more than 1e-6 of the squared
    Frobenius norm of the derivative.
    """
    values, vectors = spectrum(d)
    d_max = values[-1]
    threshold = cutoff * d_max
    # a pair can pass only if one member exceeds threshold / 2
    active = np.nonzero(values > 0.5 * threshold)[0]
    # columns of the derivative in the eigenbasis for the active indices
    block = vectors.conj().T @ (d.matrix_derivative @ vectors[:, active])
    sums = values[:, None] + values[None, active]
    keep = sums > threshold
    weight = np.abs(block) ** 2
    contrib = np.where(keep, 2.0 * weight / np.where(keep, sums, 1.0), 0.0)
    in_active = np.zeros(len(values), dtype=bool)
    in_active[active] = True
    # rows outside the active set appear twice in the full double sum
    multiplicity = np.where(in_active, 1.0, 2.0)[:, None]
    qfi = float(np.sum(multiplicity * contrib))

    total = float(np.sum(np.abs(d.matrix_derivative) ** 2))
    included = float(np.sum(multiplicity * np.where(keep, weight, 0.0)))
    skipped = max(total - included, 0.0)
    if total > 0 and skipped > SKIPPED_MASS_TOL * total:
        raise DegenerateSupport(
            f"{skipped / total:.2e} of the derivative weight lies on dropped eigenpairs"
        )
    return qfi


def pure_state_qfi(psi, dpsi, weights=None) -> float:
    """4 (<psi'|psi'> - |<psi'|psi>|^2) for a normalized wavefunction on a grid."""
    psi = np.asarray(psi, dtype=complex)
    dpsi = np.asarray(dpsi, dtype=complex)
    w = np.ones(len(psi)) if weights is None else np.asarray(weights, dtype=float)
    norm_d = float(np.sum(w * np.abs(dpsi) ** 2))
    overlap = complex(np.sum(w * dpsi.conj() * psi))
    return 4.0 * (norm_d - abs(overlap) ** 2)


def effective_qfi(state: PostSelectedMeterState) -> float:
    """All-order post-selection probability times the QFI of the post-selected meter."""
    return postselection_probability_allorder(state) * sld_qfi(discretize(state))


def _support(spec, cutoff=FIDELITY_CUTOFF):
    values, vectors = spec
    d_max = values[-1]
    if values[0] < -NEGATIVITY_TOL * d_max:
        raise NonPositiveState(f"eigenvalue {values[0]:.3e} below -{NEGATIVITY_TOL:g} d_max")
    keep = values > cutoff * d_max
    return np.sqrt(values[keep]), vectors[:, keep]


def fidelity_sqrt_from_spectra(spec1: Spectrum, spec2: Spectrum) -> float:
    """sqrt(F) = || sqrt(rho1) sqrt(rho2) ||_1 from eigendecompositions.

    Singular values of the small matrix sqrt(D1) V1^dagger V2 sqrt(D2) are
    accurate to machine precision in absolute terms, unlike the square root
    of sqrt(rho1) rho2 sqrt(rho1), whose null-space noise gets amplified.
    """
    s1, v1 = _support(spec1)
    s2, v2 = _support(spec2)
    core = s1[:, None] * (v1.conj().T @ v2) * s2[None, :]
    return float(np.linalg.svd(core, compute_uv=False).sum())


def fidelity(rho1, rho2) -> float:
    """Uhlmann fidelity [Tr sqrt(sqrt(rho1) rho2 sqrt(rho1))]^2 of two density matrices."""
    spec1 = Spectrum(*np.linalg.eigh(_hermitian(np.asarray(rho1, dtype=complex))))
    spec2 = Spectrum(*np.linalg.eigh(_hermitian(np.asarray(rho2, dtype=complex))))
    return fidelity_sqrt_from_spectra(spec1, spec2) ** 2


def bures_distance(rho1, rho2) -> float:
    return math.sqrt(max(2.0 - 2.0 * math.sqrt(fidelity(rho1, rho2)), 0.0))


def bures_qfi_oracle(state: PostSelectedMeterState, epsilon=1e-3) -> float:
    """QFI from the Bures distance between rho(theta) and rho(theta + eps).

    q(eps) = 4 D_B^2 / eps^2 = 4 (2 - 2 sqrt F) / eps^2 is biased at O(eps);
    the estimate 2 q(eps / 2) - q(eps) removes that term.
    """
    if not 1e-5 <= epsilon <= 1e-3:
        raise ValueError(f"epsilon must lie in [1e-5, 1e-3], got {epsilon!r}")
    base = spectrum(discretize(state))

    def q(eps):
        shifted = spectrum(discretize(state.with_theta(state.theta + eps)))
        root_f = fidelity_sqrt_from_spectra(base, shifted)
        return 8.0 * (1.0 - root_f) / eps**2

    return 2.0 * q(0.5 * epsilon) - q(epsilon)


class FlatMomentumResult(NamedTuple):
    qfi: float
    excluded_mass: float
    grid: MomentumGrid


def flat_momentum_model(theta, ctx, p_max, n_points=None) -> FlatMomentumResult:
    """Flat-momentum (infinite temperature) model on [-p_max, p_max].

    rho(p) = |K(p)|^2 / N is diagonal, so L = (d rho / d theta) / rho and
    I = int rho L^2 dp.  Grid points within one spacing of a zero of |K|^2
    are excluded; the probability they carry is returned.
    """
    if p_max <= 0:
        raise ValueError(f"p_max must be positive, got {p_max!r}")
    if theta == 0:
        raise ValueError("theta must be nonzero")
    if n_points is None:
        # 64 samples per period of |K|^2, never fewer than 4096
        n_points = max(4096, math.ceil(2.0 * p_max * abs(theta) / math.pi * 64) + 1)
        n_points += n_points % 2
    grid = MomentumGrid(p_max, n_points)
    p = grid.points
    a_w = weak_value(ctx)
    a2 = weak_value_abs_sq(ctx)
    s2, c2 = np.sin(2.0 * theta * p), np.cos(2.0 * theta * p)
    s, c = np.sin(theta * p), np.cos(theta * p)
    k2 = c * c + 2.0 * a_w.imag * s * c + a2 * s * s
    dk2 = p * ((a2 - 1.0) * s2 + 2.0 * a_w.imag * c2)
    norm = grid.integrate(k2)
    dnorm = grid.integrate(dk2)
    rho = k2 / norm
    drho = dk2 / norm - k2 * dnorm / norm**2

    zeros = np.nonzero(k2 < 1e-12 * k2.max())[0]
    mask = np.ones(len(p), dtype=bool)
    for idx in zeros:
        mask[max(idx - 1, 0) : idx + 2] = False
    excluded = grid.integrate(np.where(mask, 0.0, rho))
    integrand = np.where(mask, drho**2 / np.where(mask, rho, 1.0), 0.0)
    if excluded:
        log.debug("flat-momentum model excluded probability %.3e", excluded)
    return FlatMomentumResult(grid.integrate(integrand), excluded, grid)


def appendix_b_qfi(theta, ctx, p_max, n_points=None) -> float:
    """QFI of the flat-momentum model; grows like 4 p_max^2 / 3."""
    return flat_momentum_model(theta, ctx, p_max, n_points).qfi


def grid_purity(probe, grid: Optional[MomentumGrid] = None) -> float:
    """Tr[rho^2] of the discretized thermal probe, sum_i d_i^2 = ||rho||_F^2 / Tr[rho]^2."""
    if grid is None:
        grid = MomentumGrid.for_probe(probe)
    p = grid.points
    sw = np.sqrt(grid.weights)
    rho = density_kernel_p(probe, p[:, None], p[None, :]) * sw[:, None] * sw[None, :]
    trace = float(np.trace(rho).real)
    return float(np.sum(np.abs(rho) ** 2)) / trace**2
