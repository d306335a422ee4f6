"""Weak-value metrology with a thermally mixed Gaussian probe."""

from .errors import (
    ConfigError,
    DegenerateSupport,
    GridUnderresolved,
    ImaginaryDenominator,
    NonPositiveState,
    OrthogonalSelection,
    SingularCovariance,
    ThermoWeakError,
    ValidityWarning,
    ZeroPostselection,
)
from .gaussian_qfi import (
    GaussianSummary,
    gaussian_qfi,
    gaussian_summary_weak,
    qfi_no_postselection,
    qfi_ratios,
    qfi_weak_closed_form,
    wigner_weak,
)
from .grid import MomentumGrid
from .meter import (
    PostSelectedMeterState,
    compare_snr,
    momentum_moments,
    postselection_probability_allorder,
    snr_mixed_closed_form,
    snr_postselected_numeric,
    snr_pure_closed_form,
    snr_weak_limit,
)
from .numeric_qfi import (
    DiscretizedState,
    appendix_b_qfi,
    bures_qfi_oracle,
    discretize,
    effective_qfi,
    grid_purity,
    sld_qfi,
)
from .probe import ThermalGaussianProbe, density_kernel_p, density_kernel_x, purity
from .selection import SelectionContext, weak_value, weak_value_abs_sq

__version__ = "0.1.0"
