"""Hypocoercive sampling dynamics: spectra, explicit rates, simulation and decay analysis."""

from .analysis import (
    GaussianLaw,
    chi_square_norm,
    decay_curve,
    empirical_autocov,
    gaussian_moments,
    propagate_law,
    time_averaged_energy,
)
from .curves import DecayCurve, fit_exponential
from .dynamics import Ensemble, SchemeSpec, run_ensemble
from .errors import *  # noqa: F401,F403
from .model import (
    GLE,
    RHMC,
    AdaptiveLangevin,
    DriftSystem,
    GaussianTarget,
    GeneralPotential,
    KineticLangevin,
    Overdamped,
    ZigZag,
    build_drift_system,
    build_drift_systems,
    quadratic_potential,
    validate_assumptions,
)
from .rates import (
    ALDConfig,
    RateInputs,
    ald_constants,
    ald_optimal_params,
    ald_rate_bound,
    ald_theorem_rate,
    minimize_over_T,
    theorem_rate,
)
from .spectral import (
    eigenvalues,
    gle_eigenvalues_closed_form,
    normalize_drift,
    optimal_gle_params,
    optimal_langevin_friction,
    semigroup_norm,
    spectral_gap,
    spectral_report,
)

__version__ = "0.1.0"
