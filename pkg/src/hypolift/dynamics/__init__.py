"""Trajectory simulation: exact OU transitions, splitting integrators, PDMPs and ensembles."""

from .ensemble import DEFAULT_SCHEME, SCHEMES, Ensemble, SchemeSpec, run_ensemble, sample_invariant
from .ou import exact_ou_step, ou_transition, van_loan
from .pdmp import (
    PDMPTrajectory,
    hamiltonian_flow,
    lipschitz_envelope,
    quadratic_flip_time,
    simulate_rhmc,
    simulate_zigzag,
)
from .splitting import step_ald, step_baoab, step_euler_maruyama, step_gle_splitting
from .streams import TrajectoryStreams, trajectory_generator
