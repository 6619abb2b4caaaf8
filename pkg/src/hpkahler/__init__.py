"""Numerical verification of holomorphically pseudosymmetric Kahler metrics
on CP^n built from polynomial profiles."""

__version__ = "0.1.0"

from .profile import (  # noqa: F401
    ODETolerances,
    Profile,
    ProfileError,
    ProfileSolution,
    boundary_report,
    eval_f,
    eval_phi,
    p_alpha,
    phi_minimum,
    solve_profile,
    validate_profile,
)
from .verifier import VerificationConfig, VerificationReport, run_verification, sweep  # noqa: F401
