"""
Stabilized explicit Runge-Kutta-Chebyshev integrators for stiff advection-diffusion-reaction
systems, with adaptive damping, stability-region tooling and PDE benchmarks.
"""

from arkc.adaptive import (
    AdaptiveConfig,
    estimate_error,
    estimate_spectral_radius,
    integrate_adaptive,
    propose_step,
    select_fixed_stages,
)
from arkc.coeffs import arkc_coefficients, cheb1_coefficients, order_condition_values, rkc_stage_count
from arkc.damping import ARKC_DAMPING, FIXED_RKC_DAMPING, DampingTable, select_damping, select_stages
from arkc.exceptions import (
    DivergenceError,
    InvalidParameterError,
    ReferenceUnattainableError,
    StabilizedSolverError,
    StageCapExceededError,
    StepSizeUnderflowError,
    VerificationError,
)
from arkc.integrators import (
    IntegrationReport,
    Scheme,
    SplitOdeProblem,
    integrate_fixed,
    step_ad1,
    step_arkc,
    step_cheb1,
    step_rkc,
)
from arkc.problems import build_burgers, build_linear_ad, reference_solution, reference_trajectory
from arkc.stability import eval_R1, eval_R2, scan_region, verify_all_tables, verify_table_entry

__version__ = "1.0.0"

__all__ = [
    "ARKC_DAMPING",
    "AdaptiveConfig",
    "DampingTable",
    "DivergenceError",
    "FIXED_RKC_DAMPING",
    "IntegrationReport",
    "InvalidParameterError",
    "ReferenceUnattainableError",
    "Scheme",
    "SplitOdeProblem",
    "StabilizedSolverError",
    "StageCapExceededError",
    "StepSizeUnderflowError",
    "VerificationError",
    "arkc_coefficients",
    "build_burgers",
    "build_linear_ad",
    "cheb1_coefficients",
    "estimate_error",
    "estimate_spectral_radius",
    "eval_R1",
    "eval_R2",
    "integrate_adaptive",
    "integrate_fixed",
    "order_condition_values",
    "propose_step",
    "reference_solution",
    "reference_trajectory",
    "rkc_stage_count",
    "scan_region",
    "select_damping",
    "select_fixed_stages",
    "select_stages",
    "step_ad1",
    "step_arkc",
    "step_cheb1",
    "step_rkc",
    "verify_all_tables",
    "verify_table_entry",
]
