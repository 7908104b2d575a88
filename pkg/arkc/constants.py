"""
Solver Constants
Centralizes the fixed numbers of the stabilized schemes, the stability tooling and the CLI.
User-tunable defaults live in config.settings instead.
"""

from typing import Dict, Tuple


class SolverConstants:
    """Stage recurrence and step-control constants"""
    MIN_STAGES = 2
    STAGE_CAP = 500

    # Default damping per scheme family
    DEFAULT_ETA_FIRST_ORDER = 0.05
    DEFAULT_ETA_SECOND_ORDER = 0.15

    # rkc_stage_count: s = [sqrt((h*rho + 1.5)/0.65) + 0.5]
    STAGE_FORMULA_OFFSET = 1.5
    STAGE_FORMULA_SLOPE = 0.65

    # Predictive controller
    CONTROLLER_EXPONENT = 1.0 / 3.0
    DIVERGENCE_STEP_FACTOR = 0.5
    STAGE_CAP_STEP_MARGIN = 0.95
    MIN_RELATIVE_STEP = 1e-14

    # Nonlinear power iteration
    POWER_MAX_ITERATIONS = 50
    POWER_TOLERANCE = 0.01
    POWER_SETTLED_ITERATES = 2
    POWER_INFLATION = 1.05
    POWER_FALLBACK_INFLATION = 1.2


class StabilityConstants:
    """Stability-region scanning constants"""
    MODULUS_SLACK = 1e-9
    MIN_GRID_POINTS = 100
    DEFAULT_GRID_P = 800
    DEFAULT_GRID_Q = 400
    P_RANGE_FACTOR = 0.7
    CURVE_POINTS = 2000

    # Inscribed ellipse search
    ELLIPSE_BISECTIONS = 30
    ELLIPSE_THETA_POINTS = 256
    ELLIPSE_RADIAL_POINTS = 12
    # Right vertex of the ellipse sits at p = -ELLIPSE_ORIGIN_OFFSET, clear of the cusp at the origin
    ELLIPSE_ORIGIN_OFFSET = 0.5


class ExitCodes:
    """CLI process exit codes"""
    SUCCESS = 0
    INVALID_ARGUMENTS = 1
    NUMERICAL_FAILURE = 2
    VERIFICATION_FAILURE = 3


class LoggingConstants:
    """Logging-related constants"""
    LOG_FORMAT = '%(asctime)s | %(levelname)-8s | %(name)s - %(message)s'
    LOG_DATE_FORMAT = '%H:%M:%S'

    # Test phases for logging
    PHASE_SETUP = "SETUP"
    PHASE_EXECUTION = "EXECUTION"
    PHASE_TEARDOWN = "TEARDOWN"

    STATUS_SUCCESS = "SUCCESS"
    STATUS_FAILURE = "FAILURE"
    STATUS_SKIPPED = "SKIPPED"


class FileConstants:
    """File and directory constants"""
    LOGS_DIR = "tests/logs"
    LOG_FILE_PREFIX = "test_run_"
    TIMESTAMP_FORMAT = "%Y%m%d_%H%M%S"


class ReportColumns:
    """Column layouts of the CSV artifacts"""
    TABLE2 = ["a", "tol", "steps", "fd_evals", "fa_evals", "s_max", "linf_error", "status", "within_bands"]
    COST_CURVE = ["tol", "linf_error", "steps", "fd_evals", "fa_evals"]
    CONVERGENCE = ["n_steps", "h", "stages", "eta", "linf_error"]
    STABILITY = ["p", "q", "modulus"]
    PROFILE = ["x", "u"]
    TRAJECTORY = ["t", "x", "u"]
    PECLET = ["t", "peclet"]
    VERIFY = ["band", "s_max", "eta", "c", "max_modulus", "passed"]

    TABLE2_PROVENANCE = ("ARKC columns only; PRKC and PIROCK comparison columns "
                         "are out of scope and not reproduced")


class PublishedBenchmarks:
    """Published ARKC counters for the periodic advection-diffusion problem (N=150, t_end=1/2)"""

    # (a, tol) -> (steps, fd_evals, fa_evals, s_max, linf_error)
    TABLE2_ARKC: Dict[Tuple[float, float], Tuple[int, int, int, int, float]] = {
        (0.1, 1e-2): (14, 886, 42, 145, 4.3e-4),
        (0.1, 1e-5): (79, 2098, 237, 97, 3.3e-7),
        (0.5, 1e-2): (13, 909, 39, 142, 2.5e-4),
        (0.5, 1e-5): (79, 2132, 237, 117, 2.2e-7),
        (1.0, 1e-2): (11, 896, 33, 194, 2e-4),
        (1.0, 1e-5): (74, 2104, 222, 153, 3.6e-7),
        (2.0, 1e-2): (10, 995, 30, 228, 4.8e-5),
        (2.0, 1e-5): (56, 2267, 168, 172, 1.8e-7),
        (5.0, 1e-2): (12, 1272, 36, 237, 1.9e-6),
        (5.0, 1e-5): (59, 2764, 177, 184, 2.9e-8),
        (10.0, 1e-2): (15, 1359, 45, 234, 5.4e-6),
        (10.0, 1e-5): (84, 3207, 252, 160, 7.3e-8),
        (12.0, 1e-2): (18, 1557, 54, 196, 3.5e-5),
        (12.0, 1e-5): (104, 3593, 312, 150, 4.3e-7),
    }

    TABLE2_A_VALUES = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 12.0]
    TABLE2_TOLERANCES = [1e-2, 1e-5]

    STEPS_BAND = 0.25
    EVALS_BAND = 0.30
    ERROR_FACTOR = 10.0

    COST_CURVE_TOLERANCES = [10.0 ** -r for r in range(1, 7)]

    # Inscribed-ellipse annotations at s=20: eta -> (d_s / s^2, a_s / s)
    ELLIPSE_METRICS = {
        0.15: (0.65, 0.17),
        1.5: (0.56, 0.35),
        3.0: (0.5, 0.5),
        10.0: (0.35, 0.9),
    }
