"""
Adaptive ARKC driver: spectral radius estimation, embedded error estimate,
predictive step-size control and the accept/reject loop.

Per attempted step the driver
    1. refreshes rho_D, rho_A when due (once for linear problems),
    2. picks (s, eta) from the damping table for rho_A/sqrt(rho_D),
    3. takes one ARKC step reusing F_D(y_n), F_A(y_n),
    4. evaluates F_D, F_A at y_{n+1} for the error estimate (reused by the next step),
    5. accepts iff the weighted RMS norm of the estimate is <= 1 and proposes the next h.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from arkc.coeffs import ArkcCoefficients, arkc_coefficients, cheb1_coefficients
from arkc.constants import SolverConstants
from arkc.damping import ARKC_DAMPING, DampingTable, max_step_at_cap, select_stages
from arkc.exceptions import (
    DivergenceError,
    InvalidParameterError,
    StageCapExceededError,
    StepSizeUnderflowError,
    validate_tolerance,
)
from arkc.integrators import IntegrationReport, Scheme, SplitOdeProblem, StepWorkspace, _as_state, step_arkc
from arkc.utilities.step_tracker import StepTracker
from config.settings import settings

logger = logging.getLogger(__name__)

ErrorHook = Callable[[int, float], float]


class AdaptiveConfig(BaseModel):
    """Tolerances, time span and controller constants of one adaptive run"""
    model_config = ConfigDict(frozen=True)

    atol: float
    rtol: float
    t_span: Tuple[float, float]
    h_init: float = settings.INITIAL_STEP
    max_steps: int = settings.MAX_STEPS
    safety: float = settings.SAFETY_FACTOR
    min_factor: float = settings.MIN_STEP_FACTOR
    max_factor: float = settings.MAX_STEP_FACTOR
    spectral_refresh_interval: int = settings.SPECTRAL_REFRESH_INTERVAL
    seed: int = settings.DEFAULT_SEED

    @field_validator("atol", "rtol", "h_init", "safety")
    @classmethod
    def _positive(cls, value: float) -> float:
        if not math.isfinite(value) or value <= 0.0:
            raise ValueError("must be finite and > 0")
        return value

    @field_validator("max_steps", "spectral_refresh_interval")
    @classmethod
    def _at_least_one(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be >= 1")
        return value

    @model_validator(mode="after")
    def _check_ranges(self) -> "AdaptiveConfig":
        t_start, t_end = self.t_span
        if not (math.isfinite(t_start) and math.isfinite(t_end)) or t_end <= t_start:
            raise ValueError("t_span end must be greater than start")
        if not 0.0 < self.min_factor <= 1.0 <= self.max_factor:
            raise ValueError("step factors must satisfy 0 < min_factor <= 1 <= max_factor")
        return self

    @classmethod
    def from_tolerance(cls, tol: float, t_span: Tuple[float, float], **overrides) -> "AdaptiveConfig":
        """Atol = Rtol = tol, mapping validation failures to InvalidParameterError"""
        tol = validate_tolerance(tol)
        try:
            return cls(atol=tol, rtol=tol, t_span=t_span, **overrides)
        except ValidationError as e:
            first = e.errors()[0]
            field = ".".join(str(part) for part in first["loc"]) or "config"
            raise InvalidParameterError(field, first.get("input"), first["msg"]) from e


@dataclass
class ErrorEstimatorState:
    """Weights and controller memory of the embedded error estimate"""
    zeta: float
    atol: float
    rtol: float
    c1: float = 0.0
    c2: float = 0.0
    big_c: float = 1.0 / 6.0
    prev_err_norm: Optional[float] = None
    prev_h: Optional[float] = None
    after_rejection: bool = False

    @classmethod
    def for_problem(cls, problem: SplitOdeProblem, atol: float, rtol: float) -> "ErrorEstimatorState":
        return cls(zeta=1.0 if problem.has_advection_reaction else 0.0, atol=atol, rtol=rtol)

    def update_coefficients(self, coeffs: ArkcCoefficients) -> None:
        """C = 1/6 - c2 + (1/2 - c1)*zeta - zeta/6 for the current (s, eta)"""
        self.c1 = coeffs.c1
        self.c2 = coeffs.c2
        self.big_c = 1.0 / 6.0 - self.c2 + (0.5 - self.c1) * self.zeta - self.zeta / 6.0

    def clear_history(self) -> None:
        self.prev_err_norm = None
        self.prev_h = None


@dataclass
class ErrorEstimate:
    err_norm: float
    fd_next: Optional[np.ndarray]
    fa_next: Optional[np.ndarray]


@dataclass
class SpectralRadiusEstimate:
    rho: float
    eigvec: Optional[np.ndarray]
    converged: bool = True
    iterations: int = 0
    from_hint: bool = False


def weighted_rms_norm(error: np.ndarray, y_prev: np.ndarray, y_next: np.ndarray,
                      atol: float, rtol: float) -> float:
    """sqrt(mean((e_i / (atol + rtol*max(|y_prev_i|, |y_next_i|)))^2))"""
    weights = atol + rtol * np.maximum(np.abs(y_prev), np.abs(y_next))
    return float(np.sqrt(np.mean((error / weights) ** 2)))


def estimate_error(y_prev: np.ndarray, y_next: np.ndarray, h: float, problem: SplitOdeProblem,
                   state: ErrorEstimatorState, fd_prev: Optional[np.ndarray] = None,
                   fa_prev: Optional[np.ndarray] = None,
                   workspace: Optional[StepWorkspace] = None) -> ErrorEstimate:
    """
    Est = C*(12(y_n - y_{n+1}) + 6h(F_D(y_n) + F_A(y_n) + F_D(y_{n+1}) + F_A(y_{n+1}))).

    F_D and F_A at y_prev are evaluated only when not supplied; the evaluations at
    y_next are charged to the workspace counters and returned for reuse. A non-finite
    estimate is reported as err_norm = inf.
    """
    ws = workspace if workspace is not None else StepWorkspace(problem.dimension)
    if fd_prev is None:
        fd_prev = ws.eval_diffusion(problem, y_prev)
    if fa_prev is None and problem.has_advection_reaction:
        fa_prev = ws.eval_advection(problem, y_prev)

    fd_next = ws.eval_diffusion(problem, y_next)
    slopes = fd_prev + fd_next
    fa_next = None
    if problem.has_advection_reaction:
        fa_next = ws.eval_advection(problem, y_next)
        slopes = slopes + fa_prev + fa_next

    with np.errstate(over="ignore", invalid="ignore"):
        est = state.big_c * (12.0 * (y_prev - y_next) + 6.0 * h * slopes)
        err_norm = weighted_rms_norm(est, y_prev, y_next, state.atol, state.rtol)
    if not math.isfinite(err_norm):
        err_norm = math.inf
    return ErrorEstimate(err_norm=err_norm, fd_next=fd_next, fa_next=fa_next)


def propose_step(err_norm: float, h: float, state: ErrorEstimatorState,
                 safety: float = settings.SAFETY_FACTOR,
                 min_factor: float = settings.MIN_STEP_FACTOR,
                 max_factor: float = settings.MAX_STEP_FACTOR) -> float:
    """
    Next step size after an attempt with weighted error norm err_norm (accepted iff <= 1).

    Accepted:  fac = safety*err^(-1/3), reduced to
               safety*err^(-1/3)*(prev_err/err)^(1/3)*(h/prev_h) when that is smaller
               and a previous accepted step exists; clamped to [min_factor, max_factor];
               no growth on the first acceptance after a rejection.
    Rejected:  fac = max(min_factor, safety*err^(-1/3)); the history is dropped.

    The predictive factor only ever shortens a step, as in the RKC controller, and
    is not used on its own.
    """
    if math.isnan(err_norm) or err_norm < 0.0:
        raise InvalidParameterError("err_norm", err_norm, "must be >= 0")
    exponent = SolverConstants.CONTROLLER_EXPONENT

    if err_norm > 1.0:
        fac = 0.0 if math.isinf(err_norm) else safety * err_norm ** -exponent
        state.clear_history()
        state.after_rejection = True
        return h * max(min_factor, fac)

    if err_norm == 0.0:
        fac = max_factor
    else:
        fac = safety * err_norm ** -exponent
        if state.prev_err_norm is not None and state.prev_h is not None and state.prev_err_norm > 0.0:
            predictive = fac * (state.prev_err_norm / err_norm) ** exponent * (h / state.prev_h)
            fac = min(fac, predictive)
    fac = min(max_factor, max(min_factor, fac))
    if state.after_rejection:
        fac = min(fac, 1.0)

    state.prev_err_norm = err_norm
    state.prev_h = h
    state.after_rejection = False
    return h * fac


def estimate_spectral_radius(problem: SplitOdeProblem, y: np.ndarray,
                             which: Literal["diffusion", "advection"],
                             previous_eigvec: Optional[np.ndarray] = None,
                             seed: Optional[int] = None) -> SpectralRadiusEstimate:
    """
    Spectral radius of the Jacobian of F_D or F_A at y.

    Uses the problem's hint when present. Otherwise runs a nonlinear power iteration
    on the difference quotient ||F(y + dv) - F(y)||/||dv||, started from the previous
    eigenvector when given and from F(y) otherwise. It stops once the estimate has
    changed by at most 1% on two consecutive iterations; the converged value is inflated
    by 1.05, a non-converged one by 1.2 and flagged.
    """
    if which == "diffusion":
        field, hint = problem.f_diffusion, problem.rho_diffusion_hint
    elif which == "advection":
        field, hint = problem.f_advection_reaction, problem.rho_advection_hint
    else:
        raise InvalidParameterError("which", which, "must be 'diffusion' or 'advection'")

    y = _as_state(y, problem.dimension)
    if not np.isfinite(y).all():
        raise InvalidParameterError("y", "non-finite", "spectral radius needs a finite state")
    if field is None:
        return SpectralRadiusEstimate(rho=0.0, eigvec=None, from_hint=True)
    if hint is not None:
        return SpectralRadiusEstimate(rho=float(hint(y)), eigvec=None, from_hint=True)

    return _power_iteration(field, y, previous_eigvec, settings.DEFAULT_SEED if seed is None else seed)


def _power_iteration(field: Callable[[np.ndarray], np.ndarray], y: np.ndarray,
                     previous_eigvec: Optional[np.ndarray], seed: int) -> SpectralRadiusEstimate:
    sqrt_eps = math.sqrt(np.finfo(float).eps)
    y_norm = float(np.linalg.norm(y))
    dynrm = sqrt_eps * y_norm if y_norm > 0.0 else sqrt_eps

    f_y = np.asarray(field(y), dtype=float)
    if previous_eigvec is not None and np.linalg.norm(previous_eigvec) > 0.0:
        direction = np.array(previous_eigvec, dtype=float)
    elif np.linalg.norm(f_y) > 0.0:
        direction = f_y.copy()
    else:
        direction = np.random.default_rng(seed).standard_normal(y.shape[0])

    sigma = 0.0
    settled = 0
    for iteration in range(1, SolverConstants.POWER_MAX_ITERATIONS + 1):
        v = y + dynrm * direction / np.linalg.norm(direction)
        difference = np.asarray(field(v), dtype=float) - f_y
        diff_norm = float(np.linalg.norm(difference))
        if diff_norm == 0.0:
            # direction lies in the null space of the Jacobian
            return SpectralRadiusEstimate(rho=0.0, eigvec=direction, converged=True, iterations=iteration)

        sigma_prev, sigma = sigma, diff_norm / dynrm
        direction = difference
        small_change = iteration > 1 and abs(sigma - sigma_prev) <= SolverConstants.POWER_TOLERANCE * sigma
        settled = settled + 1 if small_change else 0
        if settled >= SolverConstants.POWER_SETTLED_ITERATES:
            return SpectralRadiusEstimate(rho=SolverConstants.POWER_INFLATION * sigma,
                                          eigvec=direction / diff_norm, converged=True,
                                          iterations=iteration)

    logger.warning("Power iteration did not converge", extra={
        "event": "power_iteration_unconverged",
        "sigma": sigma,
        "iterations": SolverConstants.POWER_MAX_ITERATIONS
    })
    return SpectralRadiusEstimate(rho=SolverConstants.POWER_FALLBACK_INFLATION * sigma,
                                  eigvec=direction / np.linalg.norm(direction), converged=False,
                                  iterations=SolverConstants.POWER_MAX_ITERATIONS)


def rho_ratio(rho_d: float, rho_a: float) -> float:
    """rho_A / sqrt(rho_D); 0 without advection, inf for advection over zero diffusion"""
    if rho_a <= 0.0:
        return 0.0
    if rho_d <= 0.0:
        return math.inf
    return rho_a / math.sqrt(rho_d)


def integrate_adaptive(problem: SplitOdeProblem, y0: np.ndarray, config: AdaptiveConfig,
                       damping_table: DampingTable = ARKC_DAMPING,
                       error_hook: Optional[ErrorHook] = None,
                       record_trajectory: bool = False,
                       reference: Optional[np.ndarray] = None) -> IntegrationReport:
    """
    Integrate problem over config.t_span with the adaptive ARKC driver.

    error_hook(attempt, err_norm) may replace the estimated norm before the
    accept/reject decision. With a reference state the report carries the final
    L-infinity error against it. Exhausting max_steps returns an incomplete report.

    Raises:
        StepSizeUnderflowError: If h falls below the time resolution at t
    """
    t, t_end = float(config.t_span[0]), float(config.t_span[1])
    y = _as_state(y0, problem.dimension)
    ws = StepWorkspace(problem.dimension)
    tracker = StepTracker(problem.name)
    state = ErrorEstimatorState.for_problem(problem, config.atol, config.rtol)

    fd_y = ws.eval_diffusion(problem, y)
    fa_y = ws.eval_advection(problem, y) if problem.has_advection_reaction else None

    samples = [(t, y.copy())] if record_trajectory else None
    h = min(config.h_init, t_end - t)
    rho_d = rho_a = 0.0
    ratio = 0.0
    eigvec_d = eigvec_a = None
    refresh_due, in_retry = True, False
    accepted_since_refresh = 0
    spectral_warnings = 0
    s_max = 0
    incomplete = False

    logger.info(f"Adaptive integration of {problem.name} started", extra={
        "event": "adaptive_start",
        "problem": problem.name,
        "atol": config.atol,
        "rtol": config.rtol,
        "t_span": [t, t_end]
    })

    while t < t_end:
        if len(tracker.records) >= config.max_steps:
            incomplete = True
            logger.warning("Step budget exhausted before t_end", extra={
                "event": "max_steps",
                "t": t,
                "max_steps": config.max_steps
            })
            break

        if refresh_due:
            estimate_d = estimate_spectral_radius(problem, y, "diffusion", eigvec_d, config.seed)
            estimate_a = estimate_spectral_radius(problem, y, "advection", eigvec_a, config.seed)
            rho_d, eigvec_d = estimate_d.rho, estimate_d.eigvec
            rho_a, eigvec_a = estimate_a.rho, estimate_a.eigvec
            spectral_warnings += (not estimate_d.converged) + (not estimate_a.converged)
            accepted_since_refresh = 0
            refresh_due = False
            logger.debug("Spectral radii refreshed", extra={
                "event": "spectral_refresh",
                "t": t,
                "rho_d": rho_d,
                "rho_a": rho_a
            })
        if not in_retry:
            ratio = rho_ratio(rho_d, rho_a)

        last_step = h >= t_end - t
        if last_step:
            h = t_end - t
        if h <= SolverConstants.MIN_RELATIVE_STEP * max(abs(t), abs(t_end)):
            raise StepSizeUnderflowError(t=t, h=h)

        try:
            s, eta = select_stages(h, rho_d, ratio, damping_table)
        except StageCapExceededError:
            h = max_step_at_cap(rho_d, ratio, damping_table)
            last_step = False
            logger.warning("Step reduced to respect the stage cap", extra={
                "event": "stage_cap_reduction",
                "t": t,
                "h": h
            })
            s, eta = select_stages(h, rho_d, ratio, damping_table)

        coeffs = arkc_coefficients(s, eta)
        state.update_coefficients(coeffs)
        attempt = len(tracker.records)

        try:
            y_new = step_arkc(problem, y, h, coeffs, ws, fd_y0=fd_y, fa_y0=fa_y)
        except DivergenceError as e:
            tracker.record_attempt(t, h, s, eta, math.inf, False, rho_d, rho_a, reason="divergence")
            logger.warning("Step diverged, halving h", extra={
                "event": "step_diverged",
                "t": t,
                "h": h,
                "stage": e.stage
            })
            h *= SolverConstants.DIVERGENCE_STEP_FACTOR
            state.clear_history()
            state.after_rejection = True
            in_retry = True
            refresh_due = not problem.linear
            continue

        estimate = estimate_error(y, y_new, h, problem, state, fd_y, fa_y, ws)
        err_norm = estimate.err_norm
        if error_hook is not None:
            err_norm = float(error_hook(attempt, err_norm))

        accepted = err_norm <= 1.0
        tracker.record_attempt(t, h, s, eta, err_norm, accepted, rho_d, rho_a,
                               reason="" if accepted else "error")
        logger.debug("Step accepted" if accepted else "Step rejected", extra={
            "event": "step_accepted" if accepted else "step_rejected",
            "t": t,
            "h": h,
            "s": s,
            "eta": eta,
            "err_norm": err_norm
        })

        h_next = propose_step(err_norm, h, state, config.safety, config.min_factor, config.max_factor)
        if accepted:
            t = t_end if last_step else t + h
            y = y_new
            fd_y, fa_y = estimate.fd_next, estimate.fa_next
            s_max = max(s_max, s)
            in_retry = False
            accepted_since_refresh += 1
            if not problem.linear and accepted_since_refresh >= config.spectral_refresh_interval:
                refresh_due = True
            if samples is not None:
                samples.append((t, y.copy()))
        else:
            in_retry = True
            refresh_due = not problem.linear
        h = h_next

    report = IntegrationReport(
        scheme=Scheme.ARKC.value,
        steps_accepted=tracker.accepted,
        steps_rejected=tracker.rejected,
        fd_evals=ws.eval_counters.fd_evals,
        fa_evals=ws.eval_counters.fa_evals,
        s_max=s_max,
        final_time=t,
        final_state=y,
        trajectory_samples=samples,
        incomplete=incomplete,
        spectral_warnings=spectral_warnings,
        trace=list(tracker.records),
        controller=tracker.get_metrics(),
    )
    if reference is not None:
        report.final_error_vs_reference = float(np.max(np.abs(y - np.asarray(reference, dtype=float))))

    logger.info(f"Adaptive integration finished: {tracker.get_summary()}", extra={
        "event": "adaptive_finished",
        **report.summary(),
        "controller": report.controller
    })
    return report


def select_fixed_stages(problem: SplitOdeProblem, y0: np.ndarray, h: float, scheme: Scheme,
                        damping_table: DampingTable = ARKC_DAMPING) -> Tuple[int, float]:
    """
    (s, eta) for a constant-step run of `scheme` with step h, from the spectral radii at y0.

    Second-order schemes use the damping table; first-order ones keep eta = 0.05 and take
    the smallest s whose real stability interval covers h*rho_D.
    """
    scheme = Scheme(scheme)
    rho_d = estimate_spectral_radius(problem, y0, "diffusion").rho
    rho_a = estimate_spectral_radius(problem, y0, "advection").rho
    if not scheme.first_order:
        return select_stages(h, rho_d, rho_ratio(rho_d, rho_a), damping_table)

    eta = scheme.default_eta
    h_times_rho = h * rho_d
    for s in range(1, SolverConstants.STAGE_CAP + 1):
        if cheb1_coefficients(s, eta).real_stability_length > h_times_rho:
            return s, eta
    raise StageCapExceededError(h_times_rho=h_times_rho, cap=SolverConstants.STAGE_CAP)
