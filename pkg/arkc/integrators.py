"""
One-step maps of the stabilized Chebyshev schemes over a split right-hand side
y' = F_D(y) + F_A(y), and a fixed-step loop.

    cheb1 - first-order Chebyshev scheme on f = F_D + F_A           (s evals of f)
    rkc   - damped second-order RKC on f = F_D + F_A                 (s evals of f)
    ad1   - first-order scheme with a single F_A evaluation          (s F_D, 1 F_A)
    arkc  - second-order scheme treating F_A through the correction G (s+2 F_D, 3 F_A)

Stages are advanced in increment form around the recurrence base (K_0 or K_{j-2}),
so a zero vector field returns y0 bit for bit. Three rotating buffers of the
workspace hold K_{j-2}, K_{j-1} and K_j.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from arkc.coeffs import ArkcCoefficients, Cheb1Coefficients, arkc_coefficients, cheb1_coefficients
from arkc.constants import SolverConstants
from arkc.exceptions import DivergenceError, InvalidParameterError, validate_positive
from arkc.utilities.step_tracker import StepRecord

logger = logging.getLogger(__name__)

VectorField = Callable[[np.ndarray], np.ndarray]
RadiusHint = Callable[[np.ndarray], float]


class Scheme(str, Enum):
    """Available one-step maps"""
    CHEB1 = "cheb1"
    RKC = "rkc"
    AD1 = "ad1"
    ARKC = "arkc"

    @property
    def first_order(self) -> bool:
        return self in (Scheme.CHEB1, Scheme.AD1)

    @property
    def default_eta(self) -> float:
        if self.first_order:
            return SolverConstants.DEFAULT_ETA_FIRST_ORDER
        return SolverConstants.DEFAULT_ETA_SECOND_ORDER


@dataclass
class SplitOdeProblem:
    """
    Autonomous system y' = F_D(y) + F_A(y).

    f_advection_reaction=None means F_A is identically zero; the ARKC error
    estimator then drops its advection weight and no F_A evaluation is charged.
    """
    dimension: int
    f_diffusion: VectorField
    f_advection_reaction: Optional[VectorField] = None
    rho_diffusion_hint: Optional[RadiusHint] = None
    rho_advection_hint: Optional[RadiusHint] = None
    linear: bool = False
    name: str = "problem"
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.dimension, bool) or int(self.dimension) != self.dimension or self.dimension < 1:
            raise InvalidParameterError("dimension", self.dimension, "must be a positive integer")
        self.dimension = int(self.dimension)

    @property
    def has_advection_reaction(self) -> bool:
        return self.f_advection_reaction is not None

    def rhs(self, y: np.ndarray) -> np.ndarray:
        """Full right-hand side F_D + F_A (not charged to any counter)"""
        value = np.asarray(self.f_diffusion(y), dtype=float)
        if self.f_advection_reaction is not None:
            value = value + np.asarray(self.f_advection_reaction(y), dtype=float)
        return value


@dataclass
class EvalCounters:
    fd_evals: int = 0
    fa_evals: int = 0

    def reset(self) -> None:
        self.fd_evals = 0
        self.fa_evals = 0


class StepWorkspace:
    """
    Scratch storage and evaluation counters for the one-step maps.

    k_prev2, k_prev1 and k_curr are the only state-sized buffers alive during the
    stage recurrence; g, fd_at_y0 and fd_at_k0 keep the ARKC correction and the two
    cached diffusion evaluations. One workspace per concurrent integration.
    """

    def __init__(self, dimension: int):
        self.dimension = int(dimension)
        self.k_prev2 = np.zeros(self.dimension)
        self.k_prev1 = np.zeros(self.dimension)
        self.k_curr = np.zeros(self.dimension)
        self.g = np.zeros(self.dimension)
        self.fd_at_y0 = np.zeros(self.dimension)
        self.fd_at_k0 = np.zeros(self.dimension)
        self.eval_counters = EvalCounters()

    def rotate(self) -> None:
        self.k_prev2, self.k_prev1, self.k_curr = self.k_prev1, self.k_curr, self.k_prev2

    def eval_diffusion(self, problem: SplitOdeProblem, y: np.ndarray) -> np.ndarray:
        self.eval_counters.fd_evals += 1
        return _checked_output(problem.f_diffusion(y), self.dimension, "f_diffusion")

    def eval_advection(self, problem: SplitOdeProblem, y: np.ndarray) -> np.ndarray:
        if problem.f_advection_reaction is None:
            return np.zeros(self.dimension)
        self.eval_counters.fa_evals += 1
        return _checked_output(problem.f_advection_reaction(y), self.dimension, "f_advection_reaction")

    def eval_full(self, problem: SplitOdeProblem, y: np.ndarray) -> np.ndarray:
        value = self.eval_diffusion(problem, y)
        if problem.f_advection_reaction is not None:
            value = value + self.eval_advection(problem, y)
        return value


@dataclass
class IntegrationReport:
    """Counters and final state of one integration (fixed-step or adaptive)"""
    scheme: str
    steps_accepted: int = 0
    steps_rejected: int = 0
    fd_evals: int = 0
    fa_evals: int = 0
    s_max: int = 0
    final_time: float = 0.0
    final_state: Optional[np.ndarray] = None
    final_error_vs_reference: Optional[float] = None
    trajectory_samples: Optional[List[Tuple[float, np.ndarray]]] = None
    incomplete: bool = False
    spectral_warnings: int = 0
    trace: List[StepRecord] = field(default_factory=list)
    controller: Dict[str, Any] = field(default_factory=dict)

    def summary(self) -> Dict[str, Any]:
        """Scalar fields only, in benchmark-table column order"""
        return {
            "scheme": self.scheme,
            "steps": self.steps_accepted,
            "rejected": self.steps_rejected,
            "fd_evals": self.fd_evals,
            "fa_evals": self.fa_evals,
            "s_max": self.s_max,
            "final_time": self.final_time,
            "linf_error": self.final_error_vs_reference,
            "incomplete": self.incomplete,
            "spectral_warnings": self.spectral_warnings,
        }


def _checked_output(value: Any, dimension: int, name: str) -> np.ndarray:
    value = np.asarray(value, dtype=float)
    if value.shape != (dimension,):
        raise InvalidParameterError(name, value.shape, f"must return a vector of length {dimension}")
    return value


def _as_state(y0: Union[Sequence[float], np.ndarray], dimension: int) -> np.ndarray:
    y = np.array(y0, dtype=float)
    if y.shape != (dimension,):
        raise InvalidParameterError("y0", y.shape, f"must be a vector of length {dimension}")
    return y


def _check_finite(k: np.ndarray, stage: int, scheme: Scheme) -> None:
    if not np.isfinite(k).all():
        logger.warning("Non-finite stage value", extra={
            "event": "divergence",
            "scheme": scheme.value,
            "stage": stage
        })
        raise DivergenceError(stage=stage, scheme=scheme.value)


def _first_order_stages(rhs: Callable[[np.ndarray], np.ndarray], k0: np.ndarray, k1: np.ndarray,
                        h: float, coeffs: Cheb1Coefficients, ws: StepWorkspace,
                        scheme: Scheme) -> np.ndarray:
    """K_j = K_{j-2} + mu_j h rhs(K_{j-1}) + nu_j (K_{j-1} - K_{j-2}) for j = 2..s"""
    ws.k_prev2[:] = k0
    ws.k_prev1[:] = k1
    mu, nu = coeffs.mu, coeffs.nu

    for j in range(2, coeffs.s + 1):
        f = rhs(ws.k_prev1)
        ws.k_curr[:] = ws.k_prev2 + mu[j] * h * f + nu[j] * (ws.k_prev1 - ws.k_prev2)
        _check_finite(ws.k_curr, j, scheme)
        ws.rotate()

    return ws.k_prev1.copy()


def _second_order_stages(rhs: Callable[[np.ndarray], np.ndarray], k0: np.ndarray, k1: np.ndarray,
                         fd_k0: np.ndarray, fd_y0: np.ndarray, h: float,
                         coeffs: ArkcCoefficients, ws: StepWorkspace, scheme: Scheme) -> np.ndarray:
    """
    K_j = K_0 + mu_j h (rhs(K_{j-1}) - rhs(K_0) + (1 - a_{j-1}) rhs(y0))
              + nu_j (K_{j-1} - K_0) + kappa_j (K_{j-2} - K_0)        for j = 2..s

    With K_0 = y0 this is the RKC recurrence.
    """
    ws.k_prev2[:] = k0
    ws.k_prev1[:] = k1
    a, mu, nu, kappa = coeffs.a, coeffs.mu, coeffs.nu, coeffs.kappa

    for j in range(2, coeffs.s + 1):
        f = rhs(ws.k_prev1)
        ws.k_curr[:] = (k0
                        + mu[j] * h * (f - fd_k0 + (1.0 - a[j - 1]) * fd_y0)
                        + nu[j] * (ws.k_prev1 - k0)
                        + kappa[j] * (ws.k_prev2 - k0))
        _check_finite(ws.k_curr, j, scheme)
        ws.rotate()

    return ws.k_prev1.copy()


def _prepare(problem: SplitOdeProblem, y0: np.ndarray, h: float,
             workspace: Optional[StepWorkspace]) -> Tuple[np.ndarray, float, StepWorkspace]:
    y = _as_state(y0, problem.dimension)
    h = validate_positive(h, "h")
    ws = workspace if workspace is not None else StepWorkspace(problem.dimension)
    if ws.dimension != problem.dimension:
        raise InvalidParameterError("workspace", ws.dimension, f"dimension must be {problem.dimension}")
    return y, h, ws


def _require(coeffs: Any, expected: type, scheme: Scheme) -> None:
    if not isinstance(coeffs, expected):
        raise InvalidParameterError("coeffs", type(coeffs).__name__,
                                    f"{scheme.value} needs {expected.__name__}")


def step_cheb1(problem: SplitOdeProblem, y0: np.ndarray, h: float, coeffs: Cheb1Coefficients,
               workspace: Optional[StepWorkspace] = None) -> np.ndarray:
    """First-order Chebyshev step on f = F_D + F_A; s evaluations of f"""
    _require(coeffs, Cheb1Coefficients, Scheme.CHEB1)
    y, h, ws = _prepare(problem, y0, h, workspace)

    def rhs(v):
        return ws.eval_full(problem, v)

    k1 = y + coeffs.mu[1] * h * rhs(y)
    _check_finite(k1, 1, Scheme.CHEB1)
    if coeffs.s == 1:
        return k1
    return _first_order_stages(rhs, y, k1, h, coeffs, ws, Scheme.CHEB1)


def step_rkc(problem: SplitOdeProblem, y0: np.ndarray, h: float, coeffs: ArkcCoefficients,
             workspace: Optional[StepWorkspace] = None,
             f_y0: Optional[np.ndarray] = None) -> np.ndarray:
    """Damped second-order RKC step on f = F_D + F_A; s evaluations of f (f(y0) reused)"""
    _require(coeffs, ArkcCoefficients, Scheme.RKC)
    y, h, ws = _prepare(problem, y0, h, workspace)

    def rhs(v):
        return ws.eval_full(problem, v)

    f0 = rhs(y) if f_y0 is None else f_y0
    k1 = y + coeffs.b1 * coeffs.omega2 * h * f0
    _check_finite(k1, 1, Scheme.RKC)
    return _second_order_stages(rhs, y, k1, f0, f0, h, coeffs, ws, Scheme.RKC)


def step_ad1(problem: SplitOdeProblem, y0: np.ndarray, h: float, coeffs: Cheb1Coefficients,
             workspace: Optional[StepWorkspace] = None) -> np.ndarray:
    """First-order advection-diffusion step; s F_D evaluations and one F_A evaluation"""
    _require(coeffs, Cheb1Coefficients, Scheme.AD1)
    y, h, ws = _prepare(problem, y0, h, workspace)

    def rhs(v):
        return ws.eval_diffusion(problem, v)

    if problem.has_advection_reaction:
        fa0 = ws.eval_advection(problem, y)
        k1 = y + coeffs.mu[1] * h * rhs(y + coeffs.nu1 * h * fa0) + coeffs.kappa1 * h * fa0
    else:
        k1 = y + coeffs.mu[1] * h * rhs(y)
    _check_finite(k1, 1, Scheme.AD1)
    if coeffs.s == 1:
        return k1
    return _first_order_stages(rhs, y, k1, h, coeffs, ws, Scheme.AD1)


def step_arkc(problem: SplitOdeProblem, y0: np.ndarray, h: float, coeffs: ArkcCoefficients,
              workspace: Optional[StepWorkspace] = None,
              fd_y0: Optional[np.ndarray] = None,
              fa_y0: Optional[np.ndarray] = None) -> np.ndarray:
    """
    ARKC step.

    G   = h F_A(y0 + h/2 F_A(y0 + w2/2 h F_D(y0)) + h/2 F_D(y0))
          + h F_D(y0 + (w2-1)/2 h F_A(y0)) - h F_D(y0)
    K_0 = y0 + w2/2 G
    K_1 = K_0 + b_1 w2 h F_D(y0) + alpha G

    followed by the RKC-type recurrence on F_D around K_0. F_D(y0) and F_A(y0) may be
    passed in (the adaptive driver reuses the estimator's evaluations); otherwise they
    are evaluated here, for s+2 F_D and 3 F_A evaluations in total.
    """
    _require(coeffs, ArkcCoefficients, Scheme.ARKC)
    y, h, ws = _prepare(problem, y0, h, workspace)
    w2 = coeffs.omega2

    def rhs(v):
        return ws.eval_diffusion(problem, v)

    ws.fd_at_y0[:] = rhs(y) if fd_y0 is None else fd_y0

    if problem.has_advection_reaction:
        fa0 = ws.eval_advection(problem, y) if fa_y0 is None else fa_y0
        inner = ws.eval_advection(problem, y + (w2 / 2.0) * h * ws.fd_at_y0)
        ws.g[:] = h * ws.eval_advection(problem, y + (h / 2.0) * inner + (h / 2.0) * ws.fd_at_y0)
        ws.g += h * rhs(y + ((w2 - 1.0) / 2.0) * h * fa0) - h * ws.fd_at_y0
        _check_finite(ws.g, 0, Scheme.ARKC)
        k0 = y + (w2 / 2.0) * ws.g
        ws.fd_at_k0[:] = rhs(k0)
    else:
        ws.g[:] = 0.0
        k0 = y
        ws.fd_at_k0[:] = ws.fd_at_y0

    k1 = k0 + coeffs.b1 * w2 * h * ws.fd_at_y0 + coeffs.alpha * ws.g
    _check_finite(k1, 1, Scheme.ARKC)
    return _second_order_stages(rhs, k0, k1, ws.fd_at_k0, ws.fd_at_y0, h, coeffs, ws, Scheme.ARKC)


STEPPERS = {
    Scheme.CHEB1: step_cheb1,
    Scheme.RKC: step_rkc,
    Scheme.AD1: step_ad1,
    Scheme.ARKC: step_arkc,
}


def scheme_coefficients(scheme: Union[Scheme, str], s: int,
                        eta: Optional[float] = None) -> Union[Cheb1Coefficients, ArkcCoefficients]:
    """Coefficient set matching a scheme (first-order or second-order family)"""
    scheme = Scheme(scheme)
    eta = scheme.default_eta if eta is None else eta
    if scheme.first_order:
        return cheb1_coefficients(s, eta)
    return arkc_coefficients(s, eta)


def integrate_fixed(problem: SplitOdeProblem, y0: np.ndarray, t_span: Tuple[float, float],
                    n_steps: int, scheme: Union[Scheme, str], s: int,
                    eta: Optional[float] = None, record_trajectory: bool = False) -> IntegrationReport:
    """Repeat one scheme with constant h = (t_end - t_start)/n_steps and fixed (s, eta)"""
    scheme = Scheme(scheme)
    if isinstance(n_steps, bool) or int(n_steps) != n_steps or n_steps < 1:
        raise InvalidParameterError("n_steps", n_steps, "must be an integer >= 1")
    n_steps = int(n_steps)
    t_start, t_end = float(t_span[0]), float(t_span[1])
    if not t_end > t_start:
        raise InvalidParameterError("t_span", t_span, "end must be greater than start")

    coeffs = scheme_coefficients(scheme, s, eta)
    stepper = STEPPERS[scheme]
    h = (t_end - t_start) / n_steps
    ws = StepWorkspace(problem.dimension)
    y = _as_state(y0, problem.dimension)
    samples = [(t_start, y.copy())] if record_trajectory else None

    logger.debug("Fixed-step integration started", extra={
        "event": "fixed_start",
        "scheme": scheme.value,
        "s": coeffs.s,
        "eta": coeffs.eta,
        "h": h,
        "n_steps": n_steps
    })

    for n in range(n_steps):
        try:
            y = stepper(problem, y, h, coeffs, ws)
        except DivergenceError as e:
            raise e.at_step(n) from e
        if samples is not None:
            samples.append((t_start + (n + 1) * h, y.copy()))

    return IntegrationReport(
        scheme=scheme.value,
        steps_accepted=n_steps,
        fd_evals=ws.eval_counters.fd_evals,
        fa_evals=ws.eval_counters.fa_evals,
        s_max=coeffs.s,
        final_time=t_end,
        final_state=y,
        trajectory_samples=samples,
    )
