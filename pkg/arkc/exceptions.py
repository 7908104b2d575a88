"""
Custom Exceptions for the ARKC stabilized integrator library
Provides specific exception types for better error handling and debugging.
"""

import math
import numbers
from typing import Any, Optional, Dict, List


class StabilizedSolverError(Exception):
    """Base exception for stabilized-integrator errors"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def __str__(self) -> str:
        if self.details:
            detail_str = ", ".join(f"{k}={v}" for k, v in self.details.items())
            return f"{self.message} (Details: {detail_str})"
        return self.message


class InvalidParameterError(StabilizedSolverError):
    """Raised when an operation receives an argument outside its domain"""

    def __init__(self, parameter: str, value: Any, reason: str):
        self.parameter = parameter
        self.value = value
        self.reason = reason
        message = f"Invalid value for '{parameter}': {reason}"
        super().__init__(message, {
            "parameter": parameter,
            "value": value,
            "reason": reason
        })


class DivergenceError(StabilizedSolverError):
    """Raised when a stage of a one-step map produces a non-finite component"""

    def __init__(self, stage: int, step_index: Optional[int] = None, scheme: str = ""):
        self.stage = stage
        self.step_index = step_index
        self.scheme = scheme
        message = f"divergence detected at stage {stage}"
        if step_index is not None:
            message += f" of step {step_index}"
        super().__init__(message, {
            "stage": stage,
            "step_index": step_index,
            "scheme": scheme
        })

    def at_step(self, step_index: int) -> "DivergenceError":
        """Return a copy tagged with the step index of the enclosing loop"""
        return DivergenceError(self.stage, step_index, self.scheme)


class StageCapExceededError(StabilizedSolverError):
    """Raised when no stage count up to the cap covers the requested stability interval"""

    def __init__(self, h_times_rho: float, cap: int, s: Optional[int] = None):
        self.h_times_rho = h_times_rho
        self.cap = cap
        self.s = s
        if s is not None:
            message = f"stage cap exceeded: s={s} is above the cap of {cap}"
        else:
            message = f"stage cap exceeded: h*rho={h_times_rho:.6g} is not covered with s <= {cap}"
        super().__init__(message, {
            "h_times_rho": h_times_rho,
            "cap": cap,
            "s": s
        })


class StepSizeUnderflowError(StabilizedSolverError):
    """Raised when the adaptive step size collapses below the time resolution"""

    def __init__(self, t: float, h: float):
        self.t = t
        self.h = h
        message = f"step size {h:.3e} underflows at t={t:.6g}"
        super().__init__(message, {"t": t, "h": h})


class ReferenceUnattainableError(StabilizedSolverError):
    """Raised when the high-accuracy reference solve cannot finish"""

    def __init__(self, reason: str, evals: Optional[int] = None):
        self.reason = reason
        self.evals = evals
        message = f"reference unattainable at this stiffness: {reason}"
        super().__init__(message, {"reason": reason, "evals": evals})


class VerificationError(StabilizedSolverError):
    """Raised when one or more damping-table entries fail their stability check"""

    def __init__(self, failures: List[Dict[str, Any]]):
        self.failures = failures
        message = f"{len(failures)} damping-table entries failed verification"
        super().__init__(message, {"failed_entries": len(failures)})


def validate_stage_count(s: Any, minimum: int = 1, cap: Optional[int] = None) -> int:
    """
    Validate a stage count

    Args:
        s: Stage count to validate
        minimum: Smallest admissible value
        cap: Largest admissible value (StageCapExceededError above it)

    Returns:
        The stage count as int

    Raises:
        InvalidParameterError: If s is not an integer or below the minimum
        StageCapExceededError: If s is above the cap
    """
    if isinstance(s, bool) or not isinstance(s, numbers.Integral):
        raise InvalidParameterError("s", s, "must be an integer")

    s = int(s)
    if s < minimum:
        raise InvalidParameterError("s", s, f"must be >= {minimum}")
    if cap is not None and s > cap:
        raise StageCapExceededError(h_times_rho=float("nan"), cap=cap, s=s)
    return s


def validate_damping(eta: Any) -> float:
    """Validate a damping parameter (finite, strictly positive)"""
    try:
        eta = float(eta)
    except (TypeError, ValueError):
        raise InvalidParameterError("eta", eta, "must be a real number")

    if not math.isfinite(eta) or eta <= 0.0:
        raise InvalidParameterError("eta", eta, "must be finite and > 0")
    return eta


def validate_tolerance(tol: Any, name: str = "tol") -> float:
    """Validate a tolerance in the open interval (0, 1)"""
    try:
        tol = float(tol)
    except (TypeError, ValueError):
        raise InvalidParameterError(name, tol, "must be a real number")

    if not (0.0 < tol < 1.0):
        raise InvalidParameterError(name, tol, "must lie in (0, 1)")
    return tol


def validate_positive(value: Any, name: str) -> float:
    """Validate a finite, strictly positive real"""
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise InvalidParameterError(name, value, "must be a real number")

    if not math.isfinite(value) or value <= 0.0:
        raise InvalidParameterError(name, value, "must be finite and > 0")
    return value


# Exception hierarchy for reference
"""
Exception Hierarchy:

StabilizedSolverError (base)
├── InvalidParameterError
├── DivergenceError
├── StageCapExceededError
├── StepSizeUnderflowError
├── ReferenceUnattainableError
└── VerificationError

Usage Examples:

try:
    report = integrate_adaptive(problem, y0, config)
except DivergenceError as e:
    logger.error(f"Integration diverged at stage {e.stage}")
except StageCapExceededError as e:
    logger.error(f"h*rho={e.h_times_rho} needs more than {e.cap} stages")
"""
