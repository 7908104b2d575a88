"""
Closed-form coefficient sets of the stabilized Chebyshev schemes.

Two families are generated per (s, eta):
    * Cheb1Coefficients - first-order Chebyshev scheme and its advection-diffusion variant
    * ArkcCoefficients  - second-order RKC recurrence shared by RKC and ARKC

Both are memoized in bounded caches; the returned arrays are read-only.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from arkc.chebpoly import cheb_first_kind, cheb_first_kind_table, cheb_second_kind
from arkc.constants import SolverConstants
from arkc.exceptions import InvalidParameterError, validate_damping, validate_stage_count
from config.settings import settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cheb1Coefficients:
    """
    Coefficients of the first-order Chebyshev scheme.

    Arrays are indexed by stage j = 0..s; unused leading entries hold 0.
    kappa[1] is the first-stage advection weight and kappa[j] = 1 - nu[j] for j >= 2.
    """
    s: int
    eta: float
    omega0: float
    omega1: float
    mu: np.ndarray
    nu: np.ndarray
    kappa: np.ndarray
    nu1: float
    kappa1: float

    @property
    def real_stability_length(self) -> float:
        return (1.0 + self.omega0) / self.omega1


@dataclass(frozen=True)
class ArkcCoefficients:
    """
    Coefficients of the damped second-order RKC recurrence and the ARKC correction.

    Arrays are indexed by stage j = 0..s; mu, nu, kappa are meaningful for j >= 2.
    """
    s: int
    eta: float
    omega0: float
    omega2: float
    a: np.ndarray
    b: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    kappa: np.ndarray
    b1: float
    alpha: float
    c1: float
    c2: float

    @property
    def real_stability_length(self) -> float:
        """Length L of the real stability interval [-L, 0]"""
        return (1.0 + self.omega0) / self.omega2


@dataclass(frozen=True)
class OrderConditionCheck:
    """Final values of the six order-condition recurrences for one (s, eta)"""
    s: int
    eta: float
    gammas: Tuple[float, float, float, float, float, float]
    nodes: np.ndarray
    node_residual: float

    TARGETS = (1.0, 1.0, 0.5, 0.5, 0.5, 0.5)

    @property
    def residuals(self) -> Tuple[float, ...]:
        return tuple(g - t for g, t in zip(self.gammas, self.TARGETS))

    @property
    def max_residual(self) -> float:
        return max(abs(r) for r in self.residuals)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def cheb1_coefficients(s: int, eta: float = SolverConstants.DEFAULT_ETA_FIRST_ORDER) -> Cheb1Coefficients:
    """Coefficients of the first-order scheme for s >= 1 stages and damping eta > 0"""
    s = validate_stage_count(s, minimum=1)
    eta = validate_damping(eta)
    return _cheb1_cached(s, eta)


@lru_cache(maxsize=settings.COEFF_CACHE_SIZE)
def _cheb1_cached(s: int, eta: float) -> Cheb1Coefficients:
    omega0 = 1.0 + eta / (s * s)
    t_values, t_firsts, _ = cheb_first_kind_table(s, omega0)
    omega1 = t_values[s] / t_firsts[s]

    mu = np.zeros(s + 1)
    nu = np.zeros(s + 1)
    kappa = np.zeros(s + 1)

    mu[1] = omega1 / omega0
    for j in range(2, s + 1):
        mu[j] = 2.0 * omega1 * t_values[j - 1] / t_values[j]
        nu[j] = 2.0 * omega0 * t_values[j - 1] / t_values[j]
        kappa[j] = 1.0 - nu[j]

    nu1 = s * omega1 / 2.0
    kappa1 = s * omega1 / omega0
    kappa[1] = kappa1

    logger.debug("Generated first-order coefficients", extra={
        "event": "coefficients_generated",
        "scheme": "cheb1",
        "s": s,
        "eta": eta
    })
    return Cheb1Coefficients(
        s=s, eta=eta, omega0=omega0, omega1=omega1,
        mu=_frozen(mu), nu=_frozen(nu), kappa=_frozen(kappa),
        nu1=nu1, kappa1=kappa1
    )


def arkc_coefficients(s: int, eta: float = SolverConstants.DEFAULT_ETA_SECOND_ORDER) -> ArkcCoefficients:
    """Coefficients of the second-order recurrence for s >= 2 stages and damping eta > 0"""
    s = validate_stage_count(s, minimum=SolverConstants.MIN_STAGES)
    eta = validate_damping(eta)
    return _arkc_cached(s, eta)


@lru_cache(maxsize=settings.COEFF_CACHE_SIZE)
def _arkc_cached(s: int, eta: float) -> ArkcCoefficients:
    omega0 = 1.0 + eta / (s * s)
    t_values, t_firsts, t_seconds = cheb_first_kind_table(s, omega0)
    omega2 = t_firsts[s] / t_seconds[s]

    b = np.empty(s + 1)
    for j in range(2, s + 1):
        b[j] = t_seconds[j] / t_firsts[j] ** 2
    b[0] = b[1] = b[2]
    a = 1.0 - b * t_values

    mu = np.zeros(s + 1)
    nu = np.zeros(s + 1)
    kappa = np.zeros(s + 1)
    for j in range(2, s + 1):
        mu[j] = 2.0 * b[j] * omega2 / b[j - 1]
        nu[j] = 2.0 * b[j] * omega0 / b[j - 1]
        kappa[j] = -b[j] / b[j - 2]

    b1 = float(b[1])
    alpha = (1.0 - omega2 / 2.0) * b1 * s * omega2

    u_last = cheb_second_kind(s - 1, omega0)
    c1 = (omega2 / 2.0) * (1.0 - omega2 / 2.0) * (1.0 + omega2 * u_last.second_deriv / u_last.value)
    c2 = s * b[s] * u_last.second_deriv * omega2 ** 3 / 6.0

    logger.debug("Generated second-order coefficients", extra={
        "event": "coefficients_generated",
        "scheme": "arkc",
        "s": s,
        "eta": eta
    })
    return ArkcCoefficients(
        s=s, eta=eta, omega0=omega0, omega2=omega2,
        a=_frozen(a), b=_frozen(b), mu=_frozen(mu), nu=_frozen(nu), kappa=_frozen(kappa),
        b1=b1, alpha=alpha, c1=float(c1), c2=float(c2)
    )


def rkc_stage_count(h_times_rho: float, eta: Optional[float] = None) -> int:
    """
    Stage count from s = [sqrt((h*rho + 1.5)/0.65) + 0.5], at least 2.

    The bracket is read as round-to-nearest; the result is then bumped until the
    stability interval covers h*rho: against 0.65*s^2 by default, or against the
    actual (1+omega0)/omega2 when eta is given.
    """
    h_times_rho = float(h_times_rho)
    if not math.isfinite(h_times_rho) or h_times_rho < 0.0:
        raise InvalidParameterError("h_times_rho", h_times_rho, "must be finite and >= 0")

    raw = math.sqrt((h_times_rho + SolverConstants.STAGE_FORMULA_OFFSET) / SolverConstants.STAGE_FORMULA_SLOPE) + 0.5
    s = max(SolverConstants.MIN_STAGES, int(math.floor(raw + 0.5)))

    if eta is None:
        while SolverConstants.STAGE_FORMULA_SLOPE * s * s < h_times_rho:
            s += 1
    else:
        while arkc_coefficients(s, eta).real_stability_length < h_times_rho:
            s += 1
    return s


def order_condition_values(s: int, eta: float) -> OrderConditionCheck:
    """
    Evaluate the six order-condition recurrences of the ARKC scheme.

    gamma_1..gamma_6 track the coefficients of h F_D, h F_A, h^2 F_D'F_D, h^2 F_D'F_A,
    h^2 F_A'F_D and h^2 F_A'F_A through the stages; second order requires the final
    values (1, 1, 1/2, 1/2, 1/2, 1/2). gamma_1 at stage j is also the stage node c_j.
    """
    coeffs = arkc_coefficients(s, eta)
    w2 = coeffs.omega2
    alpha = coeffs.alpha
    a, mu, nu, kappa = coeffs.a, coeffs.mu, coeffs.nu, coeffs.kappa

    g = np.zeros((6, s + 1))
    g[0, 0], g[0, 1] = 0.0, coeffs.b1 * w2
    g[1, 0], g[1, 1] = w2 / 2.0, alpha + w2 / 2.0
    g[2, 0], g[2, 1] = 0.0, 0.0
    g[3, 0], g[3, 1] = w2 * (w2 - 1.0) / 4.0, (alpha + w2 / 2.0) * (w2 - 1.0) / 2.0
    g[4, 0], g[4, 1] = w2 / 4.0, (alpha + w2 / 2.0) / 2.0
    g[5, 0], g[5, 1] = g[4, 0], g[4, 1]

    for j in range(2, s + 1):
        rest = 1.0 - nu[j] - kappa[j]
        g[0, j] = mu[j] * (1.0 - a[j - 1]) + nu[j] * g[0, j - 1] + kappa[j] * g[0, j - 2]
        g[1, j] = nu[j] * g[1, j - 1] + kappa[j] * g[1, j - 2] + rest * w2 / 2.0
        g[2, j] = mu[j] * g[0, j - 1] + nu[j] * g[2, j - 1] + kappa[j] * g[2, j - 2]
        g[3, j] = (mu[j] * (g[1, j - 1] - w2 / 2.0) + nu[j] * g[3, j - 1] + kappa[j] * g[3, j - 2]
                   + rest * w2 * (w2 - 1.0) / 4.0)
        for row in (4, 5):
            g[row, j] = nu[j] * g[row, j - 1] + kappa[j] * g[row, j - 2] + rest * w2 / 4.0

    node_residual = 0.0
    for j in range(2, s + 1):
        t_j = cheb_first_kind(j, coeffs.omega0)
        node = w2 * t_j.second_deriv / t_j.first_deriv
        node_residual = max(node_residual, abs(g[0, j] - node))

    nodes = g[0].copy()
    return OrderConditionCheck(
        s=coeffs.s,
        eta=coeffs.eta,
        gammas=tuple(float(v) for v in g[:, s]),
        nodes=_frozen(nodes),
        node_residual=node_residual
    )


def clear_coefficient_cache() -> None:
    """Drop every memoized coefficient set"""
    _cheb1_cached.cache_clear()
    _arkc_cached.cache_clear()
