"""
Stability polynomials of the first-order advection-diffusion scheme (R1) and ARKC (R2)
on the p-q plane of the split test equation y' = lambda*y + i*mu*y, p = h*lambda, q = h*mu.

    R1(p, q) = T_s(w1)/T_s(omega0) + U_{s-1}(w1)/U_{s-1}(omega0) * (1 + omega1*p/2) * iq,   w1 = omega0 + omega1*p
    R2(p, q) = a_s + b_s*T_s(w2) + (omega2/2 + (1 - omega2/2)*U_{s-1}(w2)/U_{s-1}(omega0))
                                   * (1 + omega2*p/2) * (iq - q^2/2),     w2 = omega0 + omega2*p

Also rasterizes stability regions, measures the inscribed ellipse (d_s, a_s) and checks
damping-table entries along the curves q = c*sqrt(-p).
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from arkc.chebpoly import cheb_first_kind, cheb_second_kind
from arkc.coeffs import arkc_coefficients, cheb1_coefficients
from arkc.constants import StabilityConstants
from arkc.damping import ARKC_DAMPING, DampingTable
from arkc.exceptions import InvalidParameterError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]
ScanScheme = Literal["ad1", "arkc"]

_FIRST_ORDER = ("cheb1", "ad1")
_SECOND_ORDER = ("rkc", "arkc")


@dataclass(frozen=True)
class StabilityPoint:
    p: float
    q: float
    modulus: float


@dataclass(frozen=True)
class PolynomialValue:
    """Complex value of a stability polynomial and its modulus (elementwise for arrays)"""
    value: Union[complex, np.ndarray]
    modulus: ArrayLike


class GridSpec(BaseModel):
    """Raster of the p-q plane; ranges default to the scheme's natural window"""
    model_config = ConfigDict(frozen=True)

    p_points: int = StabilityConstants.DEFAULT_GRID_P
    q_points: int = StabilityConstants.DEFAULT_GRID_Q
    p_min: Optional[float] = None
    p_max: float = 0.0
    q_max: Optional[float] = None

    @field_validator("p_points", "q_points")
    @classmethod
    def _at_least_two(cls, value: int) -> int:
        if value < 2:
            raise ValueError("a grid axis needs at least 2 points")
        return value

    @model_validator(mode="after")
    def _check_ranges(self) -> "GridSpec":
        if self.p_min is not None and self.p_min >= self.p_max:
            raise ValueError("p_min must be below p_max")
        if self.q_max is not None and self.q_max <= 0.0:
            raise ValueError("q_max must be > 0")
        return self

    def resolve(self, scheme: str, s: int, eta: float) -> Tuple[np.ndarray, np.ndarray]:
        """Concrete p and q axes for one (scheme, s, eta)"""
        if scheme == "ad1":
            p_min = -1.05 * real_stability_length(scheme, s, eta) if self.p_min is None else self.p_min
            q_max = 2.0 * s if self.q_max is None else self.q_max
        else:
            p_min = -StabilityConstants.P_RANGE_FACTOR * s * s if self.p_min is None else self.p_min
            q_max = float(s) if self.q_max is None else self.q_max
        return (np.linspace(p_min, self.p_max, self.p_points),
                np.linspace(-q_max, q_max, self.q_points))


@dataclass
class StabilityScan:
    """Moduli on a p-q raster plus the inscribed-ellipse metrics"""
    scheme: str
    s: int
    eta: float
    p_values: np.ndarray
    q_values: np.ndarray
    grid: np.ndarray
    d_s: float
    a_s: float
    degenerate: bool = False
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def p_range(self) -> Tuple[float, float]:
        return float(self.p_values[0]), float(self.p_values[-1])

    @property
    def q_range(self) -> Tuple[float, float]:
        return float(self.q_values[0]), float(self.q_values[-1])

    def rows(self) -> List[Dict[str, float]]:
        """(p, q, modulus) rows, q-major"""
        rows = []
        for i, q in enumerate(self.q_values):
            for j, p in enumerate(self.p_values):
                rows.append({"p": float(p), "q": float(q), "modulus": float(self.grid[i, j])})
        return rows

    def metrics(self) -> Dict[str, Any]:
        return {"scheme": self.scheme, "s": self.s, "eta": self.eta, "d_s": self.d_s, "a_s": self.a_s}


def _modulus(value: np.ndarray) -> np.ndarray:
    modulus = np.abs(value)
    return np.where(np.isnan(modulus), np.inf, modulus)


def eval_R1(p: ArrayLike, q: ArrayLike, s: int, eta: float) -> PolynomialValue:
    """Stability polynomial A(p) + B(p)*iq of the first-order advection-diffusion scheme"""
    coeffs = cheb1_coefficients(s, eta)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    w = coeffs.omega0 + coeffs.omega1 * p

    with np.errstate(over="ignore", invalid="ignore"):
        a_part = cheb_first_kind(s, w).value / cheb_first_kind(s, coeffs.omega0).value
        b_part = (cheb_second_kind(s - 1, w).value / cheb_second_kind(s - 1, coeffs.omega0).value
                  * (1.0 + coeffs.omega1 * p / 2.0))
        value = a_part + 1j * b_part * q
        modulus = _modulus(value)
    return _pack(value, modulus)


def eval_R2(p: ArrayLike, q: ArrayLike, s: int, eta: float) -> PolynomialValue:
    """Stability polynomial A2(p) + B2(p)*(iq - q^2/2) of ARKC"""
    coeffs = arkc_coefficients(s, eta)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    w2 = coeffs.omega2
    w = coeffs.omega0 + w2 * p

    with np.errstate(over="ignore", invalid="ignore"):
        a_part = coeffs.a[s] + coeffs.b[s] * cheb_first_kind(s, w).value
        u_ratio = cheb_second_kind(s - 1, w).value / cheb_second_kind(s - 1, coeffs.omega0).value
        b_part = (w2 / 2.0 + (1.0 - w2 / 2.0) * u_ratio) * (1.0 + w2 * p / 2.0)
        value = a_part + b_part * (1j * q - q * q / 2.0)
        modulus = _modulus(value)
    return _pack(value, modulus)


def _pack(value: np.ndarray, modulus: np.ndarray) -> PolynomialValue:
    if np.ndim(value) == 0:
        return PolynomialValue(complex(value), float(modulus))
    return PolynomialValue(value, modulus)


_EVALUATORS = {"ad1": eval_R1, "arkc": eval_R2}


def _evaluator(scheme: str):
    if scheme not in _EVALUATORS:
        raise InvalidParameterError("scheme", scheme, "stability polynomials exist for 'ad1' and 'arkc'")
    return _EVALUATORS[scheme]


def real_stability_length(scheme: str, s: int, eta: float) -> float:
    """L of the real stability interval [-L, 0]: (1+omega0)/omega1 or (1+omega0)/omega2"""
    if scheme in _FIRST_ORDER:
        return cheb1_coefficients(s, eta).real_stability_length
    if scheme in _SECOND_ORDER:
        return arkc_coefficients(s, eta).real_stability_length
    raise InvalidParameterError("scheme", scheme, "must be one of cheb1, ad1, rkc, arkc")


def curve_profile(scheme: ScanScheme, s: int, eta: float, c: float,
                  n_points: int = StabilityConstants.CURVE_POINTS) -> List[StabilityPoint]:
    """Moduli along q = c*sqrt(-p) for p in [-L, 0]"""
    if n_points < 2:
        raise InvalidParameterError("n_points", n_points, "must be >= 2")
    length = real_stability_length(scheme, s, eta)
    p = np.linspace(-length, 0.0, n_points)
    q = c * np.sqrt(-p)
    modulus = _evaluator(scheme)(p, q, s, eta).modulus
    return [StabilityPoint(float(pi), float(qi), float(mi)) for pi, qi, mi in zip(p, q, modulus)]


def _real_extent(scheme: str, s: int, eta: float, p_values: np.ndarray) -> float:
    """Length of the stable segment of the real axis attached to the origin, on the scan's p axis"""
    p_axis = np.sort(p_values[p_values <= 0.0])[::-1]
    modulus = _evaluator(scheme)(p_axis, np.zeros_like(p_axis), s, eta).modulus
    stable = modulus <= 1.0 + StabilityConstants.MODULUS_SLACK
    if stable.all():
        return float(-p_axis[-1])
    first_unstable = int(np.argmin(stable))
    if first_unstable == 0:
        return 0.0
    return float(-p_axis[first_unstable - 1])


def _ellipse_points(d: float, a: float, offset: float) -> Tuple[np.ndarray, np.ndarray]:
    """Filled ellipse with p-axis [-d, -offset] and q-semiaxis a, sampled on polar rings"""
    theta = np.linspace(0.0, 2.0 * np.pi, StabilityConstants.ELLIPSE_THETA_POINTS, endpoint=False)
    radii = np.linspace(1.0 / StabilityConstants.ELLIPSE_RADIAL_POINTS, 1.0,
                        StabilityConstants.ELLIPSE_RADIAL_POINTS)
    r, t = np.meshgrid(radii, theta)
    centre = -(d + offset) / 2.0
    half_width = (d - offset) / 2.0
    p = centre + r * half_width * np.cos(t)
    q = r * a * np.sin(t)
    return np.append(p.ravel(), centre), np.append(q.ravel(), 0.0)


def _ellipse_fits(scheme: str, s: int, eta: float, d: float, a: float, offset: float) -> bool:
    p, q = _ellipse_points(d, a, offset)
    modulus = _evaluator(scheme)(p, q, s, eta).modulus
    return bool(np.all(modulus <= 1.0 + StabilityConstants.MODULUS_SLACK))


def inscribed_ellipse_height(scheme: ScanScheme, s: int, eta: float, d: float,
                             a_max: Optional[float] = None,
                             origin_offset: float = StabilityConstants.ELLIPSE_ORIGIN_OFFSET) -> float:
    """
    Largest q-semiaxis a for which the ellipse spanning [-d, -origin_offset] stays inside
    |R| <= 1, by bisection.

    Every region narrows to a cusp at the origin (|R(0, q)| > 1 for q != 0), so an ellipse
    through the origin is capped there rather than by the body of the region; the right
    vertex is kept origin_offset away from it.
    """
    if origin_offset < 0.0:
        raise InvalidParameterError("origin_offset", origin_offset, "must be >= 0")
    if d <= origin_offset or not _ellipse_fits(scheme, s, eta, d, 0.0, origin_offset):
        return 0.0
    hi = 2.5 * s if a_max is None else a_max
    if _ellipse_fits(scheme, s, eta, d, hi, origin_offset):
        return hi
    lo = 0.0
    for _ in range(StabilityConstants.ELLIPSE_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if _ellipse_fits(scheme, s, eta, d, mid, origin_offset):
            lo = mid
        else:
            hi = mid
    return lo


def scan_region(scheme: ScanScheme, s: int, eta: float,
                grid_spec: Optional[GridSpec] = None) -> StabilityScan:
    """
    Rasterize |R| over the grid and measure the inscribed ellipse.

    d_s is the stable extent of the negative real axis (as seen on the grid's p axis)
    and a_s the largest q-semiaxis of an ellipse spanning [-d_s, -origin offset] inside
    the region.
    """
    evaluator = _evaluator(scheme)
    grid_spec = grid_spec or GridSpec()
    if min(grid_spec.p_points, grid_spec.q_points) < StabilityConstants.MIN_GRID_POINTS:
        raise InvalidParameterError("grid_spec", (grid_spec.p_points, grid_spec.q_points),
                                    f"resolution must be at least {StabilityConstants.MIN_GRID_POINTS} "
                                    f"points per axis")

    p_values, q_values = grid_spec.resolve(scheme, s, eta)
    pp, qq = np.meshgrid(p_values, q_values)
    grid = evaluator(pp, qq, s, eta).modulus

    d_s = _real_extent(scheme, s, eta, p_values)
    degenerate = d_s == 0.0
    if degenerate:
        logger.warning("No stable p < 0 on the scanned axis", extra={
            "event": "degenerate_scan",
            "scheme": scheme,
            "s": s,
            "eta": eta
        })
        a_s = 0.0
    else:
        a_s = inscribed_ellipse_height(scheme, s, eta, d_s)

    logger.debug("Stability region scanned", extra={
        "event": "stability_scan",
        "scheme": scheme,
        "s": s,
        "eta": eta,
        "d_s": d_s,
        "a_s": a_s
    })
    return StabilityScan(scheme=scheme, s=s, eta=eta, p_values=p_values, q_values=q_values,
                         grid=grid, d_s=d_s, a_s=a_s, degenerate=degenerate)


@dataclass(frozen=True)
class TableVerification:
    label: str
    c: float
    s: int
    eta: float
    max_modulus: float
    passed: bool

    def to_row(self) -> Dict[str, Any]:
        return {"band": self.label, "s_max": self.s, "eta": self.eta, "c": self.c,
                "max_modulus": self.max_modulus, "passed": self.passed}


def curve_max_modulus(s: int, eta: float, c: float, scheme: ScanScheme = "arkc",
                      n_points: int = StabilityConstants.CURVE_POINTS) -> float:
    return max(point.modulus for point in curve_profile(scheme, s, eta, c, n_points))


def verify_table_entry(c: float, s: int, eta: float, scheme: ScanScheme = "arkc") -> bool:
    """True iff |R| <= 1 + 1e-9 along q = c*sqrt(-p) over the whole real stability interval"""
    return curve_max_modulus(s, eta, c, scheme) <= 1.0 + StabilityConstants.MODULUS_SLACK


def verify_all_tables(table: DampingTable = ARKC_DAMPING) -> List[TableVerification]:
    """Check every raw table cell at the upper edge of its stage band with c = band nominal"""
    results = []
    for entry in table.entries():
        max_modulus = curve_max_modulus(entry.s_upper, entry.eta, entry.nominal)
        passed = max_modulus <= 1.0 + StabilityConstants.MODULUS_SLACK
        if not passed:
            logger.warning(f"Damping entry {entry.label} s<={entry.s_upper} eta={entry.eta} failed", extra={
                "event": "table_entry_failed",
                "band": entry.label,
                "s": entry.s_upper,
                "eta": entry.eta,
                "max_modulus": max_modulus
            })
        results.append(TableVerification(entry.label, entry.nominal, entry.s_upper, entry.eta,
                                          max_modulus, passed))
    if not results:
        logger.warning("Damping table is empty; verification passes vacuously", extra={
            "event": "vacuous_verification",
            "table": table.name
        })
    return results
