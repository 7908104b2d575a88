"""
Chebyshev polynomials of the first and second kind with first and second derivatives.

Values are produced by the three-term recurrences and their differentiated forms,
in a single forward pass keeping two trailing terms per quantity. Arguments may be
Python floats or numpy arrays (elementwise evaluation, used by the stability scans).
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from arkc.exceptions import InvalidParameterError

Real = Union[float, np.ndarray]


@dataclass(frozen=True)
class ChebEval:
    """Value and first two derivatives of a Chebyshev polynomial at one argument"""
    value: Real
    first_deriv: Real
    second_deriv: Real


def _validate_degree(j: int) -> int:
    if isinstance(j, bool) or int(j) != j or j < 0:
        raise InvalidParameterError("j", j, "degree must be an integer >= 0")
    return int(j)


def _recurrence(j: int, x: Real, first_value: Real, first_deriv: Real) -> ChebEval:
    """
    Run P_k = 2x P_{k-1} - P_{k-2} with P_0 = 1 and the given degree-one seed.

    Both families share the recurrence and differ only in P_1 (x or 2x).
    """
    zero = 0.0 * x
    one = 1.0 + zero

    if j == 0:
        return ChebEval(one, zero, zero)

    # (value, first, second) for degrees k-2 and k-1
    v2, d2, dd2 = one, zero, zero
    v1, d1, dd1 = first_value, first_deriv, zero

    for _ in range(2, j + 1):
        v = 2.0 * x * v1 - v2
        d = 2.0 * v1 + 2.0 * x * d1 - d2
        dd = 4.0 * d1 + 2.0 * x * dd1 - dd2
        v2, d2, dd2 = v1, d1, dd1
        v1, d1, dd1 = v, d, dd

    return ChebEval(v1, d1, dd1)


def cheb_first_kind(j: int, x: Real) -> ChebEval:
    """T_j(x), T_j'(x), T_j''(x)"""
    j = _validate_degree(j)
    x = _as_real(x)
    return _recurrence(j, x, x, 1.0 + 0.0 * x)


def cheb_second_kind(j: int, x: Real) -> ChebEval:
    """U_j(x), U_j'(x), U_j''(x)"""
    j = _validate_degree(j)
    x = _as_real(x)
    return _recurrence(j, x, 2.0 * x, 2.0 + 0.0 * x)


def cheb_first_kind_table(s: int, x: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    T_j(x), T_j'(x), T_j''(x) for every degree j = 0..s at a scalar argument.

    Used by the coefficient generators, which need the whole sequence at x = omega0.
    """
    s = _validate_degree(s)
    x = float(x)

    values = np.empty(s + 1)
    firsts = np.empty(s + 1)
    seconds = np.empty(s + 1)

    values[0], firsts[0], seconds[0] = 1.0, 0.0, 0.0
    if s >= 1:
        values[1], firsts[1], seconds[1] = x, 1.0, 0.0

    for k in range(2, s + 1):
        values[k] = 2.0 * x * values[k - 1] - values[k - 2]
        firsts[k] = 2.0 * values[k - 1] + 2.0 * x * firsts[k - 1] - firsts[k - 2]
        seconds[k] = 4.0 * firsts[k - 1] + 2.0 * x * seconds[k - 1] - seconds[k - 2]

    return values, firsts, seconds


def _as_real(x: Real) -> Real:
    if isinstance(x, np.ndarray):
        return x.astype(np.float64, copy=False)
    return float(x)
