"""
Benchmark problems: periodic method-of-lines discretizations on [0, 1] with N unknowns
u_k = u(k/N, t), k = 0..N-1 (u_N identified with u_0), and the reference-solution oracle.

    linear-ad : u_t + a u_x = u_xx,                 u(x, 0) = sin(2 pi x)
    burgers   : u_t + 10 u u_x = u_xx + sin(u^2),   u(x, 0) = 1 + sin(2 pi x)

Diffusion is F_D (second-order central Laplacian); advection and reaction form F_A
(second-order central differences). The diffusion coefficient is 1, so the Peclet
number of the linear problem is a.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp

from arkc.constants import ReportColumns
from arkc.exceptions import InvalidParameterError, ReferenceUnattainableError, validate_positive
from arkc.integrators import SplitOdeProblem, _as_state
from arkc.utilities.report_writer import write_csv
from config.settings import settings

logger = logging.getLogger(__name__)

MIN_CELLS = 4
REFERENCE_METHOD = "DOP853"
MAX_REFERENCE_TOL = 1e-10


def _validate_cells(n_cells: int) -> int:
    if isinstance(n_cells, bool) or int(n_cells) != n_cells or n_cells < MIN_CELLS:
        raise InvalidParameterError("n_cells", n_cells, f"must be an integer >= {MIN_CELLS}")
    return int(n_cells)


def periodic_laplacian(u: np.ndarray, dx: float) -> np.ndarray:
    return (np.roll(u, -1) - 2.0 * u + np.roll(u, 1)) / (dx * dx)


def periodic_gradient(u: np.ndarray, dx: float) -> np.ndarray:
    return (np.roll(u, -1) - np.roll(u, 1)) / (2.0 * dx)


@dataclass
class LinearAdvectionDiffusion1D:
    """Periodic u_t + a u_x = u_xx with exact discrete solution by Fourier diagonalization"""
    n_cells: int = 150
    advection: float = 0.1
    t_end: float = 0.5

    def __post_init__(self):
        self.n_cells = _validate_cells(self.n_cells)
        if not math.isfinite(self.advection) or self.advection < 0.0:
            raise InvalidParameterError("advection", self.advection, "must be finite and >= 0")

    @property
    def dx(self) -> float:
        return 1.0 / self.n_cells

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n_cells) * self.dx

    def initial_state(self) -> np.ndarray:
        return np.sin(2.0 * np.pi * self.x)

    def f_diffusion(self, u: np.ndarray) -> np.ndarray:
        return periodic_laplacian(u, self.dx)

    def f_advection(self, u: np.ndarray) -> np.ndarray:
        return -self.advection * periodic_gradient(u, self.dx)

    def eigenvalues(self) -> np.ndarray:
        """lambda_k = (2/dx^2)(cos(2 pi k dx) - 1) - i(a/dx) sin(2 pi k dx), in numpy FFT order"""
        theta = 2.0 * np.pi * np.arange(self.n_cells) * self.dx
        return (2.0 / self.dx ** 2) * (np.cos(theta) - 1.0) - 1j * (self.advection / self.dx) * np.sin(theta)

    def rho_diffusion(self, u: Optional[np.ndarray] = None) -> float:
        return float(np.max(np.abs(self.eigenvalues().real)))

    def rho_advection(self, u: Optional[np.ndarray] = None) -> float:
        return float(np.max(np.abs(self.eigenvalues().imag)))

    def exact_solution(self, t: float, y0: Optional[np.ndarray] = None) -> np.ndarray:
        """Discrete solution at time t: each Fourier mode scaled by exp(lambda_k t)"""
        y0 = self.initial_state() if y0 is None else np.asarray(y0, dtype=float)
        modes = np.fft.fft(y0) * np.exp(self.eigenvalues() * t)
        return np.fft.ifft(modes).real

    def peclet_number(self, u: Optional[np.ndarray] = None) -> float:
        return self.advection

    def to_problem(self) -> SplitOdeProblem:
        return SplitOdeProblem(
            dimension=self.n_cells,
            f_diffusion=self.f_diffusion,
            f_advection_reaction=self.f_advection if self.advection > 0.0 else None,
            rho_diffusion_hint=self.rho_diffusion,
            rho_advection_hint=self.rho_advection,
            linear=True,
            name=f"linear-ad(a={self.advection:g}, N={self.n_cells})",
            metadata={"model": self},
        )


@dataclass
class BurgersReaction1D:
    """Periodic u_t + 10 u u_x = u_xx + sin(u^2)"""
    n_cells: int = 100
    advection_coeff: float = 10.0
    t_end: float = 0.5

    def __post_init__(self):
        self.n_cells = _validate_cells(self.n_cells)

    @property
    def dx(self) -> float:
        return 1.0 / self.n_cells

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n_cells) * self.dx

    def initial_state(self) -> np.ndarray:
        return 1.0 + np.sin(2.0 * np.pi * self.x)

    def f_diffusion(self, u: np.ndarray) -> np.ndarray:
        return periodic_laplacian(u, self.dx)

    def f_advection(self, u: np.ndarray) -> np.ndarray:
        return -self.advection_coeff * u * periodic_gradient(u, self.dx) + np.sin(u * u)

    def rho_diffusion(self, u: Optional[np.ndarray] = None) -> float:
        return 4.0 / self.dx ** 2

    def rho_advection(self, u: np.ndarray) -> float:
        return self.advection_coeff * float(np.max(np.abs(u))) / self.dx

    def peclet_number(self, u: np.ndarray) -> float:
        return self.advection_coeff * float(np.max(np.abs(u)))

    def to_problem(self) -> SplitOdeProblem:
        return SplitOdeProblem(
            dimension=self.n_cells,
            f_diffusion=self.f_diffusion,
            f_advection_reaction=self.f_advection,
            rho_diffusion_hint=self.rho_diffusion,
            rho_advection_hint=self.rho_advection,
            linear=False,
            name=f"burgers(N={self.n_cells})",
            metadata={"model": self},
        )


def build_linear_ad(n_cells: int = 150, advection: float = 0.1) -> SplitOdeProblem:
    """Linear advection-diffusion problem; advection = 0 leaves F_A absent"""
    return LinearAdvectionDiffusion1D(n_cells=n_cells, advection=advection).to_problem()


def build_burgers(n_cells: int = 100) -> SplitOdeProblem:
    return BurgersReaction1D(n_cells=n_cells).to_problem()


def model_of(problem: SplitOdeProblem) -> Union[LinearAdvectionDiffusion1D, BurgersReaction1D, None]:
    return problem.metadata.get("model")


def initial_state(problem: SplitOdeProblem) -> np.ndarray:
    model = model_of(problem)
    if model is None:
        raise InvalidParameterError("problem", problem.name, "has no benchmark model attached")
    return model.initial_state()


@dataclass
class _CountedRhs:
    """Full right-hand side for the reference solver with an evaluation budget"""
    problem: SplitOdeProblem
    max_evals: int
    evals: int = field(default=0)

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        self.evals += 1
        if self.evals > self.max_evals:
            raise ReferenceUnattainableError("evaluation budget exhausted", evals=self.evals)
        return self.problem.rhs(y)


def _check_reference_tol(tight_tol: float) -> float:
    tight_tol = validate_positive(tight_tol, "tight_tol")
    if tight_tol > MAX_REFERENCE_TOL:
        raise InvalidParameterError("tight_tol", tight_tol, f"must be <= {MAX_REFERENCE_TOL:g}")
    return tight_tol


def _solve_reference(problem: SplitOdeProblem, y0: np.ndarray, times: np.ndarray, tight_tol: float,
                     max_evals: int) -> List[Tuple[float, np.ndarray]]:
    rhs = _CountedRhs(problem, max_evals)
    try:
        solution = solve_ivp(rhs, (0.0, float(times[-1])), y0, method=REFERENCE_METHOD,
                             t_eval=times, rtol=tight_tol, atol=tight_tol)
    except ReferenceUnattainableError:
        logger.error("Reference solve exceeded its evaluation budget", extra={
            "event": "reference_failed",
            "problem": problem.name,
            "evals": rhs.evals
        })
        raise
    if not solution.success:
        raise ReferenceUnattainableError(solution.message, evals=rhs.evals)

    logger.debug("Reference solve finished", extra={
        "event": "reference_solved",
        "problem": problem.name,
        "evals": rhs.evals,
        "tight_tol": tight_tol
    })
    return [(float(t), solution.y[:, i].copy()) for i, t in enumerate(solution.t)]


def reference_trajectory(problem: SplitOdeProblem, y0: np.ndarray, times: Sequence[float],
                         tight_tol: float = settings.REFERENCE_TOL,
                         max_evals: int = settings.REFERENCE_MAX_EVALS) -> List[Tuple[float, np.ndarray]]:
    """
    Reference states at increasing times >= 0 (starting from y0 at t = 0).

    The linear benchmark is solved exactly in Fourier space; everything else uses an
    explicit order-8 Runge-Kutta pair with rtol = atol = tight_tol.
    """
    tight_tol = _check_reference_tol(tight_tol)
    y0 = _as_state(y0, problem.dimension)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or times[0] < 0.0 or np.any(np.diff(times) <= 0.0):
        raise InvalidParameterError("times", times.tolist(), "must be a non-empty increasing list of t >= 0")

    model = model_of(problem)
    if isinstance(model, LinearAdvectionDiffusion1D):
        return [(float(t), model.exact_solution(float(t), y0)) for t in times]
    if times[-1] == 0.0:
        return [(0.0, y0.copy())]
    return _solve_reference(problem, y0, times, tight_tol, max_evals)


def reference_solution(problem: SplitOdeProblem, y0: np.ndarray, t_end: float,
                       tight_tol: float = settings.REFERENCE_TOL,
                       max_evals: int = settings.REFERENCE_MAX_EVALS) -> np.ndarray:
    """Reference state at t_end"""
    t_end = validate_positive(t_end, "t_end")
    return reference_trajectory(problem, y0, [t_end], tight_tol, max_evals)[-1][1]


def peclet_number(problem: SplitOdeProblem, u: np.ndarray) -> float:
    """Advection strength over diffusion (diffusion coefficient 1)"""
    model = model_of(problem)
    if model is None:
        raise InvalidParameterError("problem", problem.name, "has no benchmark model attached")
    return model.peclet_number(np.asarray(u, dtype=float))


def peclet_trace(problem: SplitOdeProblem,
                 trajectory: Sequence[Tuple[float, np.ndarray]]) -> List[Tuple[float, float]]:
    return [(float(t), peclet_number(problem, u)) for t, u in trajectory]


def write_profile_csv(path: Union[str, Path, None], x: np.ndarray, u: np.ndarray) -> str:
    rows = [{"x": float(xi), "u": float(ui)} for xi, ui in zip(x, u)]
    return write_csv(path, rows, ReportColumns.PROFILE)


def write_trajectory_csv(path: Union[str, Path, None], x: np.ndarray,
                         samples: Sequence[Tuple[float, np.ndarray]]) -> str:
    rows: List[Dict[str, float]] = []
    for t, u in samples:
        rows.extend({"t": float(t), "x": float(xi), "u": float(ui)} for xi, ui in zip(x, u))
    return write_csv(path, rows, ReportColumns.TRAJECTORY)
