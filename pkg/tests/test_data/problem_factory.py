"""
Test data factory for generating split ODE problems for tests.
Centralizes all test problem generation logic.

NOTE: No __init__.py in tests/test_data/ to avoid pytest conflicts.
Import directly: from tests.test_data.problem_factory import ProblemFactory
"""
from typing import Dict, Tuple

import numpy as np

from arkc.integrators import SplitOdeProblem

# Multiplication by i on R^2 = C
ROTATION = np.array([[0.0, -1.0], [1.0, 0.0]])


class ProblemFactory:
    """Factory for split ODE problems with known structure"""

    DEFAULT_DIMENSION = 6
    HEAT_CHAIN_SIZE = 40

    @classmethod
    def create_scalar_problem(cls, p: float, q: float) -> SplitOdeProblem:
        """
        y' = (p + iq) y embedded in R^2, diffusion part p, advection part iq.

        One step with h = 1 from (1, 0) returns (Re R, Im R) of the scheme's
        stability polynomial at (p, q).
        """
        return SplitOdeProblem(
            dimension=2,
            f_diffusion=lambda y: p * y,
            f_advection_reaction=lambda y: q * (ROTATION @ y),
            rho_diffusion_hint=lambda y: abs(p),
            rho_advection_hint=lambda y: abs(q),
            linear=True,
            name=f"scalar(p={p:g}, q={q:g})",
        )

    @classmethod
    def create_linear_split_problem(cls, rng: np.random.Generator,
                                    dimension: int = DEFAULT_DIMENSION,
                                    diffusion_scale: float = 50.0,
                                    advection_scale: float = 3.0
                                    ) -> Tuple[SplitOdeProblem, Dict[str, np.ndarray]]:
        """Symmetric negative definite D plus skew-symmetric A"""
        basis = rng.standard_normal((dimension, dimension))
        d_matrix = -(basis @ basis.T) / dimension * diffusion_scale - np.eye(dimension)
        skew = rng.standard_normal((dimension, dimension))
        a_matrix = (skew - skew.T) * advection_scale / 2.0

        problem = SplitOdeProblem(
            dimension=dimension,
            f_diffusion=lambda y: d_matrix @ y,
            f_advection_reaction=lambda y: a_matrix @ y,
            rho_diffusion_hint=lambda y: float(np.max(np.abs(np.linalg.eigvalsh(d_matrix)))),
            rho_advection_hint=lambda y: float(np.max(np.abs(np.linalg.eigvals(a_matrix)))),
            linear=True,
            name=f"linear-split(dim={dimension})",
        )
        return problem, {"D": d_matrix, "A": a_matrix}

    @classmethod
    def create_nonlinear_problem(cls, dimension: int = DEFAULT_DIMENSION) -> SplitOdeProblem:
        """Diagonal decay plus a bounded cubic reaction; no radius hints"""
        rates = -np.linspace(1.0, 200.0, dimension)
        return SplitOdeProblem(
            dimension=dimension,
            f_diffusion=lambda y: rates * y,
            f_advection_reaction=lambda y: np.sin(y) - 0.1 * y ** 3,
            linear=False,
            name=f"nonlinear(dim={dimension})",
        )

    @classmethod
    def create_heat_chain(cls, size: int = HEAT_CHAIN_SIZE) -> SplitOdeProblem:
        """Dirichlet second-difference chain, rho_D = 4/dx^2 at most; no F_A"""
        dx = 1.0 / (size + 1)

        def laplacian(y):
            padded = np.concatenate(([0.0], y, [0.0]))
            return (padded[2:] - 2.0 * padded[1:-1] + padded[:-2]) / (dx * dx)

        return SplitOdeProblem(
            dimension=size,
            f_diffusion=laplacian,
            rho_diffusion_hint=lambda y: 4.0 / (dx * dx),
            linear=True,
            name=f"heat-chain(n={size})",
        )

    @classmethod
    def create_zero_problem(cls, dimension: int = DEFAULT_DIMENSION) -> SplitOdeProblem:
        return SplitOdeProblem(
            dimension=dimension,
            f_diffusion=lambda y: np.zeros_like(y),
            f_advection_reaction=lambda y: np.zeros_like(y),
            linear=True,
            name="zero",
        )

    @classmethod
    def create_bad_shape_problem(cls, dimension: int = DEFAULT_DIMENSION) -> SplitOdeProblem:
        return SplitOdeProblem(
            dimension=dimension,
            f_diffusion=lambda y: np.zeros(dimension + 1),
            name="bad-shape",
        )

    @classmethod
    def create_blowup_problem(cls, dimension: int = 2) -> SplitOdeProblem:
        """F_A returns NaN once any component leaves [-1e3, 1e3]"""
        def advection(y):
            return np.where(np.abs(y) > 1e3, np.nan, 1e6 * y)

        return SplitOdeProblem(
            dimension=dimension,
            f_diffusion=lambda y: -y,
            f_advection_reaction=advection,
            name="blowup",
        )
