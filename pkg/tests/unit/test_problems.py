"""
Benchmark problem tests: discretization operators, spectra, reference oracle, Peclet trace
"""

import csv
import logging

import numpy as np
import pytest
from scipy.linalg import expm

from arkc.exceptions import InvalidParameterError, ReferenceUnattainableError
from arkc.integrators import SplitOdeProblem, integrate_fixed
from arkc.problems import (
    BurgersReaction1D,
    LinearAdvectionDiffusion1D,
    build_burgers,
    build_linear_ad,
    initial_state,
    peclet_number,
    peclet_trace,
    periodic_gradient,
    periodic_laplacian,
    reference_solution,
    reference_trajectory,
    write_profile_csv,
    write_trajectory_csv,
)


def _operator_matrix(problem: SplitOdeProblem) -> np.ndarray:
    identity = np.eye(problem.dimension)
    return np.column_stack([problem.rhs(identity[:, k]) for k in range(problem.dimension)])


class TestDiscreteOperators:

    @pytest.fixture(autouse=True)
    def setup_logger(self):
        self.logger = logging.getLogger(self.__class__.__name__)

    @pytest.mark.smoke
    def test_laplacian_of_first_mode(self):
        n = 32
        x = np.arange(n) / n
        u = np.sin(2.0 * np.pi * x)

        expected = 2.0 * n * n * (np.cos(2.0 * np.pi / n) - 1.0) * u
        np.testing.assert_allclose(periodic_laplacian(u, 1.0 / n), expected, atol=1e-9)

    def test_gradient_of_first_mode(self):
        n = 32
        x = np.arange(n) / n

        expected = n * np.sin(2.0 * np.pi / n) * np.cos(2.0 * np.pi * x)
        np.testing.assert_allclose(periodic_gradient(np.sin(2.0 * np.pi * x), 1.0 / n), expected, atol=1e-10)

    def test_operators_are_periodic(self):
        u = np.array([1.0, 0.0, 0.0, 0.0, 0.0])

        assert periodic_laplacian(u, 1.0)[-1] == pytest.approx(1.0)
        assert periodic_gradient(u, 1.0)[-1] == pytest.approx(0.5)


class TestLinearAdvectionDiffusion:

    @pytest.fixture(autouse=True)
    def setup_logger(self):
        self.logger = logging.getLogger(self.__class__.__name__)

    @pytest.mark.smoke
    def test_spectral_radii_at_default_grid(self):
        model = LinearAdvectionDiffusion1D(n_cells=150, advection=2.0)

        assert model.rho_diffusion() == pytest.approx(4.0 * 150 ** 2)
        assert model.rho_advection() == pytest.approx(2.0 * 150, rel=1e-3)
        assert model.peclet_number() == 2.0

    @pytest.mark.parametrize("advection", [0.1, 2.0, 10.0])
    def test_eigenvalues_match_operator(self, advection):
        model = LinearAdvectionDiffusion1D(n_cells=12, advection=advection)
        computed = np.linalg.eigvals(_operator_matrix(model.to_problem()))

        expected = model.eigenvalues()
        for value in expected:
            assert np.min(np.abs(computed - value)) < 1e-8 * max(1.0, abs(value))

    @pytest.mark.parametrize("t", [0.01, 0.1, 0.5])
    def test_exact_solution_matches_matrix_exponential(self, t):
        model = LinearAdvectionDiffusion1D(n_cells=16, advection=2.0)
        y0 = np.cos(6.0 * np.pi * model.x) + model.initial_state()

        expected = expm(_operator_matrix(model.to_problem()) * t) @ y0
        np.testing.assert_allclose(model.exact_solution(t, y0), expected, atol=1e-10)

    def test_fixed_step_run_approaches_exact_solution(self):
        model = LinearAdvectionDiffusion1D(n_cells=32, advection=2.0)
        problem = model.to_problem()
        report = integrate_fixed(problem, model.initial_state(), (0.0, 0.1), 400, "arkc", 6)

        error = np.max(np.abs(report.final_state - model.exact_solution(0.1)))
        self.logger.info("Fixed-step error against exact solution", extra={"linf_error": float(error)})
        assert error < 5e-5

    def test_zero_advection_leaves_no_advection_field(self):
        problem = build_linear_ad(n_cells=20, advection=0.0)

        assert not problem.has_advection_reaction
        assert problem.linear

    @pytest.mark.negative
    @pytest.mark.parametrize("n_cells", [3, 2.5, True])
    def test_invalid_cell_count_rejected(self, n_cells):
        with pytest.raises(InvalidParameterError):
            LinearAdvectionDiffusion1D(n_cells=n_cells)

    @pytest.mark.negative
    @pytest.mark.parametrize("advection", [-0.1, float("inf")])
    def test_invalid_advection_rejected(self, advection):
        with pytest.raises(InvalidParameterError):
            build_linear_ad(advection=advection)


class TestBurgersReaction:

    @pytest.fixture(autouse=True)
    def setup_logger(self):
        self.logger = logging.getLogger(self.__class__.__name__)

    def test_initial_state_and_radii(self):
        model = BurgersReaction1D(n_cells=100)
        u0 = model.initial_state()

        assert u0.max() == pytest.approx(2.0)
        assert model.rho_diffusion() == pytest.approx(4.0e4)
        assert model.rho_advection(u0) == pytest.approx(10.0 * 2.0 * 100)

    def test_advection_reaction_field(self):
        model = BurgersReaction1D(n_cells=8)
        u = np.full(8, 0.5)

        # constant state: only the reaction term survives
        np.testing.assert_allclose(model.f_advection(u), np.sin(0.25))
        np.testing.assert_allclose(model.f_diffusion(u), 0.0, atol=1e-12)

    def test_problem_is_nonlinear_with_both_fields(self):
        problem = build_burgers(n_cells=20)

        assert problem.has_advection_reaction
        assert not problem.linear
        np.testing.assert_array_equal(initial_state(problem), BurgersReaction1D(n_cells=20).initial_state())


class TestReferenceOracle:

    @pytest.fixture(autouse=True)
    def setup_logger(self):
        self.logger = logging.getLogger(self.__class__.__name__)

    def test_linear_reference_is_exact(self):
        model = LinearAdvectionDiffusion1D(n_cells=24, advection=0.1)
        problem = model.to_problem()
        times = [0.0, 0.2, 0.5]

        trajectory = reference_trajectory(problem, model.initial_state(), times)

        assert [t for t, _ in trajectory] == times
        for t, u in trajectory:
            np.testing.assert_allclose(u, model.exact_solution(t), atol=1e-13)

    @pytest.mark.regression
    def test_burgers_reference_agrees_with_fine_fixed_step_run(self):
        model = BurgersReaction1D(n_cells=16)
        problem = model.to_problem()
        y0 = model.initial_state()

        reference = reference_solution(problem, y0, 0.05)
        report = integrate_fixed(problem, y0, (0.0, 0.05), 400, "arkc", 4)

        error = float(np.max(np.abs(report.final_state - reference)))
        self.logger.info("Burgers reference agreement", extra={"linf_error": error})
        assert error < 1e-4

    @pytest.mark.regression
    def test_burgers_reference_is_self_consistent(self):
        model = BurgersReaction1D(n_cells=20)
        problem = model.to_problem()
        y0 = model.initial_state()
        tight_tol = 1e-11

        coarse = reference_solution(problem, y0, 0.1, tight_tol=tight_tol)
        fine = reference_solution(problem, y0, 0.1, tight_tol=tight_tol / 10.0)

        difference = float(np.max(np.abs(coarse - fine)))
        self.logger.info("Reference self-consistency", extra={"linf_difference": difference})
        assert difference <= 100.0 * tight_tol

    def test_zero_time_returns_initial_state(self):
        problem = build_burgers(n_cells=10)
        y0 = initial_state(problem)

        [(t, u)] = reference_trajectory(problem, y0, [0.0])

        assert t == 0.0
        np.testing.assert_array_equal(u, y0)

    @pytest.mark.negative
    def test_loose_reference_tolerance_rejected(self):
        problem = build_burgers(n_cells=10)

        with pytest.raises(InvalidParameterError):
            reference_solution(problem, initial_state(problem), 0.1, tight_tol=1e-8)

    @pytest.mark.negative
    @pytest.mark.parametrize("times", [[], [0.2, 0.1], [-0.1, 0.1], [0.1, 0.1]])
    def test_invalid_sample_times_rejected(self, times):
        problem = build_burgers(n_cells=10)

        with pytest.raises(InvalidParameterError):
            reference_trajectory(problem, initial_state(problem), times)

    @pytest.mark.negative
    def test_evaluation_budget_exhaustion(self):
        problem = build_burgers(n_cells=16)

        with pytest.raises(ReferenceUnattainableError):
            reference_solution(problem, initial_state(problem), 0.5, max_evals=10)

    def test_problem_without_model_rejected(self, heat_chain):
        with pytest.raises(InvalidParameterError):
            initial_state(heat_chain)


class TestPecletAndProfiles:

    @pytest.fixture(autouse=True)
    def setup_logger(self):
        self.logger = logging.getLogger(self.__class__.__name__)

    def test_linear_peclet_is_advection_speed(self):
        problem = build_linear_ad(n_cells=30, advection=10.0)

        assert peclet_number(problem, initial_state(problem)) == 10.0

    def test_burgers_peclet_trace_follows_solution_maximum(self):
        problem = build_burgers(n_cells=100)
        u0 = initial_state(problem)
        trajectory = [(0.0, u0), (0.1, 0.5 * u0)]

        trace = peclet_trace(problem, trajectory)

        assert trace == [(0.0, pytest.approx(20.0)), (0.1, pytest.approx(10.0))]

    def test_profile_csv(self, tmp_path):
        path = tmp_path / "profile.csv"
        x = np.array([0.0, 0.5])

        write_profile_csv(path, x, np.array([1.0, -1.0]))

        with open(path, newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert rows == [{"x": "0.0", "u": "1.0"}, {"x": "0.5", "u": "-1.0"}]

    def test_trajectory_csv_is_long_format(self, tmp_path):
        path = tmp_path / "nested" / "trajectory.csv"
        x = np.array([0.0, 0.25, 0.5])
        samples = [(0.0, np.zeros(3)), (0.5, np.ones(3))]

        text = write_trajectory_csv(path, x, samples)

        lines = text.strip().splitlines()
        assert lines[0] == "t,x,u"
        assert len(lines) == 1 + 2 * 3
        assert path.read_text(encoding="utf-8") == text
