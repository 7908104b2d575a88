"""
One-step map tests: evaluation counts, stability-polynomial identities, convergence order
"""

import logging

import numpy as np
import pytest
from scipy.linalg import expm

from arkc.coeffs import arkc_coefficients, cheb1_coefficients
from arkc.damping import select_damping
from arkc.exceptions import DivergenceError, InvalidParameterError
from arkc.integrators import (
    Scheme,
    StepWorkspace,
    integrate_fixed,
    scheme_coefficients,
    step_ad1,
    step_arkc,
    step_cheb1,
    step_rkc,
)
from arkc.stability import eval_R1, eval_R2, scan_region
from tests.test_data.problem_factory import ProblemFactory


class TestStepMaps:
    """Structural properties of the four one-step maps"""

    @pytest.fixture(autouse=True)
    def setup_logger(self):
        self.logger = logging.getLogger(self.__class__.__name__)

    @pytest.mark.smoke
    @pytest.mark.parametrize("scheme", list(Scheme))
    def test_zero_right_hand_side_is_identity(self, scheme, rng):
        problem = ProblemFactory.create_zero_problem()
        y0 = rng.standard_normal(problem.dimension)

        y1 = integrate_fixed(problem, y0, (0.0, 1.0), 3, scheme, 7).final_state

        np.testing.assert_array_equal(y1, y0)

    @pytest.mark.parametrize("s", [2, 5, 17])
    def test_arkc_evaluation_counts(self, s, linear_split_problem):
        problem, _ = linear_split_problem
        ws = StepWorkspace(problem.dimension)

        step_arkc(problem, np.ones(problem.dimension), 1e-3, arkc_coefficients(s, 0.15), ws)

        assert ws.eval_counters.fd_evals == s + 2
        assert ws.eval_counters.fa_evals == 3

    @pytest.mark.parametrize("s", [2, 9])
    def test_arkc_without_advection_uses_s_evaluations(self, s, heat_chain):
        ws = StepWorkspace(heat_chain.dimension)

        step_arkc(heat_chain, np.ones(heat_chain.dimension), 1e-3, arkc_coefficients(s, 0.15), ws)

        assert ws.eval_counters.fd_evals == s
        assert ws.eval_counters.fa_evals == 0

    @pytest.mark.parametrize("s", [1, 4, 12])
    def test_ad1_evaluation_counts(self, s, linear_split_problem):
        problem, _ = linear_split_problem
        ws = StepWorkspace(problem.dimension)

        step_ad1(problem, np.ones(problem.dimension), 1e-3, cheb1_coefficients(s, 0.05), ws)

        assert ws.eval_counters.fd_evals == s
        assert ws.eval_counters.fa_evals == 1

    def test_arkc_reduces_to_rkc_without_advection(self, heat_chain, rng):
        y0 = rng.standard_normal(heat_chain.dimension)
        coeffs = arkc_coefficients(11, 0.15)

        np.testing.assert_allclose(step_arkc(heat_chain, y0, 2e-3, coeffs),
                                   step_rkc(heat_chain, y0, 2e-3, coeffs), rtol=1e-13, atol=1e-13)

    def test_ad1_reduces_to_cheb1_without_advection(self, heat_chain, rng):
        y0 = rng.standard_normal(heat_chain.dimension)
        coeffs = cheb1_coefficients(6, 0.05)

        np.testing.assert_allclose(step_ad1(heat_chain, y0, 5e-3, coeffs),
                                   step_cheb1(heat_chain, y0, 5e-3, coeffs), rtol=1e-13, atol=1e-13)

    def test_workspace_dimension_mismatch_rejected(self, heat_chain):
        with pytest.raises(InvalidParameterError):
            step_arkc(heat_chain, np.ones(heat_chain.dimension), 1e-3, arkc_coefficients(3, 0.15),
                      StepWorkspace(heat_chain.dimension + 1))

    def test_wrong_coefficient_family_rejected(self, heat_chain):
        with pytest.raises(InvalidParameterError):
            step_arkc(heat_chain, np.ones(heat_chain.dimension), 1e-3, cheb1_coefficients(3))

    def test_bad_output_shape_rejected(self):
        problem = ProblemFactory.create_bad_shape_problem()

        with pytest.raises(InvalidParameterError):
            step_cheb1(problem, np.ones(problem.dimension), 1e-3, cheb1_coefficients(2))

    @pytest.mark.parametrize("h", [0.0, -1e-3, float("inf")])
    def test_non_positive_step_rejected(self, h, heat_chain):
        with pytest.raises(InvalidParameterError):
            step_rkc(heat_chain, np.ones(heat_chain.dimension), h, arkc_coefficients(3))


class TestStabilityPolynomialIdentities:
    """One step of a scalar split problem reproduces the scheme's stability polynomial"""

    @pytest.fixture(autouse=True)
    def setup_logger(self):
        self.logger = logging.getLogger(self.__class__.__name__)

    @pytest.mark.property
    @pytest.mark.parametrize("s, eta", [(2, 0.15), (5, 1.5), (20, 0.15), (20, 10.0), (60, 3.0)])
    def test_arkc_step_matches_r2(self, s, eta, rng):
        length = arkc_coefficients(s, eta).real_stability_length
        p_values = -length * rng.random(20)
        q_values = rng.uniform(-1.5, 1.5, 20) * np.sqrt(-p_values)
        for p, q in zip(p_values, q_values):
            problem = ProblemFactory.create_scalar_problem(p, q)
            y1 = step_arkc(problem, np.array([1.0, 0.0]), 1.0, arkc_coefficients(s, eta))
            expected = eval_R2(p, q, s, eta).value

            assert abs(complex(y1[0], y1[1]) - expected) <= 1e-11 * max(1.0, abs(expected))

    @pytest.mark.property
    def test_arkc_step_matches_r2_on_random_samples(self, rng):
        stages = rng.integers(2, 61, 500)
        etas = rng.uniform(0.15, 10.0, 500)
        worst = 0.0
        for s, eta in zip(stages, etas):
            coefficients = arkc_coefficients(int(s), float(eta))
            p = -coefficients.real_stability_length * rng.random()
            q = rng.uniform(-1.0, 1.0) * np.sqrt(-p)
            y1 = step_arkc(ProblemFactory.create_scalar_problem(p, q), np.array([1.0, 0.0]), 1.0, coefficients)
            expected = eval_R2(p, q, int(s), float(eta)).value
            worst = max(worst, abs(complex(y1[0], y1[1]) - expected) / max(1.0, abs(expected)))

        self.logger.info("Step against polynomial", extra={"samples": 500, "worst_relative": worst})
        assert worst <= 1e-11

    @pytest.mark.property
    @pytest.mark.parametrize("s", [5, 13, 20])
    def test_realized_amplification_inside_scanned_region(self, s, rng):
        eta = select_damping(0.5, s)
        scan = scan_region("arkc", s, eta)
        pp, qq = np.meshgrid(scan.p_values, scan.q_values)
        inside = np.flatnonzero(scan.grid <= 1.0)
        picks = rng.choice(inside, size=200, replace=False)

        coefficients = arkc_coefficients(s, eta)
        moduli = []
        for p, q in zip(pp.ravel()[picks], qq.ravel()[picks]):
            y1 = step_arkc(ProblemFactory.create_scalar_problem(float(p), float(q)), np.array([1.0, 0.0]), 1.0,
                           coefficients)
            moduli.append(float(np.hypot(y1[0], y1[1])))

        self.logger.info("Realized amplification", extra={"s": s, "eta": eta, "max_modulus": max(moduli)})
        assert max(moduli) <= 1.0 + 1e-9

    @pytest.mark.property
    @pytest.mark.parametrize("s, eta", [(1, 0.05), (2, 0.05), (6, 0.05), (25, 0.5)])
    def test_ad1_step_matches_r1(self, s, eta, rng):
        length = cheb1_coefficients(s, eta).real_stability_length
        for p, q in zip(-length * rng.random(20), rng.uniform(-s, s, 20)):
            problem = ProblemFactory.create_scalar_problem(p, q)
            y1 = step_ad1(problem, np.array([1.0, 0.0]), 1.0, cheb1_coefficients(s, eta))
            expected = eval_R1(p, q, s, eta).value

            assert abs(complex(y1[0], y1[1]) - expected) <= 1e-11 * max(1.0, abs(expected))


class TestFixedStepIntegration:

    @pytest.fixture(autouse=True)
    def setup_logger(self):
        self.logger = logging.getLogger(self.__class__.__name__)

    @staticmethod
    def _observed_order(problem, matrices, scheme, s, eta, y0):
        exact = expm((matrices["D"] + matrices["A"]) * 0.5) @ y0
        errors = []
        for n_steps in (160, 320, 640):
            report = integrate_fixed(problem, y0, (0.0, 0.5), n_steps, scheme, s, eta)
            errors.append(float(np.max(np.abs(report.final_state - exact))))
        return np.log2(errors[-2] / errors[-1]), errors

    @pytest.mark.regression
    @pytest.mark.parametrize("scheme, s, eta, expected", [
        (Scheme.ARKC, 8, 0.15, 2.0),
        (Scheme.RKC, 8, 0.15, 2.0),
        (Scheme.AD1, 10, 0.05, 1.0),
        (Scheme.CHEB1, 10, 0.05, 1.0),
    ])
    def test_observed_order_on_noncommuting_split(self, scheme, s, eta, expected, linear_split_problem):
        problem, matrices = linear_split_problem
        y0 = np.linspace(1.0, -1.0, problem.dimension)

        order, errors = self._observed_order(problem, matrices, scheme, s, eta, y0)

        self.logger.info("Observed order", extra={
            "scheme": scheme.value,
            "order": order,
            "errors": errors
        })
        assert order == pytest.approx(expected, abs=0.3)

    def test_counters_accumulate_over_steps(self, linear_split_problem):
        problem, _ = linear_split_problem
        report = integrate_fixed(problem, np.ones(problem.dimension), (0.0, 0.1), 7, "arkc", 4)

        assert report.steps_accepted == 7
        assert report.fd_evals == 7 * (4 + 2)
        assert report.fa_evals == 7 * 3
        assert report.s_max == 4

    def test_trajectory_recorded_on_request(self, heat_chain):
        report = integrate_fixed(heat_chain, np.ones(heat_chain.dimension), (0.0, 0.01), 5, "rkc", 6,
                                 record_trajectory=True)

        times = [t for t, _ in report.trajectory_samples]
        assert times == pytest.approx([0.0, 0.002, 0.004, 0.006, 0.008, 0.01])

    def test_divergence_reports_step_index(self, heat_chain):
        with pytest.raises(DivergenceError) as exc_info:
            integrate_fixed(heat_chain, np.ones(heat_chain.dimension), (0.0, 1000.0), 200, "cheb1", 2)

        self.logger.info("Divergence detected", extra={
            "stage": exc_info.value.stage,
            "step_index": exc_info.value.step_index
        })
        assert exc_info.value.step_index is not None

    def test_arkc_correction_divergence_flagged_at_stage_zero(self):
        problem = ProblemFactory.create_blowup_problem()

        with pytest.raises(DivergenceError) as exc_info:
            step_arkc(problem, np.ones(2), 1.0, arkc_coefficients(3, 0.15))
        assert exc_info.value.stage == 0

    @pytest.mark.parametrize("n_steps", [0, -3, 2.5])
    def test_invalid_step_count_rejected(self, n_steps, heat_chain):
        with pytest.raises(InvalidParameterError):
            integrate_fixed(heat_chain, np.ones(heat_chain.dimension), (0.0, 1.0), n_steps, "rkc", 3)

    def test_scheme_coefficients_pick_family(self):
        assert scheme_coefficients("ad1", 4).eta == pytest.approx(0.05)
        assert scheme_coefficients(Scheme.ARKC, 4).eta == pytest.approx(0.15)
