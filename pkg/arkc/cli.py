"""
Command-line harness: runs the benchmark experiments and exports CSV/JSON artifacts.

    python -m arkc integrate      --problem burgers --tol 1e-4
    python -m arkc stability      --scheme arkc --s 20 --eta 0.15
    python -m arkc table2         --a 0.1 2 --tol 1e-2 1e-5 --workers 4
    python -m arkc convergence    --problem burgers --scheme arkc
    python -m arkc cost-curve     --problem burgers
    python -m arkc verify-tables
    python -m arkc peclet-trace   --n 100

Exit codes: 0 success, 1 invalid arguments, 2 numerical failure, 3 verification failure.
"""

import argparse
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

from arkc.adaptive import AdaptiveConfig, integrate_adaptive, select_fixed_stages
from arkc.constants import ExitCodes, LoggingConstants, PublishedBenchmarks, ReportColumns
from arkc.damping import ARKC_DAMPING, DampingTable
from arkc.exceptions import (
    InvalidParameterError,
    StabilizedSolverError,
    VerificationError,
)
from arkc.integrators import IntegrationReport, Scheme, integrate_fixed
from arkc.problems import (
    BurgersReaction1D,
    LinearAdvectionDiffusion1D,
    peclet_trace,
    reference_solution,
    reference_trajectory,
    write_trajectory_csv,
)
from arkc.stability import GridSpec, curve_profile, scan_region, verify_all_tables
from arkc.utilities.helpers import log_step, timing_context
from arkc.utilities.report_writer import (
    STABILITY_METRICS_SCHEMA,
    TABLE2_ROW_SCHEMA,
    validate_record,
    write_csv,
    write_json,
)
from config.settings import settings

logger = logging.getLogger(__name__)

ProblemName = Literal["linear-ad", "burgers"]

DEFAULT_CELLS = {"linear-ad": 150, "burgers": 100}
# Coarsest level of the convergence study (number of steps over [0, t_end])
DEFAULT_BASE_STEPS = {"linear-ad": 640, "burgers": 400}
DEFAULT_PECLET_SAMPLES = 51
DEFAULT_ADVECTION = 0.1


class RunSpec(BaseModel):
    """Validated arguments of one CLI invocation"""
    model_config = ConfigDict(frozen=True)

    command: Literal["integrate", "stability", "table2", "convergence", "cost-curve",
                     "verify-tables", "peclet-trace"]
    problem: ProblemName = "linear-ad"
    a: Optional[List[float]] = None
    n: Optional[int] = None
    tol: Optional[List[float]] = None
    scheme: Scheme = Scheme.ARKC
    fixed_steps: Optional[int] = None
    stages: Optional[int] = None
    eta: Optional[float] = None
    levels: int = 5
    base_steps: Optional[int] = None
    s: int = 20
    grid: Tuple[int, int] = (800, 400)
    curve: Optional[float] = None
    sample_times: List[float] = []
    trace: bool = False
    workers: int = 1
    out: Optional[str] = None
    format: Literal["csv", "json"] = settings.DEFAULT_FORMAT
    seed: int = settings.DEFAULT_SEED

    @field_validator("tol")
    @classmethod
    def _tolerances(cls, values: Optional[List[float]]) -> Optional[List[float]]:
        if values is None:
            return values
        if not values:
            raise ValueError("at least one tolerance is required")
        for tol in values:
            if not 0.0 < tol < 1.0:
                raise ValueError(f"tolerance {tol} must lie in (0, 1)")
        return values

    @field_validator("a")
    @classmethod
    def _advection(cls, values: Optional[List[float]]) -> Optional[List[float]]:
        if values is not None and any(not math.isfinite(v) or v < 0.0 for v in values):
            raise ValueError("advection speeds must be finite and >= 0")
        return values

    @field_validator("levels", "workers")
    @classmethod
    def _at_least_one(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be >= 1")
        return value

    @property
    def n_cells(self) -> int:
        return self.n if self.n is not None else DEFAULT_CELLS[self.problem]

    @property
    def advection(self) -> float:
        return self.a[0] if self.a else DEFAULT_ADVECTION


@dataclass
class CommandResult:
    """Rows of one command plus what is needed to serialize them"""
    command: str
    rows: List[Dict[str, Any]]
    columns: Sequence[str]
    exit_code: int = ExitCodes.SUCCESS
    provenance: Optional[str] = None
    metrics: Dict[str, Any] = field(default_factory=dict)


class _ArgumentParser(argparse.ArgumentParser):
    """Raises instead of exiting so that bad arguments map to exit code 1"""

    def error(self, message: str):
        raise InvalidParameterError("arguments", " ".join(sys.argv[1:]), message)


def setup_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> logging.Logger:
    """Configure console (and optional file) logging for the CLI"""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    log_file = settings.LOG_FILE if log_file is None else log_file
    if log_file:
        handlers.append(logging.FileHandler(log_file, mode="a", encoding="utf-8"))

    logging.basicConfig(
        level=getattr(logging, (level or settings.LOG_LEVEL).upper(), logging.INFO),
        format=LoggingConstants.LOG_FORMAT,
        datefmt=LoggingConstants.LOG_DATE_FORMAT,
        handlers=handlers,
        force=True
    )
    return logging.getLogger("arkc")


def build_problem(name: str, n_cells: int, advection: float = 0.1):
    """Benchmark model for a problem name"""
    if name == "linear-ad":
        return LinearAdvectionDiffusion1D(n_cells=n_cells, advection=advection)
    if name == "burgers":
        return BurgersReaction1D(n_cells=n_cells)
    raise InvalidParameterError("problem", name, "must be 'linear-ad' or 'burgers'")


def _reference(model, problem, y0: np.ndarray) -> np.ndarray:
    if isinstance(model, LinearAdvectionDiffusion1D):
        return model.exact_solution(model.t_end, y0)
    return reference_solution(problem, y0, model.t_end)


def _row_failed(extra: Dict[str, Any], error: Exception) -> Dict[str, Any]:
    row = {"steps": 0, "fd_evals": 0, "fa_evals": 0, "s_max": 0, "linf_error": None,
           "status": f"failed: {type(error).__name__}"}
    row.update(extra)
    return row


def within_benchmark_bands(a: float, tol: float, report: IntegrationReport) -> Optional[bool]:
    """Steps within +-25%, fd_evals within +-30% and error at most 10x the published ARKC row"""
    published = PublishedBenchmarks.TABLE2_ARKC.get((a, tol))
    if published is None or report.final_error_vs_reference is None:
        return None
    steps, fd_evals, _, _, error = published
    return (abs(report.steps_accepted - steps) <= PublishedBenchmarks.STEPS_BAND * steps
            and abs(report.fd_evals - fd_evals) <= PublishedBenchmarks.EVALS_BAND * fd_evals
            and report.final_error_vs_reference <= PublishedBenchmarks.ERROR_FACTOR * error)


def run_table2_row(a: float, tol: float, n_cells: int = 150, trace: bool = False) -> Dict[str, Any]:
    """One (a, tol) row of the adaptive ARKC benchmark on the linear advection-diffusion problem"""
    model = LinearAdvectionDiffusion1D(n_cells=n_cells, advection=a)
    problem = model.to_problem()
    y0 = model.initial_state()
    try:
        config = AdaptiveConfig.from_tolerance(tol, (0.0, model.t_end))
        report = integrate_adaptive(problem, y0, config, reference=model.exact_solution(model.t_end, y0))
    except StabilizedSolverError as e:
        logger.error(f"table2 row a={a:g} tol={tol:g} failed: {e}", extra={
            "event": "row_failed",
            "a": a,
            "tol": tol
        })
        return _row_failed({"a": a, "tol": tol}, e)

    in_bands = within_benchmark_bands(a, tol, report)
    row = {
        "a": a,
        "tol": tol,
        "steps": report.steps_accepted,
        "fd_evals": report.fd_evals,
        "fa_evals": report.fa_evals,
        "s_max": report.s_max,
        "linf_error": report.final_error_vs_reference,
        "status": "incomplete" if report.incomplete else "ok",
        "within_bands": in_bands,
    }
    if in_bands is False:
        logger.warning(f"table2 row a={a:g} tol={tol:g} outside benchmark bands", extra={
            "event": "row_out_of_band",
            "a": a,
            "tol": tol,
            "steps": report.steps_accepted,
            "fd_evals": report.fd_evals,
            "trace": [record.to_dict() for record in report.trace]
        })
    if trace or in_bands is False:
        row["trace"] = [record.to_dict() for record in report.trace]
    return validate_record(row, TABLE2_ROW_SCHEMA)


def _run_batch(func: Callable[..., Dict[str, Any]], jobs: List[Tuple], workers: int) -> List[Dict[str, Any]]:
    """Run jobs, concurrently when workers > 1; results keep the input order"""
    if workers <= 1 or len(jobs) <= 1:
        return [func(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: func(*job), jobs))


@log_step("table2")
def cmd_table2(a_values: Sequence[float], tol_values: Sequence[float], n_cells: int = 150,
               trace: bool = False, workers: int = 1) -> CommandResult:
    jobs = [(a, tol, n_cells, trace) for a in a_values for tol in tol_values]
    rows = _run_batch(run_table2_row, jobs, workers)
    failed = any(row["status"] != "ok" for row in rows)
    return CommandResult(
        command="table2",
        rows=rows,
        columns=ReportColumns.TABLE2,
        exit_code=ExitCodes.NUMERICAL_FAILURE if failed else ExitCodes.SUCCESS,
        provenance=ReportColumns.TABLE2_PROVENANCE,
        metrics={"rows_within_bands": sum(1 for row in rows if row.get("within_bands"))},
    )


def convergence_slope(steps: Sequence[float], errors: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log(error) against log(h); None when every error vanishes"""
    pairs = [(h, e) for h, e in zip(steps, errors) if e > 0.0]
    if len(pairs) < 2:
        return None
    h_values, e_values = zip(*pairs)
    return float(np.polyfit(np.log(h_values), np.log(e_values), 1)[0])


@log_step("convergence")
def cmd_convergence(problem_name: str, scheme: Scheme, levels: int = 5, base_steps: Optional[int] = None,
                    n_cells: Optional[int] = None, advection: float = 0.1,
                    model=None) -> CommandResult:
    """
    Fixed-step errors at t_end for n = base_steps * 2^k, k = 0..levels-1.

    (s, eta) are chosen once for the coarsest step and kept on every level.
    """
    scheme = Scheme(scheme)
    if model is None:
        model = build_problem(problem_name, n_cells or DEFAULT_CELLS[problem_name], advection)
    base_steps = base_steps or DEFAULT_BASE_STEPS.get(problem_name, 400)
    problem = model.to_problem()
    y0 = model.initial_state()
    reference = _reference(model, problem, y0)

    s, eta = select_fixed_stages(problem, y0, model.t_end / base_steps, scheme)
    rows = []
    for level in range(levels):
        n_steps = base_steps * 2 ** level
        report = integrate_fixed(problem, y0, (0.0, model.t_end), n_steps, scheme, s, eta)
        rows.append({
            "n_steps": n_steps,
            "h": model.t_end / n_steps,
            "stages": s,
            "eta": eta,
            "linf_error": float(np.max(np.abs(report.final_state - reference))),
        })

    slope = convergence_slope([row["h"] for row in rows], [row["linf_error"] for row in rows])
    logger.info(f"Observed order {'exact' if slope is None else f'{slope:.3f}'}", extra={
        "event": "convergence_slope",
        "scheme": scheme.value,
        "slope": slope
    })
    return CommandResult(
        command="convergence",
        rows=rows,
        columns=ReportColumns.CONVERGENCE,
        metrics={"scheme": scheme.value, "problem": problem_name,
                 "slope": "exact" if slope is None else slope},
    )


@log_step("cost-curve")
def cmd_cost_curve(problem_name: str = "burgers",
                   tol_values: Sequence[float] = tuple(PublishedBenchmarks.COST_CURVE_TOLERANCES),
                   n_cells: Optional[int] = None, advection: float = 0.1,
                   workers: int = 1) -> CommandResult:
    """Accuracy against cost of the adaptive driver over a list of tolerances"""
    model = build_problem(problem_name, n_cells or DEFAULT_CELLS[problem_name], advection)
    problem = model.to_problem()
    y0 = model.initial_state()
    reference = _reference(model, problem, y0)

    def run(tol: float) -> Dict[str, Any]:
        config = AdaptiveConfig.from_tolerance(tol, (0.0, model.t_end))
        report = integrate_adaptive(problem, y0, config, reference=reference)
        return {"tol": tol, "linf_error": report.final_error_vs_reference, "steps": report.steps_accepted,
                "fd_evals": report.fd_evals, "fa_evals": report.fa_evals}

    rows = _run_batch(run, [(tol,) for tol in tol_values], workers)
    return CommandResult(command="cost-curve", rows=rows, columns=ReportColumns.COST_CURVE,
                         provenance="ARKC series only; PRKC and PIROCK curves are not reproduced")


@log_step("verify-tables")
def cmd_verify_tables(table: DampingTable = ARKC_DAMPING) -> CommandResult:
    results = verify_all_tables(table)
    rows = [result.to_row() for result in results]
    failures = [row for row in rows if not row["passed"]]
    if failures:
        logger.error(str(VerificationError(failures)), extra={
            "event": "verification_failed",
            "failed": len(failures)
        })
    return CommandResult(
        command="verify-tables",
        rows=rows,
        columns=ReportColumns.VERIFY,
        exit_code=ExitCodes.VERIFICATION_FAILURE if failures else ExitCodes.SUCCESS,
        metrics={"entries": len(rows), "failed": len(failures)},
    )


@log_step("stability")
def cmd_stability(scheme: str, s: int, eta: Optional[float] = None, grid: Tuple[int, int] = (800, 400),
                  curve: Optional[float] = None) -> CommandResult:
    eta = Scheme(scheme).default_eta if eta is None else eta
    if curve is not None:
        points = curve_profile(scheme, s, eta, curve)
        rows = [{"p": point.p, "q": point.q, "modulus": point.modulus} for point in points]
        metrics = {"scheme": scheme, "s": s, "eta": eta, "c": curve,
                   "max_modulus": max(row["modulus"] for row in rows)}
        return CommandResult(command="stability", rows=rows, columns=ReportColumns.STABILITY, metrics=metrics)

    try:
        grid_spec = GridSpec(p_points=grid[0], q_points=grid[1])
    except ValidationError as e:
        raise InvalidParameterError("grid", grid, e.errors()[0]["msg"]) from e
    scan = scan_region(scheme, s, eta, grid_spec)
    return CommandResult(command="stability", rows=scan.rows(), columns=ReportColumns.STABILITY,
                         metrics=validate_record(scan.metrics(), STABILITY_METRICS_SCHEMA))


@log_step("integrate")
def cmd_integrate(spec: RunSpec) -> CommandResult:
    """Adaptive run (first tolerance) or fixed-step run (--fixed-steps) of one problem"""
    model = build_problem(spec.problem, spec.n_cells, spec.advection)
    problem = model.to_problem()
    y0 = model.initial_state()
    t_span = (0.0, model.t_end)
    reference = _reference(model, problem, y0)

    if spec.fixed_steps is not None:
        h = model.t_end / spec.fixed_steps
        if spec.stages is None:
            s, eta = select_fixed_stages(problem, y0, h, spec.scheme)
            eta = eta if spec.eta is None else spec.eta
        else:
            s, eta = spec.stages, spec.eta
        report = integrate_fixed(problem, y0, t_span, spec.fixed_steps, spec.scheme, s, eta,
                                 record_trajectory=bool(spec.sample_times))
        report.final_error_vs_reference = float(np.max(np.abs(report.final_state - reference)))
    else:
        tol = spec.tol[0] if spec.tol else settings.DEFAULT_TOL
        config = AdaptiveConfig.from_tolerance(tol, t_span, seed=spec.seed)
        report = integrate_adaptive(problem, y0, config, record_trajectory=bool(spec.sample_times),
                                    reference=reference)

    rows = [{"x": float(x), "u": float(u)} for x, u in zip(model.x, report.final_state)]
    metrics = report.summary()
    if report.controller:
        metrics["controller"] = report.controller
    if spec.sample_times and report.trajectory_samples:
        samples = _nearest_samples(report.trajectory_samples, spec.sample_times)
        metrics["sample_times"] = [t for t, _ in samples]
        if spec.out:
            write_trajectory_csv(f"{spec.out}.trajectory.csv", model.x, samples)
    return CommandResult(
        command="integrate",
        rows=rows,
        columns=ReportColumns.PROFILE,
        exit_code=ExitCodes.NUMERICAL_FAILURE if report.incomplete else ExitCodes.SUCCESS,
        metrics=metrics,
    )


def _nearest_samples(samples: List[Tuple[float, np.ndarray]],
                     times: Sequence[float]) -> List[Tuple[float, np.ndarray]]:
    """Recorded states closest in time to each requested sample time"""
    recorded = np.array([t for t, _ in samples])
    chosen = []
    for t in times:
        index = int(np.argmin(np.abs(recorded - t)))
        chosen.append(samples[index])
    return chosen


@log_step("peclet-trace")
def cmd_peclet_trace(n_cells: int = 100, n_samples: int = DEFAULT_PECLET_SAMPLES) -> CommandResult:
    """Peclet number along the Burgers reference trajectory"""
    model = BurgersReaction1D(n_cells=n_cells)
    problem = model.to_problem()
    times = np.linspace(0.0, model.t_end, n_samples)
    trajectory = reference_trajectory(problem, model.initial_state(), times)
    rows = [{"t": t, "peclet": pe} for t, pe in peclet_trace(problem, trajectory)]
    return CommandResult(command="peclet-trace", rows=rows, columns=ReportColumns.PECLET)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="arkc", description="Stabilized Runge-Kutta-Chebyshev experiments")
    parser.add_argument("--log-level", default=None, help="Override ARKC_LOG_LEVEL")

    common = _ArgumentParser(add_help=False)
    common.add_argument("--out", help="Output file (stdout when omitted)")
    common.add_argument("--format", choices=["csv", "json"], default=settings.DEFAULT_FORMAT)
    common.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)

    problem_args = _ArgumentParser(add_help=False)
    problem_args.add_argument("--problem", choices=["linear-ad", "burgers"], default="linear-ad")
    problem_args.add_argument("--a", type=float, nargs="+", help="Advection speed(s)")
    problem_args.add_argument("--n", type=int, help="Number of grid points")
    problem_args.add_argument("--tol", type=float, nargs="+", help="Tolerance(s); defaults depend on the command")
    problem_args.add_argument("--workers", type=int, default=1, help="Concurrent batch rows")

    subparsers = parser.add_subparsers(dest="command", parser_class=_ArgumentParser)

    integrate = subparsers.add_parser("integrate", parents=[common, problem_args],
                                      help="Adaptive or fixed-step run of one problem")
    integrate.add_argument("--scheme", choices=[s.value for s in Scheme], default=Scheme.ARKC.value)
    integrate.add_argument("--fixed-steps", type=int)
    integrate.add_argument("--stages", type=int)
    integrate.add_argument("--eta", type=float)
    integrate.add_argument("--sample-times", type=float, nargs="+", default=[])

    stability = subparsers.add_parser("stability", parents=[common], help="Stability region or curve profile")
    stability.add_argument("--scheme", choices=["ad1", "arkc"], default="arkc")
    stability.add_argument("--s", type=int, default=20)
    stability.add_argument("--eta", type=float)
    stability.add_argument("--grid", type=int, nargs=2, default=[800, 400], metavar=("P", "Q"))
    stability.add_argument("--curve", type=float, help="Profile along q = c*sqrt(-p) instead of a raster")

    table2 = subparsers.add_parser("table2", parents=[common, problem_args],
                                   help="Adaptive ARKC counters on the linear advection-diffusion problem")
    table2.add_argument("--trace", action="store_true", help="Embed the controller trace of every row")

    convergence = subparsers.add_parser("convergence", parents=[common, problem_args],
                                        help="Observed order of a fixed-step scheme")
    convergence.add_argument("--scheme", choices=[s.value for s in Scheme], default=Scheme.ARKC.value)
    convergence.add_argument("--levels", type=int, default=5)
    convergence.add_argument("--base-steps", type=int)

    subparsers.add_parser("cost-curve", parents=[common, problem_args], help="Error against evaluations")
    subparsers.add_parser("verify-tables", parents=[common], help="Check every damping-table entry")

    peclet = subparsers.add_parser("peclet-trace", parents=[common], help="Peclet number along Burgers")
    peclet.add_argument("--n", type=int, default=100)
    return parser


def _spec_from_args(args: argparse.Namespace) -> RunSpec:
    values = {key: value for key, value in vars(args).items()
              if key not in ("log_level",) and value is not None}
    if "grid" in values:
        values["grid"] = tuple(values["grid"])
    try:
        return RunSpec(**values)
    except ValidationError as e:
        first = e.errors()[0]
        raise InvalidParameterError(".".join(str(part) for part in first["loc"]), first.get("input"),
                                    first["msg"]) from e


def run_command(spec: RunSpec) -> CommandResult:
    if spec.command == "table2":
        tol_values = spec.tol or PublishedBenchmarks.TABLE2_TOLERANCES
        a_values = spec.a or PublishedBenchmarks.TABLE2_A_VALUES
        return cmd_table2(a_values, tol_values, spec.n_cells, spec.trace, spec.workers)
    if spec.command == "convergence":
        return cmd_convergence(spec.problem, spec.scheme, spec.levels, spec.base_steps, spec.n_cells, spec.advection)
    if spec.command == "cost-curve":
        tol_values = spec.tol or PublishedBenchmarks.COST_CURVE_TOLERANCES
        return cmd_cost_curve(spec.problem, tol_values, spec.n_cells, spec.advection, spec.workers)
    if spec.command == "verify-tables":
        return cmd_verify_tables()
    if spec.command == "stability":
        return cmd_stability(spec.scheme.value, spec.s, spec.eta, spec.grid, spec.curve)
    if spec.command == "peclet-trace":
        return cmd_peclet_trace(spec.n_cells)
    return cmd_integrate(spec)


def emit(result: CommandResult, out: Optional[str], fmt: str) -> str:
    """Serialize a command result to `out`, or return the text for stdout"""
    if fmt == "json":
        record = {"command": result.command, "rows": result.rows, "metrics": result.metrics}
        if result.provenance:
            record["provenance"] = result.provenance
        return write_json(out, record)
    return write_csv(out, result.rows, result.columns, comment=result.provenance)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        setup_logging(args.log_level)
        if not args.command:
            parser.print_help()
            return ExitCodes.INVALID_ARGUMENTS
        spec = _spec_from_args(args)
        with timing_context(spec.command, logger):
            result = run_command(spec)
        text = emit(result, spec.out, spec.format)
    except SystemExit as e:
        return int(e.code or 0)
    except (InvalidParameterError, ValidationError) as e:
        logger.error(f"Invalid arguments: {e}", extra={"event": "invalid_arguments"})
        return ExitCodes.INVALID_ARGUMENTS
    except VerificationError as e:
        logger.error(str(e), extra={"event": "verification_failed"})
        return ExitCodes.VERIFICATION_FAILURE
    except StabilizedSolverError as e:
        logger.error(f"Numerical failure: {e}", extra={"event": "numerical_failure",
                                                        "error_type": type(e).__name__})
        return ExitCodes.NUMERICAL_FAILURE

    if spec.out is None:
        sys.stdout.write(text)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
