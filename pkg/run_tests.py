#!/usr/bin/env python3
"""
Test runner script with logging and reporting.
"""

import os
import sys
import subprocess
import argparse
import logging
from pathlib import Path
from datetime import datetime


def setup_logging():
    """Setup logging for the test runner"""
    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s | %(levelname)-8s | %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    return logging.getLogger(__name__)


def ensure_directories():
    """Ensure required directories exist"""
    log_dir = Path("tests/logs")
    reports_dir = Path("reports")
    log_dir.mkdir(parents=True, exist_ok=True)
    reports_dir.mkdir(parents=True, exist_ok=True)
    return log_dir, reports_dir


def run_tests(test_pattern=None, markers=None, verbose=True):
    """
    Run pytest as a subprocess

    Args:
        test_pattern: Specific test path or node id to run
        markers: Pytest marker expression to filter tests
        verbose: Enable verbose output
    """
    logger = setup_logging()
    ensure_directories()

    cmd = [sys.executable, "-m", "pytest"]
    if test_pattern:
        cmd.append(test_pattern)
    if markers:
        cmd.extend(["-m", markers])
    if verbose:
        cmd.append("-v")
    cmd.extend(["--tb=short", "--durations=10", "--color=yes"])

    logger.info(f"Running command: {' '.join(cmd)}")
    try:
        return subprocess.run(cmd, check=False).returncode
    except OSError as e:
        logger.error(f"Error running tests: {e}")
        return 1


def run_suite(title, markers=None):
    """Run a marker-selected part of the suite and log the outcome"""
    logger = setup_logging()
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    logger.info(f"Running {title}...")
    logger.info(f"Detailed logs will be in: tests/logs/test_run_{timestamp}.log")

    return_code = run_tests(test_pattern="tests/", markers=markers)

    if return_code == 0:
        logger.info(f"{title} passed")
    else:
        logger.warning(f"{title} completed with failures")
        logger.info("Check the detailed logs and reports for more information")
    return return_code


SUITES = {
    "full": ("Complete test suite", None),
    "fast": ("Fast test suite", "not slow"),
    "smoke": ("Smoke tests", "smoke"),
    "acceptance": ("Benchmark acceptance checks", "acceptance"),
    "regression": ("Numerical regression tests", "regression"),
    "negative": ("Negative test cases", "negative"),
    "cli": ("Command-line tests", "cli"),
}


def main():
    """Main test runner with command line options"""
    parser = argparse.ArgumentParser(description="ARKC integrator test runner")
    subparsers = parser.add_subparsers(dest="command", help="Test command to run")

    for name, (title, _) in SUITES.items():
        subparsers.add_parser(name, help=f"Run {title.lower()}")

    custom_parser = subparsers.add_parser("custom", help="Run custom test pattern")
    custom_parser.add_argument("pattern", help="Test pattern to run")
    custom_parser.add_argument("-m", "--markers", help="Pytest markers to filter")

    single_parser = subparsers.add_parser("single", help="Run single test")
    single_parser.add_argument("test", help="Specific test to run")

    args = parser.parse_args()

    if not args.command:
        parser.print_help()
        return 1

    if not os.path.exists("tests"):
        print("Error: tests directory not found. Please run from project root.")
        return 1

    if args.command in SUITES:
        title, markers = SUITES[args.command]
        return run_suite(title, markers)
    if args.command == "custom":
        return run_tests(test_pattern=args.pattern, markers=args.markers)
    return run_tests(test_pattern=args.test)


if __name__ == "__main__":
    sys.exit(main())
