"""
Helper utilities for timing and logging CLI commands and long numerical runs.
"""
import time
import logging
from contextlib import contextmanager
from functools import wraps
from typing import Optional


@contextmanager
def timing_context(operation_name: str, logger: Optional[logging.Logger] = None):
    """Context manager for timing operations"""
    if logger is None:
        logger = logging.getLogger('arkc.utilities.timing')

    start_time = time.perf_counter()
    logger.debug(f"Starting {operation_name}")

    try:
        yield
    finally:
        duration = time.perf_counter() - start_time
        logger.info(f"{operation_name} completed in {duration:.2f}s", extra={
            "event": "timing",
            "operation": operation_name,
            "duration_seconds": round(duration, 3)
        })


def log_step(step_name: str, logger: Optional[logging.Logger] = None):
    """Decorator to log the start, completion and failure of a command step"""

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            step_logger = logger or logging.getLogger('arkc.utilities.steps')
            step_logger.info(f"STEP: {step_name}", extra={"event": "step_start", "step": step_name})

            try:
                result = func(*args, **kwargs)
                step_logger.info(f"STEP COMPLETED: {step_name}", extra={
                    "event": "step_completed",
                    "step": step_name
                })
                return result
            except Exception as e:
                step_logger.error(f"STEP FAILED: {step_name} - {str(e)}", extra={
                    "event": "step_failed",
                    "step": step_name,
                    "error_type": type(e).__name__
                })
                raise

        return wrapper

    return decorator
