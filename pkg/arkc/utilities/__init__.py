from .step_tracker import StepRecord, StepTracker
from .helpers import timing_context, log_step

__all__ = ['StepRecord', 'StepTracker', 'timing_context', 'log_step']
