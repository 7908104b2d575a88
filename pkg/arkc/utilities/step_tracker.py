"""
Step Tracker Utility
Records accept/reject decisions of the adaptive driver (the controller trace)
"""

import time
from dataclasses import dataclass, asdict
from typing import Any, Dict, List


@dataclass(frozen=True)
class StepRecord:
    """One attempted step of the adaptive driver"""
    attempt: int
    t: float
    h: float
    s: int
    eta: float
    err_norm: float
    accepted: bool
    rho_d: float
    rho_a: float
    reason: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class StepTracker:
    """
    Tracks the attempted steps of one integration
    Used by the adaptive driver and embedded in IntegrationReport as the controller trace
    """

    def __init__(self, run_name: str = "integration"):
        self.run_name = run_name
        self.records: List[StepRecord] = []
        self.start_time = time.time()

    def record_attempt(self, t: float, h: float, s: int, eta: float, err_norm: float,
                       accepted: bool, rho_d: float, rho_a: float, reason: str = "") -> StepRecord:
        """Record the outcome of one attempted step"""
        record = StepRecord(
            attempt=len(self.records),
            t=t, h=h, s=s, eta=eta,
            err_norm=err_norm,
            accepted=accepted,
            rho_d=rho_d, rho_a=rho_a,
            reason=reason
        )
        self.records.append(record)
        return record

    @property
    def accepted(self) -> int:
        return sum(1 for record in self.records if record.accepted)

    @property
    def rejected(self) -> int:
        return len(self.records) - self.accepted

    def get_summary(self) -> str:
        """Get a brief summary of the controller behaviour"""
        if not self.records:
            return "No steps recorded"

        total = len(self.records)
        acceptance_rate = (self.accepted / total) * 100
        return f"{acceptance_rate:.1f}% accepted ({self.accepted}/{total} attempts)"

    def get_metrics(self) -> Dict[str, Any]:
        """Get detailed controller metrics"""
        accepted_steps = [record for record in self.records if record.accepted]
        step_sizes = [record.h for record in accepted_steps]

        return {
            "run_name": self.run_name,
            "total_attempts": len(self.records),
            "accepted": len(accepted_steps),
            "rejected": self.rejected,
            "s_max": max((record.s for record in accepted_steps), default=0),
            "h_min": min(step_sizes, default=0.0),
            "h_max": max(step_sizes, default=0.0),
            "duration_seconds": round(time.time() - self.start_time, 2)
        }
