"""
Damping tables and stage selection for the adaptive ARKC driver.

A table is keyed by the ratio rho_A / sqrt(rho_D), which measures how far the
advection eigenvalues reach into the imaginary direction relative to the diffusion
ones (q ~ c*sqrt(-p) on the p-q plane). Each ratio band maps stage intervals to the
smallest damping eta that keeps the curve q = c*sqrt(-p) inside the stability region.
"""

import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterator, Optional, Sequence, Tuple

from arkc.coeffs import arkc_coefficients
from arkc.constants import SolverConstants
from arkc.exceptions import InvalidParameterError, StageCapExceededError, validate_stage_count
from config.settings import settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StageBand:
    """Stage counts up to s_upper (inclusive, from the previous band's edge) use eta"""
    s_upper: int
    eta: float


@dataclass(frozen=True)
class RatioBand:
    """Damping schedule for ratios nearest to `nominal`"""
    nominal: float
    stage_bands: Tuple[StageBand, ...]
    label: str = ""

    def eta_for(self, s: int) -> float:
        for band in self.stage_bands:
            if s <= band.s_upper:
                return band.eta
        return self.stage_bands[-1].eta


@dataclass(frozen=True)
class TableEntry:
    """One (ratio band, stage band) cell, checked at the stage band's upper edge"""
    label: str
    nominal: float
    s_upper: int
    eta: float


@dataclass(frozen=True)
class DampingTable:
    """
    Ordered ratio bands with contiguous stage bands covering [2, s_cap].

    Lookup uses the band whose nominal ratio is nearest; the returned eta is the
    largest one among that band and every band with a smaller nominal ratio, which
    keeps eta nondecreasing both in s and in the ratio.
    """
    name: str
    bands: Tuple[RatioBand, ...]
    s_cap: int = SolverConstants.STAGE_CAP

    def __post_init__(self):
        nominals = [band.nominal for band in self.bands]
        if nominals != sorted(nominals):
            raise InvalidParameterError("bands", nominals, "nominal ratios must be increasing")
        for band in self.bands:
            edges = [entry.s_upper for entry in band.stage_bands]
            if not edges or edges != sorted(edges) or edges[-1] < self.s_cap:
                raise InvalidParameterError("stage_bands", edges,
                                            f"must be increasing and reach s_cap={self.s_cap}")

    def band_index(self, rho_ratio: float) -> int:
        rho_ratio = float(rho_ratio)
        if math.isnan(rho_ratio) or rho_ratio < 0.0:
            raise InvalidParameterError("rho_ratio", rho_ratio, "must be >= 0")
        if math.isinf(rho_ratio):
            return len(self.bands) - 1
        distances = [abs(rho_ratio - band.nominal) for band in self.bands]
        return distances.index(min(distances))

    def lookup(self, rho_ratio: float, s: int) -> float:
        s = validate_stage_count(s, minimum=SolverConstants.MIN_STAGES, cap=self.s_cap)
        chosen = self.band_index(rho_ratio)
        return max(band.eta_for(s) for band in self.bands[:chosen + 1])

    def entries(self) -> Iterator[TableEntry]:
        for band in self.bands:
            for stage_band in band.stage_bands:
                yield TableEntry(band.label or f"{band.nominal:g}", band.nominal,
                                 stage_band.s_upper, stage_band.eta)

    def with_entry(self, nominal: float, s_upper: int, eta: float) -> "DampingTable":
        """Copy of the table with one cell replaced"""
        bands = []
        for band in self.bands:
            if band.nominal == nominal:
                stage_bands = tuple(StageBand(b.s_upper, eta) if b.s_upper == s_upper else b
                                    for b in band.stage_bands)
                band = replace(band, stage_bands=stage_bands)
            bands.append(band)
        return replace(self, bands=tuple(bands))


def _band(nominal: float, label: str, pairs: Sequence[Tuple[int, float]]) -> RatioBand:
    return RatioBand(nominal=nominal, stage_bands=tuple(StageBand(s, eta) for s, eta in pairs), label=label)


ARKC_DAMPING = DampingTable(
    name="arkc",
    bands=(
        # Pe <= 0.1: fixed damping up to s=200
        _band(0.05, "1/20", [(200, 0.15), (500, 0.6)]),
        _band(0.25, "1/4", [(30, 0.2), (60, 0.45), (110, 1.0), (160, 1.5), (260, 2.4),
                            (360, 3.0), (500, 4.0)]),
        _band(0.5, "1/2", [(10, 0.15), (20, 0.6), (30, 1.0), (40, 1.4), (50, 1.7), (60, 2.1),
                           (70, 2.4), (80, 2.7), (90, 3.0), (100, 3.3), (120, 3.7), (140, 4.1),
                           (160, 4.5), (180, 4.9), (200, 5.3), (250, 6.0), (300, 6.6),
                           (400, 7.7), (500, 8.8)]),
        _band(0.75, "3/4", [(10, 0.7), (20, 1.5), (30, 2.3), (40, 2.9), (50, 3.5), (60, 4.0),
                            (70, 4.5), (80, 4.9), (90, 5.2), (100, 5.5), (140, 6.7), (180, 7.7),
                            (250, 8.8), (300, 9.8), (400, 11.0), (500, 12.0)]),
        _band(1.0, "1", [(10, 1.0), (20, 2.5), (30, 3.5), (50, 4.8), (70, 6.0), (110, 7.8),
                         (150, 9.0), (310, 12.5), (500, 15.0)]),
        _band(math.sqrt(2.0), "sqrt2", [(10, 2.0), (20, 3.8), (30, 5.0), (50, 6.8), (70, 8.0),
                                        (110, 10.4), (150, 12.0), (310, 16.0), (500, 19.0)]),
        _band(2.0, ">=2", [(10, 4.0), (30, 9.0), (70, 13.5), (150, 18.0), (310, 23.0), (500, 27.0)]),
    ),
)

# Small constant damping everywhere; the plain RKC choice used as comparison baseline
FIXED_RKC_DAMPING = DampingTable(
    name="fixed-rkc",
    bands=(_band(0.05, "any", [(SolverConstants.STAGE_CAP, SolverConstants.DEFAULT_ETA_SECOND_ORDER)]),),
)


def select_damping(rho_ratio: float, s: int, table: DampingTable = ARKC_DAMPING) -> float:
    """
    Damping eta for stage count s at ratio rho_A/sqrt(rho_D).

    Raises:
        StageCapExceededError: If s is above the table's cap
    """
    return table.lookup(rho_ratio, s)


@lru_cache(maxsize=settings.COEFF_CACHE_SIZE)
def real_length(s: int, eta: float) -> float:
    """(1 + omega0)/omega2 of the second-order recurrence"""
    return arkc_coefficients(s, eta).real_stability_length


def select_stages(h: float, rho_d: float, rho_ratio: float,
                  table: DampingTable = ARKC_DAMPING) -> Tuple[int, float]:
    """
    Smallest s in [2, s_cap] with (1 + omega0)/omega2 > h*rho_D, eta re-evaluated at each candidate.

    The scan starts at floor(sqrt(1.5*h*rho_D)); no stage count below it can qualify
    since the real length never exceeds (2/3)*s^2.

    Raises:
        StageCapExceededError: If even s_cap does not cover h*rho_D
    """
    h_times_rho = float(h) * float(rho_d)
    if not math.isfinite(h_times_rho) or h_times_rho < 0.0:
        raise InvalidParameterError("h_times_rho", h_times_rho, "must be finite and >= 0")

    start = max(SolverConstants.MIN_STAGES, int(math.floor(math.sqrt(1.5 * h_times_rho))))
    for s in range(start, table.s_cap + 1):
        eta = table.lookup(rho_ratio, s)
        if real_length(s, eta) > h_times_rho:
            return s, eta

    logger.warning("No stage count covers the diffusion spectrum", extra={
        "event": "stage_cap",
        "h_times_rho": h_times_rho,
        "cap": table.s_cap
    })
    raise StageCapExceededError(h_times_rho=h_times_rho, cap=table.s_cap)


def max_step_at_cap(rho_d: float, rho_ratio: float, table: DampingTable = ARKC_DAMPING,
                    margin: Optional[float] = None) -> float:
    """Largest step the capped stage count still covers, shrunk by a safety margin"""
    margin = SolverConstants.STAGE_CAP_STEP_MARGIN if margin is None else margin
    eta = table.lookup(rho_ratio, table.s_cap)
    return margin * real_length(table.s_cap, eta) / float(rho_d)
