"""Signal cleaning chain for raw sweeps: radial region-of-interest gating
followed by a per-line statistical threshold that keeps a sample only when
its intensity clears twice the line mean plus one standard deviation.

Suppressed samples are zeroed, never removed, so arrays stay rectangular
for rasterization; the kept index interval travels in sweep metadata.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .acoustics import SamplingPlan
from .scanmodel import ScanLine, Sweep

__all__ = [
    "RoiSpec",
    "LineStats",
    "ThresholdRule",
    "InsufficientSamplesError",
    "roi_interval",
    "roi_filter",
    "line_stats",
    "threshold_line",
    "preprocess_sweep",
]

DEFAULT_ROI_MIN_M = 0.75   # device minimum working range
DEFAULT_ROI_MAX_M = 6.0    # pool length


class InsufficientSamplesError(ValueError):
    """Raised when a region of interest holds fewer than two samples."""


class ThresholdRule(enum.Enum):
    """Reading of the retention condition (operator precedence choice)."""

    TWO_MU_PLUS_SIGMA = "2mu+sigma"      # keep if I >= 2*mu + sigma
    TWO_TIMES_MU_PLUS_SIGMA = "2(mu+sigma)"  # keep if I >= 2*(mu + sigma)

    def cutoff(self, mu: float, sigma: float) -> float:
        if self is ThresholdRule.TWO_MU_PLUS_SIGMA:
            return 2.0 * mu + sigma
        return 2.0 * (mu + sigma)


@dataclass(frozen=True)
class RoiSpec:
    """Radial interval of valid returns, in meters."""

    min_range_m: float = DEFAULT_ROI_MIN_M
    max_range_m: float = DEFAULT_ROI_MAX_M

    def __post_init__(self) -> None:
        if not 0 <= self.min_range_m < self.max_range_m:
            raise ValueError(
                f"need 0 <= min < max, got [{self.min_range_m}, {self.max_range_m}]")


@dataclass(frozen=True)
class LineStats:
    """Mean, sample standard deviation and sample count of one line's ROI."""

    mu: float
    sigma: float
    n_prime: int

    def __post_init__(self) -> None:
        if self.n_prime < 2:
            raise InsufficientSamplesError(
                f"need >= 2 ROI samples for a standard deviation, got {self.n_prime}")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")


def roi_interval(plan: SamplingPlan, roi: RoiSpec) -> tuple[int, int]:
    """Inclusive (first, last) bin indices whose range lies inside the ROI.

    Bin i sits at range (i+1) * sample_distance; the interval is empty-checked
    by the callers that need samples.
    """
    if roi.max_range_m > plan.max_range_m:
        raise ValueError(
            f"ROI max {roi.max_range_m} m exceeds plan range {plan.max_range_m} m")
    sd = plan.sample_distance_m
    # Start from the algebraic answer, then fix any float rounding so the
    # interval is exactly {i : min <= (i+1)*sd <= max}.
    first = max(0, math.ceil(roi.min_range_m / sd) - 1)
    while (first + 1) * sd < roi.min_range_m:
        first += 1
    while first > 0 and first * sd >= roi.min_range_m:
        first -= 1
    last = min(plan.sample_count - 1, math.floor(roi.max_range_m / sd) - 1)
    while last + 1 < plan.sample_count and (last + 2) * sd <= roi.max_range_m:
        last += 1
    while last >= 0 and (last + 1) * sd > roi.max_range_m:
        last -= 1
    if first > last:
        raise ValueError("ROI contains no sample bins")
    return first, last


def roi_filter(line: ScanLine, plan: SamplingPlan,
               roi: RoiSpec) -> tuple[ScanLine, tuple[int, int]]:
    """Zero every sample outside the ROI; returns the filtered line and the
    kept (first, last) index interval.
    """
    if len(line.intensities) != plan.sample_count:
        raise ValueError("line length does not match plan sample count")
    first, last = roi_interval(plan, roi)
    out = np.zeros_like(line.intensities)
    out[first:last + 1] = line.intensities[first:last + 1]
    return ScanLine(line.angle_grad, out), (first, last)


def line_stats(line: ScanLine, interval: tuple[int, int]) -> LineStats:
    """Mean and sample standard deviation (divisor N'-1) over ROI samples."""
    first, last = interval
    vals = line.intensities[first:last + 1].astype(np.float64)
    n = vals.size
    if n < 2:
        raise InsufficientSamplesError(
            f"ROI interval [{first}, {last}] holds {n} samples, need >= 2")
    mu = float(vals.mean())
    sigma = float(math.sqrt(((vals - mu) ** 2).sum() / (n - 1)))
    return LineStats(mu=mu, sigma=sigma, n_prime=n)


def threshold_line(line: ScanLine, stats: LineStats,
                   rule: ThresholdRule = ThresholdRule.TWO_MU_PLUS_SIGMA) -> ScanLine:
    """Keep samples meeting the statistical cutoff, zero the rest; kept
    samples retain their original value.

    Out-of-ROI samples are expected to be zero already (post ROI gate), so
    applying the cutoff to the whole line leaves them zero either way.
    """
    cutoff = rule.cutoff(stats.mu, stats.sigma)
    vals = line.intensities
    out = np.where(vals.astype(np.float64) >= cutoff, vals, 0).astype(np.uint8)
    return ScanLine(line.angle_grad, out)


def preprocess_sweep(sweep: Sweep, roi: RoiSpec | None = None,
                     rule: ThresholdRule = ThresholdRule.TWO_MU_PLUS_SIGMA) -> Sweep:
    """Run the full chain per line: ROI gate, line statistics, threshold.

    The output sweep is tagged ``processed=True`` and records the kept bin
    interval and rule in its metadata.
    """
    roi = roi or RoiSpec()
    out_lines = []
    interval = None
    for line in sweep.lines:
        gated, interval = roi_filter(line, sweep.config.plan, roi)
        stats = line_stats(gated, interval)
        out_lines.append(threshold_line(gated, stats, rule))
    meta = dict(sweep.metadata)
    meta.update(processed=True, roi_min_m=roi.min_range_m,
                roi_max_m=roi.max_range_m, roi_bins=list(interval),
                threshold_rule=rule.value)
    return Sweep(sweep.config, tuple(out_lines), meta)
