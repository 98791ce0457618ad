"""Scan data model and geometry: sector scan containers, polar/Cartesian
transforms, the bin-to-range convention, and rasterization of sweeps into
range-angle ("rect") and plan-view ("fan") grayscale images.

Angles are gradians throughout (400 per revolution, 0 = forward x-axis,
positive counterclockwise); radians appear only inside the trig helpers.
"""

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .acoustics import SamplingPlan

__all__ = [
    "Gain",
    "ScanConfig",
    "ScanLine",
    "Sweep",
    "CartesianPoint",
    "PolarSample",
    "grad_to_rad",
    "rad_to_grad",
    "to_polar",
    "to_cartesian",
    "bin_range",
    "nearest_bin",
    "rasterize_rect",
    "sweep_from_rect",
    "rasterize_fan",
]

GRAD_FULL_TURN = 400.0


class Gain(enum.IntEnum):
    """Receiver amplification setting. The pool experiments use G1."""

    G0 = 0
    G1 = 1
    G2 = 2


def grad_to_rad(angle_grad: float) -> float:
    return angle_grad * (2.0 * math.pi / GRAD_FULL_TURN)


def rad_to_grad(angle_rad: float) -> float:
    return angle_rad * (GRAD_FULL_TURN / (2.0 * math.pi))


@dataclass(frozen=True)
class ScanConfig:
    """Full configuration of one sector scan."""

    plan: SamplingPlan
    gain: Gain = Gain.G1
    sector_start_grad: int = -100
    sector_end_grad: int = 100
    angular_step_grad: int = 1

    def __post_init__(self) -> None:
        if self.sector_start_grad >= self.sector_end_grad:
            raise ValueError("sector_start_grad must be < sector_end_grad")
        if not (-200 <= self.sector_start_grad <= 200
                and -200 <= self.sector_end_grad <= 200):
            raise ValueError("sector bounds must lie in [-200, 200] gradians")
        if self.angular_step_grad < 1:
            raise ValueError("angular_step_grad must be >= 1")
        if (self.sector_end_grad - self.sector_start_grad) % self.angular_step_grad:
            raise ValueError("sector width must be divisible by angular step")
        if not 1 <= self.plan.sample_count <= 65535:
            raise ValueError("sample_count must be in [1, 65535]")

    @property
    def angles(self) -> range:
        """The arithmetic sequence of beam angles, start..end inclusive."""
        return range(self.sector_start_grad,
                     self.sector_end_grad + self.angular_step_grad,
                     self.angular_step_grad)

    @property
    def line_count(self) -> int:
        return (self.sector_end_grad - self.sector_start_grad) \
            // self.angular_step_grad + 1


@dataclass(frozen=True)
class ScanLine:
    """Echo intensities of a single beam, one uint8 per sample bin."""

    angle_grad: int
    intensities: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.intensities, dtype=np.uint8)
        arr.flags.writeable = False
        object.__setattr__(self, "intensities", arr)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScanLine):
            return NotImplemented
        return (self.angle_grad == other.angle_grad
                and np.array_equal(self.intensities, other.intensities))


@dataclass(frozen=True)
class Sweep:
    """One full sector scan: an ordered line per beam angle plus free-form
    metadata (scene id, seed, processed flag).
    """

    config: ScanConfig
    lines: tuple
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "lines", tuple(self.lines))
        expected = list(self.config.angles)
        got = [ln.angle_grad for ln in self.lines]
        if got != expected:
            raise ValueError(
                f"line angles {got[:3]}..{got[-3:] if got else []} do not form "
                f"the sector sequence {expected[0]}..{expected[-1]} "
                f"step {self.config.angular_step_grad}")
        n = self.config.plan.sample_count
        for ln in self.lines:
            if len(ln.intensities) != n:
                raise ValueError(
                    f"line at {ln.angle_grad} grad has {len(ln.intensities)} "
                    f"samples, config expects {n}")

    def __iter__(self) -> Iterator[ScanLine]:
        return iter(self.lines)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Sweep):
            return NotImplemented
        return (self.config == other.config
                and len(self.lines) == len(other.lines)
                and all(a == b for a, b in zip(self.lines, other.lines)))


@dataclass(frozen=True)
class CartesianPoint:
    """Point in the sonar frame: x forward, y lateral (left positive)."""

    x_m: float
    y_m: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x_m) and math.isfinite(self.y_m)):
            raise ValueError("coordinates must be finite")


@dataclass(frozen=True)
class PolarSample:
    """One intensity sample located in polar coordinates."""

    r_m: float
    theta_rad: float
    intensity: int

    def __post_init__(self) -> None:
        if self.r_m < 0:
            raise ValueError("r_m must be >= 0")
        if not -math.pi < self.theta_rad <= math.pi:
            raise ValueError("theta_rad must lie in (-pi, pi]")
        if not 0 <= self.intensity <= 255:
            raise ValueError("intensity must be in [0, 255]")


def to_polar(p: CartesianPoint) -> tuple[float, float]:
    """(x, y) -> (r, theta) with the full-quadrant arctangent.

    atan2 keeps the +-90 degree beams well defined where a naive arctan(y/x)
    is not; the origin maps to (0, 0) by convention.
    """
    r = math.hypot(p.x_m, p.y_m)
    theta = math.atan2(p.y_m, p.x_m) if r > 0 else 0.0
    return r, theta


def to_cartesian(r_m: float, theta_rad: float) -> CartesianPoint:
    """(r, theta) -> (r cos theta, r sin theta)."""
    if r_m < 0:
        raise ValueError("r_m must be >= 0")
    return CartesianPoint(r_m * math.cos(theta_rad), r_m * math.sin(theta_rad))


def bin_range(plan: SamplingPlan, index: int) -> float:
    """Physical range of sample bin ``index``: (index + 1) * sample distance.

    The convention makes the last bin land exactly on the plan's maximum
    range, so ``sample_count`` bins span it with no leftover.
    """
    if not 0 <= index < plan.sample_count:
        raise IndexError(
            f"bin index {index} out of range [0, {plan.sample_count})")
    return (index + 1) * plan.sample_distance_m


def nearest_bin(plan: SamplingPlan, range_m: float) -> int:
    """Index of the bin whose range is closest to ``range_m``, clamped."""
    i = int(round(range_m / plan.sample_distance_m)) - 1
    return min(max(i, 0), plan.sample_count - 1)


def rasterize_rect(sweep: Sweep) -> np.ndarray:
    """Native range-angle raster: row i = i-th line, col j = sample bin j."""
    return np.stack([ln.intensities for ln in sweep.lines])


def sweep_from_rect(raster: np.ndarray, config: ScanConfig,
                    metadata: dict | None = None) -> Sweep:
    """Inverse of :func:`rasterize_rect` for a raster of matching shape."""
    raster = np.asarray(raster, dtype=np.uint8)
    if raster.shape != (config.line_count, config.plan.sample_count):
        raise ValueError(
            f"raster shape {raster.shape} does not match config "
            f"({config.line_count}, {config.plan.sample_count})")
    lines = tuple(ScanLine(angle, raster[i])
                  for i, angle in enumerate(config.angles))
    return Sweep(config, lines, dict(metadata or {}))


def rasterize_fan(sweep: Sweep, pixels_per_meter: float) -> np.ndarray:
    """Plan-view occupancy projection of a sweep.

    Square raster with the sonar at the midpoint of the bottom edge; each
    sample is painted at its Cartesian position with nearest-pixel rounding
    and max-intensity compositing, so every nonzero output pixel carries an
    unmodified input intensity.
    """
    if pixels_per_meter <= 0:
        raise ValueError("pixels_per_meter must be > 0")
    plan = sweep.config.plan
    half = math.ceil(plan.max_range_m * pixels_per_meter)
    side = 2 * half + 1
    out = np.zeros((side, side), dtype=np.uint8)
    origin_row, origin_col = side - 1, half

    ranges = (np.arange(plan.sample_count) + 1) * plan.sample_distance_m
    for line in sweep.lines:
        theta = grad_to_rad(line.angle_grad)
        rows = origin_row - np.rint(ranges * math.cos(theta)
                                    * pixels_per_meter).astype(int)
        cols = origin_col - np.rint(ranges * math.sin(theta)
                                    * pixels_per_meter).astype(int)
        ok = (rows >= 0) & (rows < side) & (cols >= 0) & (cols < side)
        np.maximum.at(out, (rows[ok], cols[ok]), line.intensities[ok])
    return out
