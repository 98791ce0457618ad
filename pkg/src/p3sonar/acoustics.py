"""Underwater sampling physics: sound speed, per-sample range resolution,
maximum range, and inversion from a desired range to a sampling plan.

All quantities are plain SI floats. The sample period is kept as an exact
real number of seconds here; quantization to hardware ticks happens at the
protocol layer only.
"""

from dataclasses import dataclass

__all__ = [
    "WaterConditions",
    "SamplingPlan",
    "sound_speed",
    "sample_distance",
    "max_range",
    "plan_for_range",
]

# Physically plausible envelopes; construction outside these is rejected.
TEMP_RANGE_C = (-2.0, 40.0)
SALINITY_RANGE_PSU = (0.0, 42.0)


@dataclass(frozen=True)
class WaterConditions:
    """Environmental state that fixes the speed of sound.

    Attributes:
        temperature_c: water temperature in degrees Celsius, [-2, 40]
        salinity_psu: salinity in practical salinity units, [0, 42]
        depth_m: sensor depth below the surface in meters, >= 0
    """

    temperature_c: float
    salinity_psu: float = 0.0
    depth_m: float = 0.0

    def __post_init__(self) -> None:
        lo, hi = TEMP_RANGE_C
        if not lo <= self.temperature_c <= hi:
            raise ValueError(
                f"temperature_c must be in [{lo}, {hi}], got {self.temperature_c}"
            )
        lo, hi = SALINITY_RANGE_PSU
        if not lo <= self.salinity_psu <= hi:
            raise ValueError(
                f"salinity_psu must be in [{lo}, {hi}], got {self.salinity_psu}"
            )
        if self.depth_m < 0:
            raise ValueError(f"depth_m must be >= 0, got {self.depth_m}")


@dataclass(frozen=True)
class SamplingPlan:
    """One resolved sampling configuration.

    ``sample_distance_m`` and ``max_range_m`` are derived and must be
    consistent with the primary fields; construction re-checks that.
    """

    sound_speed_mps: float
    sample_period_s: float
    sample_count: int
    sample_distance_m: float
    max_range_m: float

    def __post_init__(self) -> None:
        for name in ("sound_speed_mps", "sample_period_s", "sample_distance_m",
                     "max_range_m"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.sample_count <= 0:
            raise ValueError("sample_count must be strictly positive")
        if self.sample_distance_m != sample_distance(
                self.sound_speed_mps, self.sample_period_s):
            raise ValueError("sample_distance_m inconsistent with c and period")
        if self.max_range_m != self.sample_distance_m * self.sample_count:
            raise ValueError("max_range_m inconsistent with distance and count")

    @classmethod
    def from_period(cls, sound_speed_mps: float, sample_period_s: float,
                    sample_count: int) -> "SamplingPlan":
        """Build a plan from the primary fields, deriving the rest."""
        dist = sample_distance(sound_speed_mps, sample_period_s)
        return cls(
            sound_speed_mps=sound_speed_mps,
            sample_period_s=sample_period_s,
            sample_count=sample_count,
            sample_distance_m=dist,
            max_range_m=dist * sample_count,
        )


def sound_speed(cond: WaterConditions) -> float:
    """Speed of sound in water (m/s) for the given conditions.

    Empirical polynomial in temperature with linear salinity and depth
    corrections; freshwater at 0 degC gives 1410 m/s.
    """
    t = cond.temperature_c
    return (1410.0 + 4.21 * t - 0.037 * t * t
            + 1.1 * cond.salinity_psu + 0.018 * cond.depth_m)


def sample_distance(sound_speed_mps: float, sample_period_s: float) -> float:
    """Range covered by one echo sample: c * period / 2 (two-way travel)."""
    if sound_speed_mps < 0:
        raise ValueError("sound speed must be >= 0")
    if sample_period_s < 0:
        raise ValueError("sample period must be >= 0")
    return sound_speed_mps * sample_period_s / 2.0


def max_range(sample_distance_m: float, sample_count: int) -> float:
    """Total range spanned by ``sample_count`` samples of the given distance."""
    if sample_count < 0:
        raise ValueError("sample count must be >= 0")
    return sample_distance_m * sample_count


def plan_for_range(desired_range_m: float, cond: WaterConditions,
                   sample_count: int) -> SamplingPlan:
    """Invert the range equations: pick the sample period that makes
    ``sample_count`` samples span exactly ``desired_range_m``.
    """
    if desired_range_m <= 0:
        raise ValueError("desired range must be > 0")
    if sample_count <= 0:
        raise ValueError("sample count must be > 0")
    c = sound_speed(cond)
    period = 2.0 * desired_range_m / (c * sample_count)
    return SamplingPlan.from_period(c, period, sample_count)
