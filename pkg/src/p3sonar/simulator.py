"""Ray-cast acoustic simulation of the pool experiments.

The pool is modeled as a 2-D horizontal slice: a rectangle of water seen
from above, with the sonar at the midpoint of one short edge looking down
the length. Hung objects are opaque cross-beam segments at known forward
distances. Each beam deposits a first-hit echo pulse, a seeded ghost echo
beyond the wall (boundary multipath clutter), near-head rotation noise and
sparse speckle; everything behind the first opaque hit is acoustic shadow.

Every sample bin carries a provenance label, which is what replaces manual
annotation: the object mask of a simulated sweep is exact by construction.
"""

import enum
import hashlib
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .acoustics import SamplingPlan, WaterConditions, plan_for_range
from .scanmodel import Gain, ScanConfig, ScanLine, Sweep, grad_to_rad, nearest_bin

__all__ = [
    "Provenance",
    "NoiseModel",
    "SceneObject",
    "PoolScene",
    "GroundTruth",
    "POOL_CONDITIONS",
    "pool_plan",
    "pool_config",
    "cast_beam",
    "first_hit",
    "simulate_sweep",
    "experiment_scene",
    "EXPERIMENT_COUNT",
    "DatasetJitter",
    "generate_dataset",
]

# Pool-experiment environment: 10 degC freshwater, head 0.15 m down.
POOL_CONDITIONS = WaterConditions(temperature_c=10.0, salinity_psu=0.0,
                                   depth_m=0.15)

ECHO_PULSE_BINS = 3          # deposited pulse width (center +- 1 bin)
ECHO_MIN = 30                # weakest rendered echo after incidence falloff
NEAR_HEAD_SPREAD = 40        # +- around the near-head noise level
GHOST_OFFSET_RANGE_M = (0.1, 0.9)   # ghost echo distance beyond the wall

EXPERIMENT_COUNT = 10


class Provenance(enum.IntEnum):
    """Per-bin echo origin. Order encodes compositing priority: when several
    contributions land in one bin, the highest-intensity one labels it, ties
    broken by this order (direct echoes beat clutter beat noise)."""

    BACKGROUND = 0
    WALL = 1
    OBJECT = 2
    SHADOW = 3
    SURFACE_REFLECTION = 4
    NEAR_HEAD_NOISE = 5
    SPECKLE = 6


@dataclass(frozen=True)
class NoiseModel:
    """Stochastic disturbance parameters; ``seed`` fixes every term."""

    near_head_radius_m: float = 0.75
    near_head_level: int = 120
    speckle_prob: float = 0.02
    speckle_max: int = 60
    surface_reflection_gain: float = 0.35
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.speckle_prob <= 1:
            raise ValueError("speckle_prob must be in [0, 1]")
        if not 0 <= self.surface_reflection_gain <= 1:
            raise ValueError("surface_reflection_gain must be in [0, 1]")
        if self.near_head_radius_m < 0:
            raise ValueError("near_head_radius_m must be >= 0")


@dataclass(frozen=True)
class SceneObject:
    """A hung object: an opaque segment across the beam at ``center_x_m``."""

    kind: str                 # "pipe" or "bucket"
    center_x_m: float
    center_y_m: float = 0.0
    width_m: float = 0.0      # 0 selects the kind default below
    reflectivity: float = 0.0

    KIND_DEFAULTS = {
        "pipe": (0.05, 0.65),
        "bucket": (0.30, 0.80),
    }

    def __post_init__(self) -> None:
        if self.kind not in self.KIND_DEFAULTS:
            raise ValueError(f"unknown object kind {self.kind!r}")
        d_width, d_refl = self.KIND_DEFAULTS[self.kind]
        if self.width_m == 0.0:
            object.__setattr__(self, "width_m", d_width)
        if self.reflectivity == 0.0:
            object.__setattr__(self, "reflectivity", d_refl)
        if self.width_m <= 0:
            raise ValueError("width_m must be > 0")
        if not 0 <= self.reflectivity <= 1:
            raise ValueError("reflectivity must be in [0, 1]")

    @property
    def y_interval(self) -> tuple[float, float]:
        h = self.width_m / 2.0
        return self.center_y_m - h, self.center_y_m + h


@dataclass(frozen=True)
class PoolScene:
    """Tank geometry plus its contents. The sonar sits at the origin on the
    short edge, offset ``sonar_lateral_offset_m`` from the centerline, and
    looks along +x; walls are at x = length and y = +-width/2 - offset.
    """

    width_m: float = 3.0
    length_m: float = 6.0
    wall_reflectivity: float = 0.9
    sonar_lateral_offset_m: float = 0.0
    objects: tuple = ()
    noise: NoiseModel = field(default_factory=NoiseModel)
    name: str = ""

    def __post_init__(self) -> None:
        if self.width_m <= 0 or self.length_m <= 0:
            raise ValueError("pool dimensions must be positive")
        if not 0 <= self.wall_reflectivity <= 1:
            raise ValueError("wall_reflectivity must be in [0, 1]")
        object.__setattr__(self, "objects", tuple(self.objects))
        left, right = self.wall_left_m, self.wall_right_m
        for obj in self.objects:
            lo, hi = obj.y_interval
            if not (0 <= obj.center_x_m <= self.length_m
                    and right <= lo and hi <= left):
                raise ValueError(
                    f"object {obj.kind} at ({obj.center_x_m}, {obj.center_y_m}) "
                    "lies outside the pool footprint")

    @property
    def wall_left_m(self) -> float:
        """y of the left wall (positive side) relative to the sonar."""
        return self.width_m / 2.0 - self.sonar_lateral_offset_m

    @property
    def wall_right_m(self) -> float:
        return -self.width_m / 2.0 - self.sonar_lateral_offset_m


@dataclass(frozen=True)
class GroundTruth:
    """Provenance label per (line, bin), same shape as the rect raster."""

    labels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.labels, dtype=np.uint8)
        arr.flags.writeable = False
        object.__setattr__(self, "labels", arr)

    def object_mask(self) -> np.ndarray:
        """Binary mask of bins whose echo came off a hung object."""
        return (self.labels == Provenance.OBJECT).astype(np.uint8)


def pool_plan(sample_count: int = 1200, range_m: float = 7.0) -> SamplingPlan:
    """The pool-experiment sampling plan: 7 m range over 1200 samples."""
    return plan_for_range(range_m, POOL_CONDITIONS, sample_count)


def pool_config(sample_count: int = 1200, angular_step_grad: int = 1,
                 **kwargs) -> ScanConfig:
    """180-degree forward sector, medium gain; 1200 bins at 1-gradian steps
    unless overridden (coarser settings keep the scene physics but shrink
    rasters for cheap runs)."""
    kwargs.setdefault("plan", pool_plan(sample_count))
    kwargs.setdefault("gain", Gain.G1)
    kwargs.setdefault("angular_step_grad", angular_step_grad)
    return ScanConfig(**kwargs)


def wall_range(scene: PoolScene, angle_grad: float) -> tuple[float, float]:
    """(range, |cos incidence|) of the ray's exit through the pool walls."""
    theta = grad_to_rad(angle_grad)
    dx, dy = math.cos(theta), math.sin(theta)
    best_t, best_cos = math.inf, 1.0
    if dx > 1e-12:
        t = scene.length_m / dx
        y = t * dy
        if scene.wall_right_m - 1e-9 <= y <= scene.wall_left_m + 1e-9:
            best_t, best_cos = t, abs(dx)
    for wall_y in (scene.wall_left_m, scene.wall_right_m):
        if dy * wall_y > 1e-12:  # heading toward that side
            t = wall_y / dy
            x = t * dx
            if -1e-9 <= x <= scene.length_m + 1e-9 and t < best_t:
                best_t, best_cos = t, abs(dy)
    if not math.isfinite(best_t):
        # Beam pointing backward out of the modeled half-plane.
        best_t, best_cos = scene.width_m / 2.0, 1.0
    return best_t, best_cos


def first_hit(scene: PoolScene, angle_grad: float
              ) -> tuple[float, float, float, Provenance]:
    """First opaque surface along the beam.

    Returns (range, |cos incidence|, reflectivity, provenance); objects are
    tested front to back, the wall is the fallback.
    """
    theta = grad_to_rad(angle_grad)
    dx, dy = math.cos(theta), math.sin(theta)
    w_range, w_cos = wall_range(scene, angle_grad)
    best = (w_range, w_cos, scene.wall_reflectivity, Provenance.WALL)
    for obj in scene.objects:
        if dx <= 1e-12:
            continue  # side-looking beams cannot cross an x = const segment
        t = obj.center_x_m / dx
        if t <= 0 or t >= best[0]:
            continue
        y = t * dy
        lo, hi = obj.y_interval
        if lo <= y <= hi:
            best = (t, abs(dx), obj.reflectivity, Provenance.OBJECT)
    return best


def _beam_rng(seed: int, angle_grad: int) -> np.random.Generator:
    """Independent per-beam substream so beams can run in any order."""
    digest = hashlib.sha256(f"{seed}:{angle_grad}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def _echo_amplitude(reflectivity: float, cos_incidence: float) -> int:
    raw = round(255.0 * reflectivity * cos_incidence)
    return int(min(max(raw, ECHO_MIN), 255))


def _deposit(intensity: np.ndarray, label: np.ndarray, center_bin: int,
             amplitude: int, provenance: Provenance) -> None:
    half = ECHO_PULSE_BINS // 2
    for b in range(max(0, center_bin - half),
                   min(len(intensity), center_bin + half + 1)):
        if amplitude > intensity[b] or (amplitude == intensity[b]
                                        and label[b] > provenance):
            intensity[b] = amplitude
            label[b] = provenance


def cast_beam(scene: PoolScene, angle_grad: int, plan: SamplingPlan,
              rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Simulate one beam: (uint8 intensities, uint8 provenance labels).

    Contributions, composed by maximum intensity:
      1. near-head rotation noise inside the disturbance radius,
      2. the first-hit echo pulse (object edge or wall),
      3. a ghost echo beyond the wall, scaled by the reflection gain,
      4. per-bin speckle.
    Bins beyond the first hit get no direct echo and are labeled shadow
    unless a noise term claims them.
    """
    n = plan.sample_count
    sd = plan.sample_distance_m
    intensity = np.zeros(n, dtype=np.int16)
    label = np.full(n, Provenance.BACKGROUND, dtype=np.uint8)
    noise = scene.noise

    # Near-head disturbance ring. Drawn first so echoes out-composite it.
    head_bins = int(min(n, math.floor(noise.near_head_radius_m / sd)))
    if head_bins > 0 and noise.near_head_level > 0:
        lo = max(0, noise.near_head_level - NEAR_HEAD_SPREAD)
        hi = min(255, noise.near_head_level + NEAR_HEAD_SPREAD)
        vals = rng.integers(lo, hi + 1, size=head_bins)
        intensity[:head_bins] = vals
        label[:head_bins] = Provenance.NEAR_HEAD_NOISE

    hit_range, hit_cos, hit_refl, hit_prov = first_hit(scene, angle_grad)
    hit_bin = None
    if hit_range <= plan.max_range_m:
        hit_bin = nearest_bin(plan, hit_range)
        _deposit(intensity, label, hit_bin,
                 _echo_amplitude(hit_refl, hit_cos), hit_prov)

    # Acoustic shadow: mark untouched bins strictly beyond the hit pulse.
    if hit_bin is not None:
        shadow_from = hit_bin + ECHO_PULSE_BINS // 2 + 1
        untouched = intensity[shadow_from:] == 0
        label[shadow_from:][untouched] = Provenance.SHADOW

    # Ghost echo: boundary multipath lands a bit beyond the wall.
    w_range, w_cos = wall_range(scene, angle_grad)
    ghost_offset = rng.uniform(*GHOST_OFFSET_RANGE_M)
    ghost_range = w_range + ghost_offset
    if noise.surface_reflection_gain > 0 and ghost_range <= plan.max_range_m:
        amp = round(_echo_amplitude(scene.wall_reflectivity, w_cos)
                    * noise.surface_reflection_gain)
        if amp > 0:
            _deposit(intensity, label, nearest_bin(plan, ghost_range),
                     int(amp), Provenance.SURFACE_REFLECTION)

    # Speckle: sparse random single-bin pops.
    if noise.speckle_prob > 0 and noise.speckle_max > 0:
        hits = rng.random(n) < noise.speckle_prob
        pops = rng.integers(1, noise.speckle_max + 1, size=n)
        stronger = hits & (pops > intensity)
        intensity[stronger] = pops[stronger]
        label[stronger] = Provenance.SPECKLE

    return intensity.astype(np.uint8), label


def simulate_sweep(scene: PoolScene, config: ScanConfig
                   ) -> tuple[Sweep, GroundTruth]:
    """One full sector scan of the scene; deterministic per noise seed."""
    if config.sector_start_grad < -100 or config.sector_end_grad > 100:
        raise ValueError("sector must lie within [-100, +100] gradians")
    lines, labels = [], []
    for angle in config.angles:
        rng = _beam_rng(scene.noise.seed, angle)
        vals, lab = cast_beam(scene, angle, config.plan, rng)
        lines.append(ScanLine(angle, vals))
        labels.append(lab)
    meta = {"scene": scene.name or "custom", "seed": scene.noise.seed,
            "processed": False}
    return Sweep(config, tuple(lines), meta), GroundTruth(np.stack(labels))


def _pipe(x: float, y: float = 0.0) -> SceneObject:
    return SceneObject("pipe", x, y)


def _bucket(x: float, y: float = 0.0) -> SceneObject:
    return SceneObject("bucket", x, y)


def experiment_scene(n: int, seed: int = 0) -> PoolScene:
    """Scene for pool experiment ``n`` (1..10).

    Wire 1 crosses the pool 2 m from the sonar, wire 2 at 4 m. Lateral hook
    positions are representative: the write-ups fix only which experiments
    have objects aligned along the beam (3, 8, 10) or deliberately offset /
    gapped (4, 5, 7).
    """
    layouts = {
        1: (),
        2: (_pipe(2.0),),
        3: (_pipe(2.0), _pipe(4.0)),                      # aligned: full shadow
        4: (_pipe(2.0, -0.60), _pipe(4.0, 0.50)),          # offset: both clear
        5: (_pipe(2.0, 0.70), _pipe(4.0, -0.50)),          # swapped hooks
        6: (_pipe(2.0, -0.40), _pipe(2.0, 0.40)),          # both on wire 1
        7: (_pipe(2.0, -0.35), _pipe(2.0, 0.35), _bucket(4.0)),  # bucket in gap
        8: (_pipe(2.0), _bucket(4.0)),                     # aligned: still seen
        9: (_bucket(4.0),),
        10: (_bucket(2.0), _bucket(4.0)),                  # aligned buckets
    }
    if n not in layouts:
        raise ValueError(f"experiment must be 1..{EXPERIMENT_COUNT}, got {n}")
    return PoolScene(objects=layouts[n], name=f"experiment-{n}",
                     noise=NoiseModel(seed=seed))


@dataclass(frozen=True)
class DatasetJitter:
    """Per-sample randomization for dataset generation."""

    lateral_sigma_m: float = 0.15
    reflectivity_sigma: float = 0.05
    seed: int = 0


def _jitter_scene(scene: PoolScene, jitter: DatasetJitter,
                  rng: np.random.Generator, sample_seed: int) -> PoolScene:
    objects = []
    margin = 0.02
    for obj in scene.objects:
        half = obj.width_m / 2.0
        lo = scene.wall_right_m + half + margin
        hi = scene.wall_left_m - half - margin
        y = float(np.clip(obj.center_y_m
                          + rng.normal(0.0, jitter.lateral_sigma_m), lo, hi))
        refl = float(np.clip(obj.reflectivity
                             + rng.normal(0.0, jitter.reflectivity_sigma),
                             0.05, 1.0))
        objects.append(replace(obj, center_y_m=y, reflectivity=refl))
    return replace(scene, objects=tuple(objects),
                   noise=replace(scene.noise, seed=sample_seed))


def generate_dataset(out_dir, count: int, jitter: DatasetJitter | None = None,
                     split: float = 0.8, roi=None,
                     config: ScanConfig | None = None,
                     noise: NoiseModel | None = None):
    """Write ``count`` simulated samples and a train/val manifest.

    Samples cycle the ten experiment scenes with jittered object positions
    and reflectivities and fresh noise seeds. Each sample gets a raw rect
    raster, a preprocessed rect raster and the exact object mask, all as
    8-bit PNGs; everything is a pure function of the jitter seed. A
    ``noise`` model overrides the scenes' default disturbance parameters
    (its seed field is ignored; per-sample seeds are drawn as usual).
    """
    # Local import: datastore depends on scanmodel, not on this module.
    from . import datastore
    from .preprocess import RoiSpec, preprocess_sweep

    if count < 1:
        raise ValueError("count must be >= 1")
    jitter = jitter or DatasetJitter()
    roi = roi or RoiSpec()
    rng = np.random.default_rng(jitter.seed)
    config = config or pool_config()

    entries = []
    for i in range(count):
        exp = i % EXPERIMENT_COUNT + 1
        sample_seed = int(rng.integers(0, 2**63 - 1))
        base_scene = experiment_scene(exp)
        if noise is not None:
            base_scene = replace(base_scene, noise=noise)
        scene = _jitter_scene(base_scene, jitter, rng, sample_seed)
        sweep, truth = simulate_sweep(scene, config)
        scan_id = f"{scene.name}-{i:05d}"
        sweep = Sweep(sweep.config, sweep.lines,
                      {**sweep.metadata, "scan_id": scan_id, "sample": i})
        processed = preprocess_sweep(sweep, roi)
        entries.append(datastore.write_sample(out_dir, scan_id, sweep,
                                              processed, truth.object_mask()))
    return datastore.build_manifest_from_entries(
        out_dir, entries, split_fraction=split, seed=jitter.seed)
