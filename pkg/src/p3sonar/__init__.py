"""Toolkit for mechanically-scanning single-beam sonar work: device
emulation over a binary wire protocol, ray-cast pool-scene simulation with
exact provenance masks, the ROI + statistical-threshold preprocessing
chain, occupancy-map rasterization, segmentation metrics, and dataset
plumbing with an annotation service."""

from .acoustics import (SamplingPlan, WaterConditions, max_range,
                        plan_for_range, sample_distance, sound_speed)
from .scanmodel import (CartesianPoint, Gain, PolarSample, ScanConfig,
                        ScanLine, Sweep, bin_range, rasterize_fan,
                        rasterize_rect, sweep_from_rect, to_cartesian,
                        to_polar)
from .preprocess import (LineStats, RoiSpec, ThresholdRule,
                         InsufficientSamplesError, line_stats,
                         preprocess_sweep, roi_filter, threshold_line)
from .metrics import (MaskPair, MetricReport, bce_loss, boundary_metrics,
                      dice_coefficient, dice_loss, evaluate, evaluate_many)
from .simulator import (DatasetJitter, GroundTruth, NoiseModel, PoolScene,
                        Provenance, SceneObject, cast_beam, experiment_scene,
                        generate_dataset, pool_config, pool_plan,
                        simulate_sweep)

__version__ = "0.1.0"

__all__ = [
    "WaterConditions", "SamplingPlan", "sound_speed", "sample_distance",
    "max_range", "plan_for_range",
    "Gain", "ScanConfig", "ScanLine", "Sweep", "CartesianPoint",
    "PolarSample", "to_polar", "to_cartesian", "bin_range",
    "rasterize_rect", "rasterize_fan", "sweep_from_rect",
    "RoiSpec", "LineStats", "ThresholdRule", "InsufficientSamplesError",
    "roi_filter", "line_stats", "threshold_line", "preprocess_sweep",
    "MaskPair", "MetricReport", "bce_loss", "dice_loss", "dice_coefficient",
    "evaluate", "evaluate_many", "boundary_metrics",
    "PoolScene", "SceneObject", "NoiseModel", "GroundTruth", "Provenance",
    "DatasetJitter", "cast_beam", "simulate_sweep", "experiment_scene",
    "generate_dataset", "pool_plan", "pool_config",
    "__version__",
]
