"""U-Net training harness over the sonar toolkit's dataset formats."""

from .unet import NetSpec, UNet, build
from .data import SampleSet, load_samples
from .train import (TrainConfig, TrainResult, bce_dice_loss, compare_variants,
                    predict_and_export, run_primary_eval, train)

__version__ = "0.1.0"

__all__ = [
    "NetSpec", "UNet", "build",
    "SampleSet", "load_samples",
    "TrainConfig", "TrainResult", "bce_dice_loss", "train",
    "predict_and_export", "run_primary_eval", "compare_variants",
    "__version__",
]
