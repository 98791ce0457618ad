"""Training loop, checkpointing, prediction export and the
preprocessed-vs-raw comparison protocol.

Metric numbers are never computed here: predictions are exported as PNGs
and scored by the primary toolkit's ``eval`` command run as a subprocess,
so the reported values are exactly the ones that CLI produces.
"""

import json
import subprocess
import sys
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .data import SampleSet, load_samples, strip_padding, upscale_nearest
from .unet import NetSpec, UNet

__all__ = ["TrainConfig", "TrainResult", "bce_dice_loss", "dice_loss",
           "training_loss", "train",
           "predict", "predict_and_export", "export_truth_masks",
           "run_primary_eval", "compare_variants"]

EVAL_COMMAND = [sys.executable, "-m", "p3sonar.cli", "eval"]


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 8
    learning_rate: float = 1e-3
    dice_weight: float = 1.0      # lambda; 0 = pure cross-entropy
    seed: int = 0
    variant: str = "preprocessed"   # or "raw"
    downscale: int = 1              # integer max-pool factor for CPU runs

    def __post_init__(self):
        if self.dice_weight < 0:
            raise ValueError("dice_weight must be >= 0")
        if self.variant not in ("raw", "preprocessed"):
            raise ValueError("variant must be raw or preprocessed")


@dataclass
class TrainResult:
    checkpoint_path: Path
    loss_log: list           # per-epoch mean training loss
    config: TrainConfig


def dice_loss(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Soft Dice loss, 1 - 2|P.T| / (|P| + |T|); 0 when both are empty."""
    num = 2.0 * (pred * target).sum()
    den = pred.sum() + target.sum()
    if float(den.detach()) == 0.0:
        return torch.zeros((), dtype=pred.dtype, device=pred.device)
    return 1.0 - num / den


def bce_dice_loss(pred: torch.Tensor, target: torch.Tensor,
                  dice_weight: float) -> torch.Tensor:
    """Mean binary cross-entropy plus ``dice_weight`` times soft Dice,
    both on probabilities."""
    eps = 1e-7
    p = pred.clamp(eps, 1 - eps)
    bce = -(target * p.log() + (1 - target) * (1 - p).log()).mean()
    if dice_weight == 0:
        return bce
    return bce + dice_weight * dice_loss(pred, target)


def training_loss(logits: torch.Tensor, target: torch.Tensor,
                  dice_weight: float) -> torch.Tensor:
    """Same objective as :func:`bce_dice_loss`, computed from logits so a
    saturated logistic head keeps a useful gradient."""
    bce = torch.nn.functional.binary_cross_entropy_with_logits(logits, target)
    if dice_weight == 0:
        return bce
    return bce + dice_weight * dice_loss(torch.sigmoid(logits), target)


def _batches(n: int, batch_size: int, generator: np.random.Generator):
    order = generator.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


def train(manifest_path, config: TrainConfig, out_dir,
          device: str = "cpu") -> TrainResult:
    """Train on the manifest's train split; deterministic per seed on CPU
    (GPU backends may introduce nondeterministic kernels)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    torch.manual_seed(config.seed)
    shuffler = np.random.default_rng(config.seed)

    data = load_samples(manifest_path, "train", variant=config.variant,
                        downscale=config.downscale)
    images = torch.from_numpy(data.images[:, None]).to(device)
    masks = torch.from_numpy(data.masks[:, None]).to(device)

    model = UNet(NetSpec()).to(device)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    loss_log = []
    model.train()
    for _ in range(config.epochs):
        epoch_loss, seen = 0.0, 0
        for idx in _batches(len(data.ids), config.batch_size, shuffler):
            batch_x = images[idx]
            batch_y = masks[idx]
            optimizer.zero_grad()
            logits = model.forward_logits(batch_x)
            loss = training_loss(logits, batch_y, config.dice_weight)
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach()) * len(idx)
            seen += len(idx)
        loss_log.append(epoch_loss / seen)

    checkpoint = out_dir / f"unet-{config.variant}-seed{config.seed}.pt"
    torch.save({"state_dict": model.state_dict(),
                "config": asdict(config),
                "original_shape": data.original_shape}, checkpoint)
    (out_dir / f"loss-{config.variant}-seed{config.seed}.json").write_text(
        json.dumps(loss_log) + "\n")
    return TrainResult(checkpoint_path=checkpoint, loss_log=loss_log,
                       config=config)


def load_checkpoint(path, device: str = "cpu") -> tuple[UNet, TrainConfig, tuple]:
    doc = torch.load(path, map_location=device, weights_only=False)
    model = UNet(NetSpec()).to(device)
    model.load_state_dict(doc["state_dict"])
    model.eval()
    config = TrainConfig(**doc["config"])
    return model, config, tuple(doc["original_shape"])


def predict(model: UNet, data: SampleSet, batch_size: int = 4,
            device: str = "cpu") -> np.ndarray:
    model.eval()
    outs = []
    with torch.no_grad():
        for start in range(0, len(data.ids), batch_size):
            batch = torch.from_numpy(
                data.images[start:start + batch_size][:, None]).to(device)
            outs.append(model(batch).cpu().numpy()[:, 0])
    return np.concatenate(outs)


def predict_and_export(checkpoint_path, manifest_path, split: str, out_dir,
                       threshold: float = 0.5, device: str = "cpu"
                       ) -> tuple[Path, Path]:
    """Export predicted masks for one split, in dataset geometry.

    Two sibling directories are written: binarized masks (0/255) for the
    overlap metrics and raw probability maps (0..255 grayscale) whose
    value-level comparison drives the absolute-error metric.
    """
    model, config, original_shape = load_checkpoint(checkpoint_path, device)
    data = load_samples(manifest_path, split, variant=config.variant,
                        downscale=config.downscale)
    probs = predict(model, data, device=device)

    out_dir = Path(out_dir)
    hard_dir = out_dir / "pred"
    soft_dir = out_dir / "pred_soft"
    hard_dir.mkdir(parents=True, exist_ok=True)
    soft_dir.mkdir(parents=True, exist_ok=True)
    for scan_id, prob in zip(data.ids, probs):
        # upscale_nearest pads truncated edges and crops training padding,
        # landing exactly on the dataset geometry.
        prob = upscale_nearest(prob, config.downscale, original_shape)
        hard = ((prob >= threshold) * 255).astype(np.uint8)
        soft = np.clip(np.rint(prob * 255), 0, 255).astype(np.uint8)
        Image.fromarray(hard, mode="L").save(hard_dir / f"{scan_id}.png")
        Image.fromarray(soft, mode="L").save(soft_dir / f"{scan_id}.png")
    return hard_dir, soft_dir


def export_truth_masks(manifest_path, split: str, out_dir) -> Path:
    """Copy the split's ground-truth masks under eval-friendly names."""
    from .data import load_manifest

    entries, base = load_manifest(manifest_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for e in entries:
        if e.split == split:
            data = (base / e.mask_path).read_bytes()
            (out_dir / f"{e.scan_id}.png").write_bytes(data)
    return out_dir


def run_primary_eval(true_dir, pred_dir, report_path) -> dict:
    """Score predictions with the primary toolkit's eval CLI; its JSON
    report is the single source of metric truth."""
    cmd = EVAL_COMMAND + ["--true", str(true_dir), "--pred", str(pred_dir),
                          "--report", str(report_path)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"primary eval failed: {proc.stderr.strip()}")
    return json.loads(Path(report_path).read_text())


HIGHER_IS_BETTER = ("dc", "iou", "pa", "ps", "rs", "f1s", "biou", "bs")


def compare_variants(manifest_path, out_dir, epochs: int = 50,
                     seeds=(0, 1, 2), downscale: int = 1,
                     batch_size: int = 8, device: str = "cpu") -> dict:
    """Train raw- and preprocessed-input models per seed and score both
    on the validation split with the primary eval CLI.

    Returns the per-seed mean reports plus per-seed win flags: a seed is a
    win when the preprocessed model beats raw on every higher-is-better
    metric and has lower absolute error.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = {"seeds": {}, "wins": 0}
    for seed in seeds:
        seed_doc = {}
        for variant in ("preprocessed", "raw"):
            config = TrainConfig(epochs=epochs, batch_size=batch_size,
                                 seed=seed, variant=variant,
                                 downscale=downscale)
            run_dir = out_dir / f"seed{seed}-{variant}"
            trained = train(manifest_path, config, run_dir, device=device)
            hard_dir, _ = predict_and_export(trained.checkpoint_path,
                                             manifest_path, "val", run_dir,
                                             device=device)
            truth_dir = export_truth_masks(manifest_path, "val",
                                           run_dir / "truth")
            report = run_primary_eval(truth_dir, hard_dir,
                                      run_dir / "report.json")
            seed_doc[variant] = report["mean"]
        pre, raw = seed_doc["preprocessed"], seed_doc["raw"]
        win = all(pre[m] > raw[m] for m in HIGHER_IS_BETTER) \
            and pre["mae"] < raw["mae"]
        result["seeds"][seed] = {**seed_doc, "preprocessed_wins": win}
        result["wins"] += int(win)
    (out_dir / "comparison.json").write_text(json.dumps(result, indent=2)
                                             + "\n")
    return result
