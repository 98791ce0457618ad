"""Training loop, export and the primary-CLI evaluation boundary."""

import json

import numpy as np
import pytest
import torch
from PIL import Image

from segharness.data import load_manifest
from segharness.train import (TrainConfig, bce_dice_loss, dice_loss,
                              export_truth_masks, predict_and_export,
                              run_primary_eval, train, training_loss)


class TestLossFunctions:
    def test_zero_weight_reduces_to_cross_entropy(self):
        torch.manual_seed(1)
        logits = torch.randn(2, 1, 8, 8)
        target = (torch.rand(2, 1, 8, 8) > 0.7).float()
        expected = torch.nn.functional.binary_cross_entropy_with_logits(
            logits, target)
        assert torch.allclose(training_loss(logits, target, 0.0), expected)
        probs = torch.sigmoid(logits)
        manual = -(target * probs.clamp(1e-7, 1 - 1e-7).log()
                   + (1 - target) * (1 - probs).clamp(1e-7, 1 - 1e-7).log()
                   ).mean()
        assert torch.allclose(bce_dice_loss(probs, target, 0.0), manual,
                              atol=1e-6)

    def test_dice_term_added(self):
        logits = torch.zeros(1, 1, 4, 4)
        target = torch.ones(1, 1, 4, 4)
        base = training_loss(logits, target, 0.0)
        with_dice = training_loss(logits, target, 1.0)
        probs = torch.sigmoid(logits)
        assert torch.allclose(with_dice - base, dice_loss(probs, target))

    def test_dice_empty_empty_is_zero(self):
        zero = torch.zeros(1, 1, 4, 4)
        assert float(dice_loss(zero, zero)) == 0.0

    def test_invalid_config_rejected(self):
        with pytest.raises(ValueError):
            TrainConfig(dice_weight=-1.0)
        with pytest.raises(ValueError):
            TrainConfig(variant="other")


@pytest.fixture(scope="module")
def overfit_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("overfit")
    # the tiny_manifest fixture is function-scoped; rebuild here once
    import conftest as helpers
    rng = np.random.default_rng(0)
    entries = []
    for i in range(5):
        scan_id = f"blob-{i}"
        mask = np.zeros((24, 24), np.uint8)
        r, c = rng.integers(2, 16, 2)
        mask[r:r + 6, c:c + 4] = 1
        clean = mask * int(rng.integers(150, 255))
        helpers.write_gray(out / f"{scan_id}.raw.png", clean)
        helpers.write_gray(out / f"{scan_id}.proc.png", clean)
        helpers.write_gray(out / f"{scan_id}.mask.png", mask * 255)
        entries.append({"scan_id": scan_id,
                        "raw_path": f"{scan_id}.raw.png",
                        "processed_path": f"{scan_id}.proc.png",
                        "mask_path": f"{scan_id}.mask.png",
                        "split": "train"})
    (out / "manifest.json").write_text(json.dumps(
        {"seed": 0, "split_fraction": 1.0,
         "counts": {"train": 5, "val": 0}, "entries": entries}))
    config = TrainConfig(epochs=200, batch_size=5, seed=0,
                         variant="preprocessed")
    result = train(out / "manifest.json", config, out / "run")
    return out, result


@pytest.fixture(scope="module")
def quick_checkpoint(simulated_dataset, tmp_path_factory):
    out = tmp_path_factory.mktemp("quick")
    config = TrainConfig(epochs=1, batch_size=4, seed=1,
                         variant="preprocessed", downscale=8)
    result = train(simulated_dataset, config, out)
    return result.checkpoint_path


class TestOverfitSmoke:
    """Fit five tiny pairs to saturation; scoring goes through the primary
    eval CLI so the harness never computes its own metric numbers."""

    def test_training_dice_above_095_by_primary_cli(self, overfit_run):
        out, result = overfit_run
        hard_dir, soft_dir = predict_and_export(
            result.checkpoint_path, out / "manifest.json", "train",
            out / "export")
        truth_dir = export_truth_masks(out / "manifest.json", "train",
                                       out / "truth")
        report = run_primary_eval(truth_dir, hard_dir,
                                  out / "report.json")
        assert report["count"] == 5
        assert report["mean"]["dc"] > 0.95
        assert soft_dir.exists()

    def test_loss_log_non_increasing_moving_average(self, overfit_run):
        _, result = overfit_run
        losses = np.asarray(result.loss_log)
        assert len(losses) == 200
        ma = np.convolve(losses, np.ones(10) / 10, mode="valid")
        assert (np.diff(ma) <= 1e-6).all()

    def test_deterministic_loss_log(self, overfit_run):
        out, result = overfit_run
        config = TrainConfig(epochs=3, batch_size=5, seed=0,
                             variant="preprocessed")
        a = train(out / "manifest.json", config, out / "det-a")
        b = train(out / "manifest.json", config, out / "det-b")
        assert a.loss_log == b.loss_log


class TestPredictAndExport:
    def test_export_count_equals_val_split(self, quick_checkpoint,
                                           simulated_dataset, tmp_path):
        hard_dir, soft_dir = predict_and_export(
            quick_checkpoint, simulated_dataset, "val", tmp_path)
        entries, _ = load_manifest(simulated_dataset)
        val_ids = [e.scan_id for e in entries if e.split == "val"]
        assert sorted(p.stem for p in hard_dir.glob("*.png")) \
            == sorted(val_ids)
        assert sorted(p.stem for p in soft_dir.glob("*.png")) \
            == sorted(val_ids)

    def test_exports_match_dataset_geometry(self, quick_checkpoint,
                                            simulated_dataset, tmp_path):
        hard_dir, soft_dir = predict_and_export(
            quick_checkpoint, simulated_dataset, "val", tmp_path)
        for path in hard_dir.glob("*.png"):
            with Image.open(path) as img:
                assert img.size == (1200, 201)
                values = set(np.unique(np.asarray(img)).tolist())
            assert values <= {0, 255}
        for path in soft_dir.glob("*.png"):
            with Image.open(path) as img:
                assert img.size == (1200, 201)
