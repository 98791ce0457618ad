"""Command-line surface: each subcommand works end to end on temp dirs."""

import json

import numpy as np
import pytest

from p3sonar import datastore
from p3sonar.cli import main
from p3sonar.datastore import load_manifest, load_sweep, save_mask_png


class TestSimulateCommand:
    def test_writes_scan_raster_and_mask(self, tmp_path, capsys):
        rc = main(["simulate", "--experiment", "9", "--seed", "3",
                   "--out", str(tmp_path), "--preprocess"])
        assert rc == 0
        stem = "experiment-9-seed3"
        for suffix in (".scan", ".raw.png", ".mask.png", ".proc.scan",
                       ".proc.png"):
            assert (tmp_path / f"{stem}{suffix}").exists(), suffix
        sweep = load_sweep(tmp_path / f"{stem}.scan")
        assert len(sweep.lines) == 201


class TestPreprocessCommand:
    def test_round_trip_with_rule_flag(self, tmp_path):
        main(["simulate", "--experiment", "2", "--seed", "1",
              "--out", str(tmp_path)])
        src = tmp_path / "experiment-2-seed1.scan"
        dst = tmp_path / "clean.scan"
        rc = main(["preprocess", str(src), str(dst),
                   "--roi-min", "0.75", "--roi-max", "6.0",
                   "--rule", "2mu+sigma"])
        assert rc == 0
        processed = load_sweep(dst)
        assert processed.metadata["processed"] is True
        raw = load_sweep(src)
        for r, p in zip(raw.lines, processed.lines):
            assert (p.intensities <= r.intensities).all()


class TestDatasetCommand:
    def test_generate_build_validate(self, tmp_path, capsys):
        out = tmp_path / "ds"
        rc = main(["dataset", "--count", "10", "--seed", "4",
                   "--split", "0.8", "--out", str(out)])
        assert rc == 0
        manifest = load_manifest(out / "manifest.json")
        assert manifest.counts == {"train": 8, "val": 2}

        rc = main(["dataset", "build", str(out), "--split", "0.5",
                   "--seed", "1"])
        assert rc == 0
        rebuilt = load_manifest(out / "manifest.json")
        assert rebuilt.counts == {"train": 5, "val": 5}

        rc = main(["dataset", "validate", str(out)])
        assert rc == 0

        (out / rebuilt.entries[0].mask_path).unlink()
        rc = main(["dataset", "validate", str(out)])
        assert rc == 1


class TestEvalCommand:
    def test_json_csv_and_figures(self, tmp_path):
        true_dir = tmp_path / "true"
        pred_dir = tmp_path / "pred"
        true_dir.mkdir(); pred_dir.mkdir()
        rng = np.random.default_rng(0)
        for i in range(4):
            mask = (rng.random((16, 16)) > 0.7).astype(np.uint8)
            save_mask_png(mask, true_dir / f"s{i}.png")
            pred = mask.copy()
            if i % 2:
                pred = np.roll(pred, 1, axis=1)
            save_mask_png(pred, pred_dir / f"s{i}.png")
        report = tmp_path / "report.json"
        figs = tmp_path / "figs"
        rc = main(["eval", "--true", str(true_dir), "--pred", str(pred_dir),
                   "--report", str(report), "--figures", str(figs)])
        assert rc == 0
        doc = json.loads(report.read_text())
        assert doc["count"] == 4
        assert set(doc["mean"]) == {"dc", "iou", "pa", "ps", "rs", "f1s",
                                    "mae", "biou", "bs"}
        assert doc["pairs"]["s0.png"]["dc"] == 1.0
        csv_text = (tmp_path / "report.csv").read_text().splitlines()
        assert csv_text[0].startswith("name,dc,")
        assert len(csv_text) == 1 + 4 + 2      # header + pairs + aggregates
        assert (figs / "metrics.png").exists()

    def test_no_pairs_is_error(self, tmp_path):
        (tmp_path / "a").mkdir(); (tmp_path / "b").mkdir()
        rc = main(["eval", "--true", str(tmp_path / "a"),
                   "--pred", str(tmp_path / "b"),
                   "--report", str(tmp_path / "r.json")])
        assert rc == 1


class TestReportCommand:
    def test_figures_and_summary(self, tmp_path):
        main(["simulate", "--experiment", "9", "--seed", "2",
              "--out", str(tmp_path)])
        out = tmp_path / "report"
        rc = main(["report", "--scan",
                   str(tmp_path / "experiment-9-seed2.scan"),
                   "--out", str(out)])
        assert rc == 0
        stem = "experiment-9-seed2"
        assert (out / f"{stem}.fan.png").exists()
        assert (out / f"{stem}.rect.png").exists()
        assert (out / f"{stem}.proc.fan.png").exists()
        summary = (out / f"{stem}.summary.csv").read_text().splitlines()
        assert summary[0] == "angle_grad,nonzero_bins,max_intensity,peak_range_m"
        assert len(summary) == 1 + 201


class TestImportCommand:
    def test_degree_fixture(self, tmp_path):
        rows = [",".join([str(d)] + ["7"] * 50) for d in range(-90, 91, 9)]
        src = tmp_path / "ext.csv"
        src.write_text("\n".join(rows) + "\n")
        dst = tmp_path / "imported.scan"
        rc = main(["import", str(src), str(dst), "--angle-unit", "deg",
                   "--range", "7.0"])
        assert rc == 0
        sweep = load_sweep(dst)
        assert sweep.config.sector_start_grad == -100
        assert sweep.config.angular_step_grad == 10
