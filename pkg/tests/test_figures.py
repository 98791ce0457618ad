"""Report figures render to files without touching a display."""

import numpy as np
from PIL import Image

from p3sonar.figures import (fan_figure, metric_bars_figure, rect_figure,
                             sweep_report_figures)
from p3sonar.metrics import MaskPair, evaluate
from p3sonar.preprocess import RoiSpec, preprocess_sweep
from p3sonar.simulator import experiment_scene, pool_config, simulate_sweep


def small_sweep():
    from p3sonar.acoustics import SamplingPlan
    from p3sonar.scanmodel import ScanConfig, ScanLine, Sweep
    plan = SamplingPlan.from_period(1500.0, 1e-5, 200)
    config = ScanConfig(plan=plan, sector_start_grad=-100,
                        sector_end_grad=100, angular_step_grad=4)
    rng = np.random.default_rng(0)
    lines = tuple(ScanLine(a, rng.integers(0, 256, 200, dtype=np.uint8))
                  for a in config.angles)
    return Sweep(config, lines, {"scene": "figure-test"})


class TestFigures:
    def test_fan_and_rect_written(self, tmp_path):
        sweep = small_sweep()
        fan = fan_figure(sweep, tmp_path / "fan.png", pixels_per_meter=40,
                         roi=RoiSpec(0.2, 1.5))
        rect = rect_figure(sweep, tmp_path / "rect.png")
        for path in (fan, rect):
            assert path.exists() and path.stat().st_size > 1000
            with Image.open(path) as img:
                assert img.size[0] > 100

    def test_report_set_for_simulated_scan(self, tmp_path):
        sweep, _ = simulate_sweep(experiment_scene(2, seed=1), pool_config())
        processed = preprocess_sweep(sweep)
        written = sweep_report_figures(sweep, tmp_path, "exp2",
                                       processed=processed, roi=RoiSpec())
        assert len(written) == 4
        assert all(p.exists() for p in written)

    def test_metric_bars(self, tmp_path):
        y = np.zeros((8, 8)); y[2:5, 2:5] = 1
        p = np.zeros((8, 8)); p[2:5, 3:6] = 1
        reports = {
            "preprocessed": evaluate(MaskPair(y, y.astype(float))),
            "raw": evaluate(MaskPair(y, p.astype(float))),
        }
        path = metric_bars_figure(reports, tmp_path / "bars.png")
        assert path.exists() and path.stat().st_size > 1000
