"""Scan data model, coordinate transforms and rasterization."""

import math

import numpy as np
import pytest

from p3sonar.acoustics import SamplingPlan
from p3sonar.scanmodel import (CartesianPoint, Gain, ScanConfig, ScanLine,
                               Sweep, bin_range, nearest_bin, rasterize_fan,
                               rasterize_rect, sweep_from_rect, to_cartesian,
                               to_polar)


def make_sweep(plan, values=None, start=-100, end=100, step=1):
    config = ScanConfig(plan=plan, gain=Gain.G1, sector_start_grad=start,
                        sector_end_grad=end, angular_step_grad=step)
    lines = []
    for angle in config.angles:
        vals = np.zeros(plan.sample_count, dtype=np.uint8)
        if values is not None:
            vals[:] = values
        lines.append(ScanLine(angle, vals))
    return Sweep(config, tuple(lines), {})


@pytest.fixture
def small_plan():
    return SamplingPlan.from_period(1500.0, 1e-5, 400)  # 7.5 mm bins, 3 m


class TestPolarTransforms:
    def test_on_axis(self):
        r, theta = to_polar(CartesianPoint(1, 0))
        assert (r, theta) == (1, 0)

    def test_lateral_point_uses_full_quadrant_arctangent(self):
        """x = 0 is undefined under arctan(y/x) but fine under atan2."""
        r, theta = to_polar(CartesianPoint(0, 2))
        assert r == 2
        assert theta == pytest.approx(math.pi / 2)

    def test_three_four_five(self):
        r, theta = to_polar(CartesianPoint(3, 4))
        assert r == pytest.approx(5.0)
        assert theta == pytest.approx(0.927295, abs=1e-6)

    def test_origin_convention(self):
        assert to_polar(CartesianPoint(0, 0)) == (0, 0)

    def test_to_cartesian_examples(self):
        assert to_cartesian(1, 0) == CartesianPoint(1, 0)
        p = to_cartesian(2, math.pi / 2)
        assert p.x_m == pytest.approx(0, abs=1e-12)
        assert p.y_m == pytest.approx(2, abs=1e-12)
        p = to_cartesian(5, 0.927295)
        assert p.x_m == pytest.approx(3, abs=1e-5)
        assert p.y_m == pytest.approx(4, abs=1e-5)

    def test_negative_radius_rejected(self):
        with pytest.raises(ValueError):
            to_cartesian(-1.0, 0.0)

    def test_round_trip_identity(self):
        rng = np.random.default_rng(7)
        for _ in range(500):
            x, y = rng.uniform(-10, 10, size=2)
            if math.hypot(x, y) == 0:
                continue
            r, theta = to_polar(CartesianPoint(x, y))
            p = to_cartesian(r, theta)
            assert p.x_m == pytest.approx(x, abs=1e-9)
            assert p.y_m == pytest.approx(y, abs=1e-9)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            CartesianPoint(float("nan"), 0.0)


class TestBinRange:
    def test_last_bin_is_max_range(self, pool_plan):
        assert bin_range(pool_plan, 1199) == pytest.approx(7.0, abs=1e-9)

    def test_bin_127(self, pool_plan):
        assert bin_range(pool_plan, 127) == pytest.approx(0.74667, abs=1e-5)

    def test_strictly_increasing(self, pool_plan):
        ranges = [bin_range(pool_plan, i) for i in range(0, 1200, 37)]
        assert all(b > a for a, b in zip(ranges, ranges[1:]))

    def test_out_of_bounds(self, pool_plan):
        with pytest.raises(IndexError):
            bin_range(pool_plan, -1)
        with pytest.raises(IndexError):
            bin_range(pool_plan, 1200)

    def test_nearest_bin_inverts(self, pool_plan):
        rng = np.random.default_rng(3)
        for _ in range(200):
            i = int(rng.integers(0, 1200))
            assert nearest_bin(pool_plan, bin_range(pool_plan, i)) == i


class TestSweepInvariants:
    def test_angle_sequence_enforced(self, small_plan):
        config = ScanConfig(plan=small_plan)
        lines = [ScanLine(a, np.zeros(400, dtype=np.uint8))
                 for a in config.angles]
        lines[5], lines[6] = lines[6], lines[5]
        with pytest.raises(ValueError):
            Sweep(config, tuple(lines), {})

    def test_line_width_enforced(self, small_plan):
        config = ScanConfig(plan=small_plan)
        lines = [ScanLine(a, np.zeros(400, dtype=np.uint8))
                 for a in config.angles]
        lines[0] = ScanLine(-100, np.zeros(399, dtype=np.uint8))
        with pytest.raises(ValueError):
            Sweep(config, tuple(lines), {})

    def test_sector_divisibility_enforced(self, small_plan):
        with pytest.raises(ValueError):
            ScanConfig(plan=small_plan, sector_start_grad=0,
                       sector_end_grad=10, angular_step_grad=3)

    def test_intensities_immutable(self, small_plan):
        sweep = make_sweep(small_plan)
        with pytest.raises(ValueError):
            sweep.lines[0].intensities[0] = 9


class TestRectRaster:
    def test_shape_identity(self, pool_plan):
        sweep = make_sweep(pool_plan)
        assert rasterize_rect(sweep).shape == (201, 1200)

    def test_all_zero(self, small_plan):
        assert not rasterize_rect(make_sweep(small_plan)).any()

    def test_single_sample_lands_at_line_and_bin(self, small_plan):
        sweep = make_sweep(small_plan)
        vals = sweep.lines[5].intensities.copy()
        vals[10] = 77
        lines = list(sweep.lines)
        lines[5] = ScanLine(lines[5].angle_grad, vals)
        sweep = Sweep(sweep.config, tuple(lines), {})
        raster = rasterize_rect(sweep)
        nz = np.argwhere(raster)
        assert nz.tolist() == [[5, 10]]
        assert raster[5, 10] == 77

    def test_lossless_round_trip(self, small_plan):
        rng = np.random.default_rng(11)
        config = ScanConfig(plan=small_plan)
        lines = tuple(ScanLine(a, rng.integers(0, 256, 400, dtype=np.uint8))
                      for a in config.angles)
        sweep = Sweep(config, lines, {"scene": "x"})
        back = sweep_from_rect(rasterize_rect(sweep), config, sweep.metadata)
        assert back == sweep


class TestFanRaster:
    def test_empty_sweep_all_zero(self, small_plan):
        assert not rasterize_fan(make_sweep(small_plan), 50.0).any()

    def test_forward_sample_three_meters(self, pool_plan):
        """Sample at angle 0, range 3 m, 100 px/m sits 300 px above origin."""
        sweep = make_sweep(pool_plan)
        target_bin = nearest_bin(pool_plan, 3.0)
        vals = sweep.lines[100].intensities.copy()   # angle 0
        vals[target_bin] = 200
        lines = list(sweep.lines)
        lines[100] = ScanLine(0, vals)
        raster = rasterize_fan(Sweep(sweep.config, tuple(lines), {}), 100.0)
        side = raster.shape[0]
        origin = (side - 1, side // 2)
        nz = np.argwhere(raster)
        assert len(nz) == 1
        row, col = nz[0]
        assert col == origin[1]
        assert abs((origin[0] - row) - 300) <= 1

    def test_side_samples_on_bottom_row(self, pool_plan):
        """+-100 grad beams map onto the bottom edge's row."""
        sweep = make_sweep(pool_plan)
        lines = list(sweep.lines)
        for idx in (0, 200):   # -100 and +100 grad
            vals = lines[idx].intensities.copy()
            vals[nearest_bin(pool_plan, 2.0)] = 150
            lines[idx] = ScanLine(lines[idx].angle_grad, vals)
        raster = rasterize_fan(Sweep(sweep.config, tuple(lines), {}), 50.0)
        side = raster.shape[0]
        rows = sorted(set(np.argwhere(raster)[:, 0].tolist()))
        assert all(abs(r - (side - 1)) <= 1 for r in rows)

    def test_intensity_preserved(self, small_plan):
        """Every nonzero fan pixel equals some input sample's intensity."""
        rng = np.random.default_rng(5)
        config = ScanConfig(plan=small_plan)
        lines = tuple(ScanLine(a, rng.integers(0, 256, 400, dtype=np.uint8))
                      for a in config.angles)
        sweep = Sweep(config, lines, {})
        raster = rasterize_fan(sweep, 30.0)
        values = set(np.unique(rasterize_rect(sweep)).tolist())
        out_values = set(np.unique(raster).tolist()) - {0}
        assert out_values <= values

    def test_square_with_origin_at_bottom_middle(self, small_plan):
        raster = rasterize_fan(make_sweep(small_plan), 10.0)
        assert raster.shape[0] == raster.shape[1]

    def test_bad_scale_rejected(self, small_plan):
        with pytest.raises(ValueError):
            rasterize_fan(make_sweep(small_plan), 0.0)
