"""Acceptance suite: one test per release criterion, at pinned tolerances.

Each test prints a PASS line on success so a plain ``pytest -s
tests/test_acceptance.py`` reads as a checklist. Oracles here are
independent re-derivations (hand formulas, brute-force loops), not calls
back into the code paths under test.
"""

import math
import socket

import numpy as np
import pytest

from p3sonar import protocol
from p3sonar.acoustics import WaterConditions, plan_for_range, sound_speed
from p3sonar.metrics import MaskPair, evaluate
from p3sonar.preprocess import RoiSpec, line_stats, preprocess_sweep, \
    roi_filter, threshold_line
from p3sonar.protocol import ScanRequest, StreamDecoder, decode_stream, encode
from p3sonar.scanmodel import ScanLine, rasterize_rect
from p3sonar.simulator import (POOL_CONDITIONS, Provenance, experiment_scene,
                               pool_config, simulate_sweep)
from p3sonar.service import EmulatorServer
from p3sonar.service.emulator import config_from_request

from test_metrics import oracle_report
from test_service import collect_replies, connect, pool_request


def report(name: str) -> None:
    print(f"ACCEPTANCE PASS: {name}")


class TestAcceptance:
    def test_01_sound_speed_at_pool_conditions(self):
        """Sound speed at 10 degC freshwater, 0.15 m: 1448.4027 +- 1e-3."""
        oracle = 1410 + 4.21 * 10 - 0.037 * 10**2 + 1.1 * 0 + 0.018 * 0.15
        got = sound_speed(WaterConditions(10.0, 0.0, 0.15))
        assert got == pytest.approx(oracle, abs=1e-12)
        assert got == pytest.approx(1448.4027, abs=1e-3)
        report("sound speed at pool conditions = "
               f"{got:.4f} m/s (oracle {oracle:.4f})")

    def test_02_pool_configuration_consistency(self):
        """7 m / 1200 samples inverts to ~5.833 mm bins and round-trips."""
        plan = plan_for_range(7.0, WaterConditions(10.0, 0.0, 0.15), 1200)
        assert plan.sample_distance_m == pytest.approx(0.005833, abs=1e-6)
        assert plan.max_range_m == pytest.approx(7.0, abs=1e-9)
        report(f"pool plan: S_d = {plan.sample_distance_m:.6f} m, "
               f"max range = {plan.max_range_m} m")

    def test_03_preprocessing_matches_brute_force(self, pool_plan):
        """Kept sets equal an independent mean/deviation/cutoff loop on
        1000 random lines; the hand fixture keeps only its spike."""
        rng = np.random.default_rng(2024)
        roi = RoiSpec(0.75, 6.0)
        checked = 0
        for _ in range(1000):
            vals = rng.integers(0, 256, 1200, dtype=np.uint8)
            gated, (first, last) = roi_filter(
                ScanLine(0, vals), pool_plan, roi)
            out = threshold_line(gated, line_stats(gated, (first, last)))
            raw = vals.tolist()
            seg = raw[first:last + 1]
            mu = sum(seg) / len(seg)
            sigma = math.sqrt(sum((v - mu) ** 2 for v in seg)
                              / (len(seg) - 1))
            cutoff = 2 * mu + sigma
            kept = {i for i in range(first, last + 1)
                    if raw[i] >= cutoff and raw[i] > 0}
            assert set(np.flatnonzero(out.intensities).tolist()) == kept
            checked += 1
        assert checked == 1000

        fixture = ScanLine(0, np.array([10, 10, 10, 10, 200], dtype=np.uint8))
        stats = line_stats(fixture, (0, 4))
        cutoff = 2 * stats.mu + stats.sigma
        assert cutoff == pytest.approx(180.97, abs=0.01)
        out = threshold_line(fixture, stats)
        assert out.intensities.tolist() == [0, 0, 0, 0, 200]
        report(f"threshold oracle: 1000 random lines exact, "
               f"fixture cutoff {cutoff:.2f} keeps only the 200")

    def test_04_empty_pool_geometry_after_preprocessing(self):
        """Surviving direct echoes sit within +-2 bins of the analytic
        ray-rectangle intersection; peaks at 6.0 m ahead, 1.5 m sideways."""
        config = pool_config()
        sd = config.plan.sample_distance_m
        sweep, truth = simulate_sweep(experiment_scene(1, seed=8), config)
        processed = preprocess_sweep(sweep, RoiSpec(0.75, 6.0))
        for i, line in enumerate(processed.lines):
            theta = line.angle_grad * math.pi / 200.0
            candidates = []
            if math.cos(theta) > 1e-12:
                t = 6.0 / math.cos(theta)
                if abs(t * math.sin(theta)) <= 1.5 + 1e-9:
                    candidates.append(t)
            if abs(math.sin(theta)) > 1e-12:
                t = 1.5 / abs(math.sin(theta))
                if t * math.cos(theta) <= 6.0 + 1e-9:
                    candidates.append(t)
            wall_r = min(candidates)
            surviving = [b for b in np.flatnonzero(line.intensities)
                         if truth.labels[i, b] == Provenance.WALL]
            for b in surviving:
                assert abs((b + 1) * sd - wall_r) <= 2 * sd + 1e-9, \
                    f"angle {line.angle_grad}: bin {b} vs {wall_r:.3f} m"

        mid = processed.lines[100]       # 0 grad
        assert mid.angle_grad == 0
        assert abs(int(mid.intensities.argmax()) - 1027) <= 2
        for idx in (0, 200):             # +-100 grad
            line = processed.lines[idx]
            assert abs(int(line.intensities.argmax()) - 256) <= 2
        report("empty-pool geometry: peaks at bin "
               f"{int(mid.intensities.argmax())} ahead (1027+-2), "
               f"{int(processed.lines[0].intensities.argmax())} and "
               f"{int(processed.lines[200].intensities.argmax())} sideways "
               "(256+-2); all surviving wall echoes within 2 bins")

    def test_05_shadow_contrast_over_50_seeds(self):
        """Aligned equal pipes fully obscure the rear wire in every seed;
        the wide bucket behind a narrow pipe stays detectable in >= 45/50."""
        config = pool_config()
        lo = int(3.5 / config.plan.sample_distance_m)
        hi = int(4.5 / config.plan.sample_distance_m)

        def rear_bins(experiment, seed):
            _, truth = simulate_sweep(experiment_scene(experiment, seed),
                                      config)
            return int((truth.labels[:, lo:hi] == Provenance.OBJECT).sum())

        exp3_hits = sum(rear_bins(3, seed) > 0 for seed in range(50))
        exp8_hits = sum(rear_bins(8, seed) >= 1 for seed in range(50))
        assert exp3_hits == 0
        assert exp8_hits >= 45
        report(f"shadow contrast: rear wire object bins in 0/50 seeds for "
               f"aligned pipes, {exp8_hits}/50 for pipe+bucket")

    def test_06_protocol_golden_bytes_and_fuzz(self):
        """The 19-byte golden request decodes and re-encodes identically;
        10k random messages survive round trip and arbitrary re-chunking."""
        golden = bytes.fromhex(
            "50330110000a009cff640001b004420101" "9603")
        assert golden[-2:] == bytes([0x96, 0x03]) and len(golden) == 19
        (msg,) = decode_stream([golden])
        assert msg == ScanRequest(-100, 100, 1, 1200, 322, 1)
        assert encode(msg) == golden

        from test_protocol import random_message
        rng = np.random.default_rng(777)
        blob_msgs = []
        for i in range(10_000):
            m = random_message(rng)
            assert decode_stream([encode(m)]) == [m]
            if i % 100 == 0:
                blob_msgs.append(m)
        blob = b"".join(encode(m) for m in blob_msgs)
        for trial in range(30):
            cuts = sorted(rng.integers(0, len(blob) + 1,
                                       size=rng.integers(1, 60)).tolist())
            chunks, prev = [], 0
            for cut in cuts + [len(blob)]:
                chunks.append(blob[prev:cut])
                prev = cut
            assert decode_stream(chunks) == blob_msgs
        report("protocol: golden vector exact, 10k round trips, "
               "30 re-chunkings stable")

    def test_07_metrics_against_pixel_counting(self):
        """evaluate matches the brute-force oracle on 1000 random 16x16
        pairs to 1e-9; the shifted-block fixture hits its exact numbers."""
        rng = np.random.default_rng(31337)
        for i in range(1000):
            y = (rng.random((16, 16)) > rng.uniform(0.3, 0.95)).astype(float)
            if i % 4 == 0:
                p = rng.random((16, 16))
            else:
                p = (rng.random((16, 16)) > rng.uniform(0.3, 0.95)) \
                    .astype(float)
            rep = evaluate(MaskPair(y, p))
            exp = oracle_report(y, p)
            for name, val in exp.items():
                assert getattr(rep, name) == pytest.approx(val, abs=1e-9), name
        y = np.zeros((4, 4)); y[1:3, 0:2] = 1
        p = np.zeros((4, 4)); p[1:3, 1:3] = 1
        rep = evaluate(MaskPair(y, p))
        assert rep.pa == 0.75
        assert rep.dc == 0.5
        assert rep.iou == pytest.approx(0.3333, abs=1e-4)
        assert rep.mae == 0.25

        for _ in range(200):
            yb = (rng.random((12, 12)) > 0.5).astype(float)
            pb = (rng.random((12, 12)) > 0.5).astype(float)
            r = evaluate(MaskPair(yb, pb))
            assert r.f1s == r.dc
        report("metrics: 1000-pair oracle to 1e-9, fixture "
               "PA=0.75 DC=0.5 IoU=0.3333 MAE=0.25, F1S==DC on binary")

    def test_08_end_to_end_identity_all_scenes(self):
        """simulate -> emulator TCP -> decode equals the local sweep,
        bit for bit, for all ten experiment scenes."""
        request = pool_request()
        config = config_from_request(request, POOL_CONDITIONS)
        for n in range(1, 11):
            scene = experiment_scene(n, seed=1000 + n)
            server = EmulatorServer(("127.0.0.1", 0), scene,
                                    lines_per_second=0)
            server.serve_background()
            try:
                with connect(server) as sock:
                    sock.sendall(encode(request))
                    lines, others = collect_replies(sock, expected_lines=201)
                assert not others
                streamed = np.stack([
                    np.frombuffer(l.intensities, dtype=np.uint8)
                    for l in lines])
                angles = [l.angle_grad for l in lines]
                reference, _ = simulate_sweep(scene, config)
                assert angles == [l.angle_grad for l in reference.lines]
                assert np.array_equal(streamed, rasterize_rect(reference)), \
                    f"experiment {n}"
            finally:
                server.shutdown()
                server.server_close()
        report("end-to-end identity holds for all 10 experiment scenes")
