"""Dataset format access: padding, scaling, manifest and variant handling."""

import numpy as np
import pytest

from segharness.data import (downscale_max, load_samples, pad_to_multiple,
                             strip_padding, upscale_nearest)


class TestPadding:
    def test_pad_and_strip_round_trip(self):
        arr = np.arange(201 * 1200, dtype=np.float32).reshape(201, 1200)
        padded = pad_to_multiple(arr, 8)
        assert padded.shape == (208, 1200)
        assert not padded[201:].any()
        assert np.array_equal(strip_padding(padded, (201, 1200)), arr)

    def test_already_aligned_untouched(self):
        arr = np.ones((16, 8), np.float32)
        assert pad_to_multiple(arr, 8) is arr


class TestScaling:
    def test_maxpool_keeps_bright_pulses(self):
        arr = np.zeros((8, 8), np.float32)
        arr[3, 5] = 0.9
        down = downscale_max(arr, 2)
        assert down.shape == (4, 4)
        assert down[1, 2] == pytest.approx(0.9)

    def test_upscale_restores_shape(self):
        arr = np.zeros((201, 1200), np.float32)
        down = downscale_max(arr, 2)
        assert down.shape == (100, 600)
        up = upscale_nearest(down, 2, (201, 1200))
        assert up.shape == (201, 1200)

    def test_factor_one_is_identity(self):
        arr = np.random.default_rng(0).random((5, 7)).astype(np.float32)
        assert downscale_max(arr, 1) is arr
        assert np.array_equal(upscale_nearest(arr, 1, (5, 7)), arr)


class TestLoadSamples:
    def test_variants_differ(self, tiny_manifest):
        raw = load_samples(tiny_manifest, "train", variant="raw")
        proc = load_samples(tiny_manifest, "train", variant="preprocessed")
        assert raw.images.shape == proc.images.shape == (5, 24, 24)
        assert not np.array_equal(raw.images, proc.images)
        assert np.array_equal(raw.masks, proc.masks)
        assert raw.original_shape == (24, 24)

    def test_masks_are_binary(self, tiny_manifest):
        data = load_samples(tiny_manifest, "train")
        assert set(np.unique(data.masks)) <= {0.0, 1.0}

    def test_missing_split_rejected(self, tiny_manifest):
        with pytest.raises(ValueError, match="split"):
            load_samples(tiny_manifest, "val")

    def test_unknown_variant_rejected(self, tiny_manifest):
        with pytest.raises(ValueError, match="variant"):
            load_samples(tiny_manifest, "train", variant="other")

    def test_real_dataset_loads(self, simulated_dataset):
        data = load_samples(simulated_dataset, "train", variant="raw",
                            downscale=4)
        assert data.original_shape == (201, 1200)
        assert data.images.shape[1] % 8 == 0
        assert data.images.shape[2] % 8 == 0
        assert data.images.max() <= 1.0
