"""Dataset access through the primary toolkit's on-disk formats only:
the manifest JSON plus raw/processed raster PNGs and mask PNGs.

Rect rasters are 201 x 1200; rows are zero-padded up to the next multiple
of 8 for the network and the padding is stripped again before export. An
optional integer max-pool downscale makes CPU runs practical while
keeping the thin echo pulses visible.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

__all__ = ["SampleSet", "load_manifest", "load_samples", "pad_to_multiple",
           "strip_padding", "downscale_max", "upscale_nearest"]


@dataclass(frozen=True)
class ManifestEntry:
    scan_id: str
    raw_path: str
    processed_path: str
    mask_path: str
    split: str


@dataclass
class SampleSet:
    """Images and masks of one split, as float32 arrays in [0, 1]."""

    ids: list
    images: np.ndarray     # (N, H, W)
    masks: np.ndarray      # (N, H, W), binary
    original_shape: tuple  # (H, W) before padding/downscale


def load_manifest(path) -> tuple[list, Path]:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    doc = json.loads(path.read_text())
    entries = [ManifestEntry(**e) for e in doc["entries"]]
    return entries, path.parent


def _load_gray(path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("L"), dtype=np.float32)


def pad_to_multiple(arr: np.ndarray, multiple: int = 8) -> np.ndarray:
    h, w = arr.shape[-2:]
    ph = (-h) % multiple
    pw = (-w) % multiple
    if not ph and not pw:
        return arr
    return np.pad(arr, [(0, 0)] * (arr.ndim - 2) + [(0, ph), (0, pw)])


def strip_padding(arr: np.ndarray, shape: tuple) -> np.ndarray:
    h, w = shape
    return arr[..., :h, :w]


def downscale_max(arr: np.ndarray, factor: int) -> np.ndarray:
    """Max-pool by an integer factor; keeps 3-bin echo pulses bright."""
    if factor == 1:
        return arr
    h, w = arr.shape[-2:]
    h2, w2 = h // factor * factor, w // factor * factor
    a = arr[..., :h2, :w2]
    a = a.reshape(*arr.shape[:-2], h2 // factor, factor, w2 // factor, factor)
    return a.max(axis=(-3, -1))


def upscale_nearest(arr: np.ndarray, factor: int, shape: tuple) -> np.ndarray:
    """Inverse of :func:`downscale_max` up to the original shape, padding
    any truncated trailing rows/columns with zeros."""
    if factor == 1:
        out = arr
    else:
        out = np.repeat(np.repeat(arr, factor, axis=-2), factor, axis=-1)
    h, w = shape
    oh, ow = out.shape[-2:]
    if oh < h or ow < w:
        out = np.pad(out, [(0, 0)] * (out.ndim - 2)
                     + [(0, max(0, h - oh)), (0, max(0, w - ow))])
    return out[..., :h, :w]


def load_samples(manifest_path, split: str, variant: str = "preprocessed",
                 downscale: int = 1, limit: int | None = None) -> SampleSet:
    """Load one split's images (raw or preprocessed rasters) and masks."""
    if variant not in ("raw", "preprocessed"):
        raise ValueError(f"variant must be raw or preprocessed, got {variant!r}")
    entries, base = load_manifest(manifest_path)
    chosen = [e for e in entries if e.split == split]
    if limit is not None:
        chosen = chosen[:limit]
    if not chosen:
        raise ValueError(f"manifest has no entries in split {split!r}")
    images, masks, ids = [], [], []
    original = None
    for e in chosen:
        rel = e.raw_path if variant == "raw" else e.processed_path
        img = _load_gray(base / rel) / 255.0
        mask = (_load_gray(base / e.mask_path) >= 128).astype(np.float32)
        if img.shape != mask.shape:
            raise ValueError(f"{e.scan_id}: image {img.shape} vs mask "
                             f"{mask.shape}")
        if original is None:
            original = img.shape
        elif img.shape != original:
            raise ValueError(f"{e.scan_id}: inconsistent raster shapes")
        img = pad_to_multiple(downscale_max(img, downscale))
        mask = pad_to_multiple(downscale_max(mask, downscale))
        images.append(img)
        masks.append(mask)
        ids.append(e.scan_id)
    return SampleSet(ids=ids, images=np.stack(images), masks=np.stack(masks),
                     original_shape=original)
