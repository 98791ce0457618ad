"""Persistence: scan files, mask PNGs, dataset manifests, annotation
records, and a tolerant column-mapped importer for externally collected
raw data.

Scan files are a single JSON header line followed by one CSV line per
beam, ``angle_grad,i0,i1,...``. Intensities are integers, so the format
round-trips bit-exactly. Writers create-then-rename so readers never see
a partial file.
"""

import dataclasses
import json
import math
import os
import glob
import io
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from PIL import Image

from .acoustics import SamplingPlan, WaterConditions, plan_for_range
from .scanmodel import Gain, ScanConfig, ScanLine, Sweep

__all__ = [
    "ParseError",
    "SchemaError",
    "SweepImportError",
    "AnnotationRecord",
    "ManifestEntry",
    "DatasetManifest",
    "ImportResult",
    "save_sweep",
    "load_sweep",
    "save_raster_png",
    "load_raster_png",
    "mask_to_png_bytes",
    "png_bytes_to_mask",
    "save_mask_png",
    "load_mask_png",
    "import_external",
    "split_counts",
    "write_sample",
    "build_manifest",
    "build_manifest_from_entries",
    "save_manifest",
    "load_manifest",
    "validate_manifest",
]

FORMAT_VERSION = 1
SCAN_SUFFIX = ".scan"


class ParseError(ValueError):
    """Malformed scan file content; message carries the line number."""


class SchemaError(ValueError):
    """Structurally valid file whose dimensions disagree with its header."""


class SweepImportError(ValueError):
    """External data could not be mapped onto a sweep."""


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# Scan files

def _config_to_json(config: ScanConfig) -> dict:
    return {
        "sound_speed_mps": config.plan.sound_speed_mps,
        "sample_period_s": config.plan.sample_period_s,
        "sample_count": config.plan.sample_count,
        "gain": int(config.gain),
        "sector_start_grad": config.sector_start_grad,
        "sector_end_grad": config.sector_end_grad,
        "angular_step_grad": config.angular_step_grad,
    }


def _config_from_json(obj: dict) -> ScanConfig:
    plan = SamplingPlan.from_period(obj["sound_speed_mps"],
                                    obj["sample_period_s"],
                                    obj["sample_count"])
    return ScanConfig(plan=plan, gain=Gain(obj["gain"]),
                      sector_start_grad=obj["sector_start_grad"],
                      sector_end_grad=obj["sector_end_grad"],
                      angular_step_grad=obj["angular_step_grad"])


def save_sweep(sweep: Sweep, path) -> Path:
    """Write a sweep as header line plus one CSV line per beam."""
    path = Path(path)
    header = {
        "format_version": FORMAT_VERSION,
        "config": _config_to_json(sweep.config),
        "metadata": sweep.metadata,
    }
    buf = io.StringIO()
    buf.write(json.dumps(header, sort_keys=True))
    buf.write("\n")
    for line in sweep.lines:
        buf.write(str(line.angle_grad))
        buf.write(",")
        buf.write(",".join(map(str, line.intensities.tolist())))
        buf.write("\n")
    _atomic_write(path, buf.getvalue().encode("utf-8"))
    return path


def load_sweep(path) -> Sweep:
    """Parse a scan file back into a sweep; inverse of :func:`save_sweep`."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    while lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError(f"{path}: empty file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line 1: bad JSON header: {exc}") from None
    for key in ("format_version", "config", "metadata"):
        if key not in header:
            raise ParseError(f"{path}: line 1: header missing {key!r}")
    if header["format_version"] != FORMAT_VERSION:
        raise ParseError(f"{path}: unsupported format_version "
                         f"{header['format_version']}")
    try:
        config = _config_from_json(header["config"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: line 1: bad config: {exc}") from None

    n = config.plan.sample_count
    scan_lines = []
    for lineno, row in enumerate(lines[1:], start=2):
        cells = row.split(",")
        if len(cells) - 1 != n:
            raise SchemaError(
                f"{path}: line {lineno}: expected {n} intensity values, "
                f"got {len(cells) - 1}")
        try:
            angle = int(cells[0])
            vals = [int(c) for c in cells[1:]]
        except ValueError as exc:
            raise ParseError(f"{path}: line {lineno}: {exc}") from None
        bad = [v for v in vals if not 0 <= v <= 255]
        if bad:
            raise SchemaError(
                f"{path}: line {lineno}: intensity {bad[0]} outside [0, 255]")
        scan_lines.append(ScanLine(angle, np.array(vals, dtype=np.uint8)))
    try:
        return Sweep(config, tuple(scan_lines), header["metadata"])
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# PNG rasters and masks

def save_raster_png(raster: np.ndarray, path) -> Path:
    """Write an 8-bit single-channel PNG."""
    path = Path(path)
    arr = np.asarray(raster, dtype=np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    _atomic_write(path, buf.getvalue())
    return path


def load_raster_png(path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("L"), dtype=np.uint8)


def mask_to_png_bytes(mask: np.ndarray) -> bytes:
    """Encode a 0/1 mask as a grayscale PNG (background 0, object 255)."""
    arr = (np.asarray(mask) > 0).astype(np.uint8) * 255
    buf = io.BytesIO()
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def png_bytes_to_mask(data: bytes) -> np.ndarray:
    """Decode mask PNG bytes to a 0/1 uint8 array (threshold at 128)."""
    with Image.open(io.BytesIO(data)) as img:
        arr = np.asarray(img.convert("L"))
    return (arr >= 128).astype(np.uint8)


def save_mask_png(mask: np.ndarray, path) -> Path:
    path = Path(path)
    _atomic_write(path, mask_to_png_bytes(mask))
    return path


def load_mask_png(path) -> np.ndarray:
    return png_bytes_to_mask(Path(path).read_bytes())


@dataclass(frozen=True)
class AnnotationRecord:
    """One mask bound to a stored scan, by a human or the simulator."""

    scan_id: str
    mask_path: str
    annotator: str
    created_at: str = ""
    notes: str = ""

    def __post_init__(self) -> None:
        if not self.created_at:
            stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
            object.__setattr__(self, "created_at", stamp)


# ---------------------------------------------------------------------------
# External data ingestion

@dataclass(frozen=True)
class ImportResult:
    sweep: Sweep
    skipped_rows: tuple      # (line number, reason) pairs


DEFAULT_IMPORT_HINTS = {
    "delimiter": ",",
    "angle_col": 0,
    "intensity_start_col": 1,
    "intensity_end_col": None,   # exclusive; None = to end of row
    "angle_unit": "grad",        # or "deg"
    "skip_rows": 0,
    "range_m": 7.0,
    "gain": 1,
}


def import_external(path, hints: dict | None = None,
                    conditions: WaterConditions | None = None) -> ImportResult:
    """Best-effort ingestion of externally collected raw scan data.

    The released raw recordings have no fixed documented schema, so the
    column layout is configuration: pass ``hints`` overriding any of
    ``DEFAULT_IMPORT_HINTS``. Scan files in the native format are detected
    and loaded directly. Unusable rows are skipped and reported.
    """
    path = Path(path)
    cfg = dict(DEFAULT_IMPORT_HINTS)
    cfg.update(hints or {})
    conditions = conditions or WaterConditions(10.0, 0.0, 0.15)

    text = path.read_text(encoding="utf-8", errors="replace")
    rows = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    while rows and rows[-1] == "":
        rows.pop()
    if not rows:
        raise SweepImportError(f"{path}: empty file")
    if rows[0].lstrip().startswith("{"):
        return ImportResult(load_sweep(path), ())

    delim = cfg["delimiter"]
    skipped: list[tuple[int, str]] = []
    parsed: dict[int, np.ndarray] = {}
    width = None
    for lineno, row in enumerate(rows, start=1):
        if lineno <= cfg["skip_rows"] or not row.strip():
            continue
        cells = row.split(delim)
        try:
            angle_raw = float(cells[cfg["angle_col"]])
        except (IndexError, ValueError):
            skipped.append((lineno, f"no numeric angle in column "
                            f"{cfg['angle_col']} of {len(cells)} columns"))
            continue
        end = cfg["intensity_end_col"] or len(cells)
        cells_i = cells[cfg["intensity_start_col"]:end]
        try:
            vals = np.array([float(c) for c in cells_i])
        except ValueError as exc:
            skipped.append((lineno, f"non-numeric intensity: {exc}"))
            continue
        if width is None:
            width = len(vals)
        if len(vals) != width or width == 0:
            skipped.append((lineno, f"row width {len(vals)} != {width}"))
            continue
        if cfg["angle_unit"] == "deg":
            angle = int(round(angle_raw * 10.0 / 9.0))
        elif cfg["angle_unit"] == "grad":
            angle = int(round(angle_raw))
        else:
            raise SweepImportError(f"unknown angle_unit {cfg['angle_unit']!r}")
        if angle in parsed:
            skipped.append((lineno, f"duplicate angle {angle} grad"))
            continue
        parsed[angle] = np.clip(np.rint(vals), 0, 255).astype(np.uint8)

    if not parsed:
        ncols = len(rows[0].split(delim))
        raise SweepImportError(
            f"{path}: no usable rows; first row has {ncols} columns "
            f"({len(skipped)} rows skipped)")

    angles = sorted(parsed)
    if len(angles) > 1:
        steps = {b - a for a, b in zip(angles, angles[1:])}
        step = math.gcd(*steps) if len(steps) > 1 else steps.pop()
    else:
        step = 1
    # Irregular sequences leave holes; fill them with zero lines so the
    # sweep stays rectangular, and report the gaps.
    plan = plan_for_range(cfg["range_m"], conditions, width)
    lines = []
    for angle in range(angles[0], angles[-1] + step, step):
        if angle in parsed:
            lines.append(ScanLine(angle, parsed[angle]))
        else:
            skipped.append((0, f"missing angle {angle} grad, zero-filled"))
            lines.append(ScanLine(angle, np.zeros(width, dtype=np.uint8)))
    config = ScanConfig(plan=plan, gain=Gain(cfg["gain"]),
                        sector_start_grad=angles[0],
                        sector_end_grad=angles[-1],
                        angular_step_grad=step)
    sweep = Sweep(config, tuple(lines),
                  {"imported_from": str(path), "processed": False})
    return ImportResult(sweep, tuple(skipped))


# ---------------------------------------------------------------------------
# Dataset manifests

@dataclass(frozen=True)
class ManifestEntry:
    scan_id: str
    raw_path: str
    processed_path: str
    mask_path: str
    split: str = ""


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple
    seed: int
    split_fraction: float
    counts: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        ids = [e.scan_id for e in self.entries]
        if len(ids) != len(set(ids)):
            raise SchemaError("duplicate scan_id in manifest")

    def split(self, name: str) -> list:
        return [e for e in self.entries if e.split == name]


def split_counts(n: int, split_fraction: float) -> tuple[int, int]:
    """(train, val) sizes: validation gets floor(n * (1 - fraction)), the
    remainder goes to train. The epsilon absorbs binary-fraction artifacts
    like 700 * 0.2 -> 139.9999...
    """
    if not 0.0 <= split_fraction <= 1.0:
        raise ValueError("split fraction must be in [0, 1]")
    val = int(n * (1.0 - split_fraction) + 1e-9)
    return n - val, val


def _assign_splits(entries: list, split_fraction: float, seed: int) -> list:
    n_train, _ = split_counts(len(entries), split_fraction)
    order = np.random.default_rng(seed).permutation(len(entries))
    out = [None] * len(entries)
    for rank, idx in enumerate(order):
        split = "train" if rank < n_train else "val"
        out[idx] = dataclasses.replace(entries[idx], split=split)
    return out


def write_sample(out_dir, scan_id: str, raw: Sweep, processed: Sweep,
                 mask: np.ndarray) -> ManifestEntry:
    """Write one dataset sample's raster triple under ``out_dir``."""
    from .scanmodel import rasterize_rect

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    raw_p = out_dir / f"{scan_id}.raw.png"
    proc_p = out_dir / f"{scan_id}.proc.png"
    mask_p = out_dir / f"{scan_id}.mask.png"
    save_raster_png(rasterize_rect(raw), raw_p)
    save_raster_png(rasterize_rect(processed), proc_p)
    save_mask_png(mask, mask_p)
    return ManifestEntry(scan_id=scan_id, raw_path=raw_p.name,
                         processed_path=proc_p.name, mask_path=mask_p.name)


def build_manifest_from_entries(out_dir, entries: list, split_fraction: float,
                                seed: int) -> DatasetManifest:
    assigned = _assign_splits(list(entries), split_fraction, seed)
    manifest = DatasetManifest(
        entries=tuple(assigned), seed=seed, split_fraction=split_fraction,
        counts={"train": sum(e.split == "train" for e in assigned),
                "val": sum(e.split == "val" for e in assigned)})
    save_manifest(manifest, Path(out_dir) / "manifest.json")
    return manifest


def build_manifest(data_dir, split_fraction: float = 0.8, seed: int = 0
                   ) -> tuple[DatasetManifest, list[str]]:
    """Scan a directory for ``<id>.raw.png / <id>.proc.png / <id>.mask.png``
    triples and build a deterministic split manifest.

    Returns the manifest and the list of orphan files that were excluded.
    """
    data_dir = Path(data_dir)
    raws = sorted(glob.glob(str(data_dir / "*.raw.png")))
    entries, orphans = [], []
    claimed = set()
    for raw_p in raws:
        stem = Path(raw_p).name[:-len(".raw.png")]
        proc_p = data_dir / f"{stem}.proc.png"
        mask_p = data_dir / f"{stem}.mask.png"
        if proc_p.exists() and mask_p.exists():
            entries.append(ManifestEntry(
                scan_id=stem, raw_path=Path(raw_p).name,
                processed_path=proc_p.name, mask_path=mask_p.name))
            claimed.update({Path(raw_p).name, proc_p.name, mask_p.name})
        else:
            orphans.append(Path(raw_p).name)
    for png in sorted(glob.glob(str(data_dir / "*.png"))):
        if Path(png).name not in claimed:
            orphans.append(Path(png).name)
    orphans = sorted(set(orphans))
    manifest = build_manifest_from_entries(data_dir, entries,
                                           split_fraction, seed)
    return manifest, orphans


def save_manifest(manifest: DatasetManifest, path) -> Path:
    path = Path(path)
    doc = {
        "seed": manifest.seed,
        "split_fraction": manifest.split_fraction,
        "counts": manifest.counts,
        "entries": [dataclasses.asdict(e) for e in manifest.entries],
    }
    _atomic_write(path, (json.dumps(doc, indent=2, sort_keys=True) + "\n")
                  .encode("utf-8"))
    return path


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    entries = tuple(ManifestEntry(**e) for e in doc["entries"])
    return DatasetManifest(entries=entries, seed=doc["seed"],
                           split_fraction=doc["split_fraction"],
                           counts=doc["counts"])


def validate_manifest(manifest: DatasetManifest, base_dir) -> list[str]:
    """Check that every referenced file exists and dimensions agree.

    Returns a list of human-readable problems, empty when clean.
    """
    base = Path(base_dir)
    problems = []
    for e in manifest.entries:
        paths = {"raw": base / e.raw_path, "processed": base / e.processed_path,
                 "mask": base / e.mask_path}
        missing = [k for k, p in paths.items() if not p.exists()]
        if missing:
            problems.append(f"{e.scan_id}: missing {', '.join(missing)}")
            continue
        shapes = {k: load_raster_png(p).shape for k, p in paths.items()}
        if len(set(shapes.values())) != 1:
            problems.append(f"{e.scan_id}: shape mismatch {shapes}")
    return problems
