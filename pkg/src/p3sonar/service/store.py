"""Scan resource store backing the HTTP API.

Scans live in memory and are mirrored to the data directory (scan files,
mask PNGs, an annotation index), so a restarted service sees the same
store. Mask bytes are kept verbatim: what a client PUTs is exactly what a
later GET returns. A single lock serializes writes; reads of other scans
never wait on it longer than the in-memory bookkeeping takes.
"""

import dataclasses
import hashlib
import io
import json
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .. import datastore
from ..datastore import AnnotationRecord
from ..metrics import MaskPair, MetricReport, evaluate
from ..scanmodel import Sweep, rasterize_fan, rasterize_rect

__all__ = ["ScanResource", "ScanStore", "StoreError", "UnknownScanError",
           "DimensionMismatchError"]


class StoreError(Exception):
    pass


class UnknownScanError(StoreError):
    pass


class DimensionMismatchError(StoreError):
    pass


# No dots: mask files are named <scan_id>.<annotator>.png and reloaded by
# splitting on the final dot pair.
ANNOTATOR_RE = re.compile(r"^[A-Za-z0-9_-]{1,64}$")


@dataclass
class ScanResource:
    scan_id: str
    raw: Sweep
    processed: Sweep | None = None
    masks: dict = field(default_factory=dict)        # annotator -> bytes
    records: dict = field(default_factory=dict)      # annotator -> record

    @property
    def shape(self) -> tuple[int, int]:
        return (self.raw.config.line_count, self.raw.config.plan.sample_count)

    def summary(self) -> dict:
        cfg = self.raw.config
        return {
            "scan_id": self.scan_id,
            "scene": self.raw.metadata.get("scene"),
            "seed": self.raw.metadata.get("seed"),
            "lines": cfg.line_count,
            "samples": cfg.plan.sample_count,
            "has_processed": self.processed is not None,
            "annotators": sorted(self.masks),
        }

    def detail(self) -> dict:
        cfg = self.raw.config
        doc = self.summary()
        doc.update({
            "metadata": self.raw.metadata,
            "config": {
                "sector_start_grad": cfg.sector_start_grad,
                "sector_end_grad": cfg.sector_end_grad,
                "angular_step_grad": cfg.angular_step_grad,
                "gain": int(cfg.gain),
                "sample_count": cfg.plan.sample_count,
                "sample_distance_m": cfg.plan.sample_distance_m,
                "max_range_m": cfg.plan.max_range_m,
            },
            "roi_defaults": {"min_range_m": 0.75, "max_range_m": 6.0},
            "annotations": {a: dataclasses.asdict(r)
                            for a, r in self.records.items()},
        })
        return doc


def _etag(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]


class ScanStore:
    """Thread-safe scan repository over a data directory."""

    def __init__(self, data_dir) -> None:
        self.data_dir = Path(data_dir)
        self.scans_dir = self.data_dir / "scans"
        self.masks_dir = self.data_dir / "masks"
        self.scans_dir.mkdir(parents=True, exist_ok=True)
        self.masks_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.RLock()
        self._scans: dict[str, ScanResource] = {}
        self._counter = 0
        self._load_existing()

    # -- loading -----------------------------------------------------------

    def _load_existing(self) -> None:
        for path in sorted(self.scans_dir.glob("*.scan")):
            if path.name.endswith(".proc.scan"):
                continue
            scan_id = path.name[:-len(".scan")]
            res = ScanResource(scan_id, datastore.load_sweep(path))
            proc = self.scans_dir / f"{scan_id}.proc.scan"
            if proc.exists():
                res.processed = datastore.load_sweep(proc)
            self._scans[scan_id] = res
            num = scan_id.rsplit("-", 1)[-1]
            if num.isdigit():
                self._counter = max(self._counter, int(num))
        for path in sorted(self.masks_dir.glob("*.png")):
            stem = path.name[:-len(".png")]
            scan_id, _, annotator = stem.rpartition(".")
            if scan_id in self._scans and annotator:
                self._scans[scan_id].masks[annotator] = path.read_bytes()
        index = self.data_dir / "annotations.json"
        if index.exists():
            for doc in json.loads(index.read_text()):
                rec = AnnotationRecord(**doc)
                if rec.scan_id in self._scans:
                    self._scans[rec.scan_id].records[rec.annotator] = rec

    def _save_annotation_index(self) -> None:
        docs = [dataclasses.asdict(r)
                for res in self._scans.values()
                for r in res.records.values()]
        docs.sort(key=lambda d: (d["scan_id"], d["annotator"]))
        tmp = self.data_dir / "annotations.json.tmp"
        tmp.write_text(json.dumps(docs, indent=2) + "\n")
        tmp.replace(self.data_dir / "annotations.json")

    # -- scans -------------------------------------------------------------

    def list_scans(self) -> list[dict]:
        with self._lock:
            return [self._scans[k].summary() for k in sorted(self._scans)]

    def get(self, scan_id: str) -> ScanResource:
        with self._lock:
            try:
                return self._scans[scan_id]
            except KeyError:
                raise UnknownScanError(f"unknown scan {scan_id!r}") from None

    def add_sweep(self, sweep: Sweep, truth_mask: np.ndarray | None = None,
                  scan_id: str | None = None) -> str:
        """Register a raw sweep; the simulator ground truth, when given,
        becomes the mask of annotator ``simulator``."""
        with self._lock:
            if scan_id is None:
                self._counter += 1
                scan_id = f"scan-{self._counter:04d}"
            if scan_id in self._scans:
                raise StoreError(f"scan {scan_id!r} already exists")
            sweep = Sweep(sweep.config, sweep.lines,
                          {**sweep.metadata, "scan_id": scan_id})
            datastore.save_sweep(sweep, self.scans_dir / f"{scan_id}.scan")
            self._scans[scan_id] = ScanResource(scan_id, sweep)
            if truth_mask is not None:
                self.put_mask(scan_id, "simulator",
                              datastore.mask_to_png_bytes(truth_mask),
                              notes="echo provenance == object")
            return scan_id

    def put_processed(self, scan_id: str, sweep: Sweep) -> None:
        with self._lock:
            res = self.get(scan_id)
            if (sweep.config.line_count, sweep.config.plan.sample_count) \
                    != res.shape:
                raise DimensionMismatchError(
                    f"processed sweep shape does not match scan {scan_id}")
            datastore.save_sweep(sweep,
                                 self.scans_dir / f"{scan_id}.proc.scan")
            res.processed = sweep

    # -- rasters -----------------------------------------------------------

    def raster_png(self, scan_id: str, mode: str = "rect",
                   processed: bool = False,
                   pixels_per_meter: float = 60.0) -> bytes:
        res = self.get(scan_id)
        sweep = res.processed if processed else res.raw
        if sweep is None:
            raise UnknownScanError(f"scan {scan_id} has no processed sweep")
        if mode == "rect":
            raster = rasterize_rect(sweep)
        elif mode == "fan":
            raster = rasterize_fan(sweep, pixels_per_meter)
        else:
            raise ValueError(f"unknown raster mode {mode!r}")
        buf = io.BytesIO()
        Image.fromarray(raster, mode="L").save(buf, format="PNG")
        return buf.getvalue()

    # -- masks -------------------------------------------------------------

    def get_mask(self, scan_id: str, annotator: str) -> tuple[bytes, str]:
        with self._lock:
            res = self.get(scan_id)
            try:
                data = res.masks[annotator]
            except KeyError:
                raise UnknownScanError(
                    f"scan {scan_id} has no mask by {annotator!r}") from None
            return data, _etag(data)

    def put_mask(self, scan_id: str, annotator: str, png_bytes: bytes,
                 notes: str = "") -> str:
        """Store a mask PNG verbatim after validating its dimensions.

        Returns the new revision tag. Last writer wins per annotator.
        """
        if not ANNOTATOR_RE.fullmatch(annotator):
            raise ValueError(
                f"annotator {annotator!r} must match {ANNOTATOR_RE.pattern}")
        with self._lock:
            res = self.get(scan_id)
            mask = datastore.png_bytes_to_mask(png_bytes)
            if mask.shape != res.shape:
                raise DimensionMismatchError(
                    f"mask is {mask.shape}, scan {scan_id} is {res.shape}")
            path = self.masks_dir / f"{scan_id}.{annotator}.png"
            tmp = path.with_name(path.name + ".tmp")
            tmp.write_bytes(png_bytes)
            tmp.replace(path)
            res.masks[annotator] = png_bytes
            res.records[annotator] = AnnotationRecord(
                scan_id=scan_id, mask_path=str(path.relative_to(self.data_dir)),
                annotator=annotator, notes=notes)
            self._save_annotation_index()
            return _etag(png_bytes)

    def mask_etag(self, scan_id: str, annotator: str) -> str | None:
        with self._lock:
            res = self.get(scan_id)
            data = res.masks.get(annotator)
            return None if data is None else _etag(data)

    # -- evaluation --------------------------------------------------------

    def evaluate_masks(self, scan_id: str, pred_annotator: str,
                       true_annotator: str = "simulator") -> MetricReport:
        with self._lock:
            true_png, _ = self.get_mask(scan_id, true_annotator)
            pred_png, _ = self.get_mask(scan_id, pred_annotator)
        pair = MaskPair(datastore.png_bytes_to_mask(true_png).astype(float),
                        datastore.png_bytes_to_mask(pred_png).astype(float))
        return evaluate(pair)
