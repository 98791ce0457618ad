"""Segmentation losses and the nine-number evaluation suite over mask pairs.

Pixel metrics come from TP/FP/FN/TN counts after binarizing the prediction;
MAE is computed on the raw probabilities. Boundary metrics extract the
one-pixel boundary (mask minus its erosion by the 3x3 cross) and count
matches within a Chebyshev pixel tolerance via dilation.

Empty-mask convention: any overlap metric whose denominator vanishes is 1
when both masks are empty and 0 when exactly one is.
"""

import json
from dataclasses import dataclass, asdict

import numpy as np

__all__ = [
    "MaskPair",
    "MetricReport",
    "bce_loss",
    "dice_loss",
    "dice_coefficient",
    "evaluate",
    "evaluate_many",
    "boundary_metrics",
    "mask_boundary",
    "BCE_EPS",
    "DEFAULT_BOUNDARY_TOLERANCE_PX",
]

BCE_EPS = 1e-7
DEFAULT_BOUNDARY_TOLERANCE_PX = 2


@dataclass(frozen=True)
class MaskPair:
    """Ground-truth binary raster and predicted probability raster."""

    y_true: np.ndarray
    y_pred: np.ndarray

    def __post_init__(self) -> None:
        yt = np.asarray(self.y_true, dtype=np.float64)
        yp = np.asarray(self.y_pred, dtype=np.float64)
        if yt.shape != yp.shape:
            raise ValueError(f"shape mismatch: {yt.shape} vs {yp.shape}")
        if yt.ndim != 2:
            raise ValueError("masks must be 2-D rasters")
        if not np.isin(yt, (0.0, 1.0)).all():
            raise ValueError("y_true must be binary")
        if yp.min() < 0.0 or yp.max() > 1.0:
            raise ValueError("y_pred values must lie in [0, 1]")
        object.__setattr__(self, "y_true", yt)
        object.__setattr__(self, "y_pred", yp)

    @property
    def n_pixels(self) -> int:
        return self.y_true.size


@dataclass(frozen=True)
class MetricReport:
    """The evaluation numbers, all in [0, 1]."""

    dc: float
    iou: float
    pa: float
    ps: float
    rs: float
    f1s: float
    mae: float
    biou: float
    bs: float

    def as_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.as_dict(), **kwargs)


def bce_loss(pair: MaskPair) -> float:
    """Mean binary cross-entropy with predictions clamped to [eps, 1-eps]."""
    p = np.clip(pair.y_pred, BCE_EPS, 1.0 - BCE_EPS)
    y = pair.y_true
    return float(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)).mean())


def dice_coefficient(pair: MaskPair) -> float:
    """Soft Dice overlap 2|T.P| / (|T| + |P|); 1 when both masks are empty."""
    num = 2.0 * float((pair.y_true * pair.y_pred).sum())
    den = float(pair.y_true.sum() + pair.y_pred.sum())
    if den == 0.0:
        return 1.0
    return num / den


def dice_loss(pair: MaskPair) -> float:
    """1 minus the soft Dice coefficient."""
    return 1.0 - dice_coefficient(pair)


def _ratio(num: float, den: float, both_empty: bool) -> float:
    if den == 0.0:
        return 1.0 if both_empty else 0.0
    return num / den


def mask_boundary(mask: np.ndarray) -> np.ndarray:
    """Boundary pixels: the mask minus its erosion by the 3x3 cross.

    Pixels outside the raster count as background, so object pixels on the
    image border are always boundary.
    """
    m = mask.astype(bool)
    eroded = m.copy()
    padded = np.pad(m, 1, constant_values=False)
    eroded &= padded[:-2, 1:-1]   # up
    eroded &= padded[2:, 1:-1]    # down
    eroded &= padded[1:-1, :-2]   # left
    eroded &= padded[1:-1, 2:]    # right
    return m & ~eroded


def _dilate_chebyshev(mask: np.ndarray, radius: int) -> np.ndarray:
    """Dilation by the Chebyshev ball: ``radius`` passes of the 3x3 square."""
    out = mask.astype(bool)
    for _ in range(radius):
        padded = np.pad(out, 1, constant_values=False)
        acc = out.copy()
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                acc |= padded[1 + dr:padded.shape[0] - 1 + dr,
                              1 + dc:padded.shape[1] - 1 + dc]
        out = acc
    return out


def _boundary_counts(y_true_bin: np.ndarray, y_pred_bin: np.ndarray,
                     tolerance_px: int) -> dict:
    """Raw boundary match counts between two binary masks."""
    bt = mask_boundary(np.asarray(y_true_bin))
    bp = mask_boundary(np.asarray(y_pred_bin))
    bt_dil = _dilate_chebyshev(bt, tolerance_px)
    bp_dil = _dilate_chebyshev(bp, tolerance_px)
    matched_t = bt & bp_dil     # true-boundary pixels matched by prediction
    matched_p = bp & bt_dil     # predicted-boundary pixels matched by truth
    return {
        "matched_any": float((matched_t | matched_p).sum()),
        "union": float((bt | bp).sum()),
        "matched_t": float(matched_t.sum()),
        "bt": float(bt.sum()),
        "matched_p": float(matched_p.sum()),
        "bp": float(bp.sum()),
    }


def _boundary_from_counts(c: dict) -> tuple[float, float]:
    both_empty = c["bt"] == 0.0 and c["bp"] == 0.0
    biou = _ratio(c["matched_any"], c["union"], both_empty)
    precision = _ratio(c["matched_p"], c["bp"], both_empty)
    recall = _ratio(c["matched_t"], c["bt"], both_empty)
    bs = _ratio(2.0 * precision * recall, precision + recall, both_empty)
    return biou, bs


def boundary_metrics(y_true_bin: np.ndarray, y_pred_bin: np.ndarray,
                     tolerance_px: int = DEFAULT_BOUNDARY_TOLERANCE_PX
                     ) -> tuple[float, float]:
    """(BIoU, BS) of two binary masks.

    A boundary pixel matches when the opposing boundary, dilated by the
    tolerance, covers it. BIoU is matched boundary pixels over the union of
    both boundaries; BS is the harmonic mean of boundary precision and
    recall.
    """
    return _boundary_from_counts(
        _boundary_counts(y_true_bin, y_pred_bin, tolerance_px))


def _report_from_counts(tp: float, fp: float, fn: float, tn: float,
                        abs_err_sum: float, n_pixels: float,
                        boundary: dict) -> MetricReport:
    both_empty = tp + fn == 0.0 and tp + fp == 0.0
    dc = _ratio(2.0 * tp, 2.0 * tp + fp + fn, both_empty)
    iou = _ratio(tp, tp + fp + fn, both_empty)
    pa = (tp + tn) / n_pixels
    ps = _ratio(tp, tp + fp, both_empty)
    rs = _ratio(tp, tp + fn, both_empty)
    # F1 of binary masks is the same set identity as Dice; computing it from
    # the counts keeps F1S == DC exact instead of within float noise.
    f1s = _ratio(2.0 * tp, 2.0 * tp + fp + fn, both_empty)
    mae = abs_err_sum / n_pixels
    biou, bs = _boundary_from_counts(boundary)
    return MetricReport(dc=dc, iou=iou, pa=pa, ps=ps, rs=rs, f1s=f1s,
                        mae=mae, biou=biou, bs=bs)


def evaluate(pair: MaskPair, threshold: float = 0.5,
             boundary_tolerance_px: int = DEFAULT_BOUNDARY_TOLERANCE_PX
             ) -> MetricReport:
    """Compute the full report for one pair.

    The prediction is binarized at ``threshold`` for everything except MAE,
    which compares the raw probabilities against the truth.
    """
    y = pair.y_true.astype(bool)
    p = pair.y_pred >= threshold
    tp = float((y & p).sum())
    fp = float((~y & p).sum())
    fn = float((y & ~p).sum())
    tn = float((~y & ~p).sum())
    abs_err = float(np.abs(pair.y_true - pair.y_pred).sum())
    return _report_from_counts(tp, fp, fn, tn, abs_err, pair.n_pixels,
                               _boundary_counts(y, p, boundary_tolerance_px))


def evaluate_many(pairs, threshold: float = 0.5,
                  boundary_tolerance_px: int = DEFAULT_BOUNDARY_TOLERANCE_PX
                  ) -> tuple[list[MetricReport], MetricReport, MetricReport]:
    """Evaluate a sequence of pairs.

    Returns (per-pair reports, per-image mean, pixel-pooled report). The
    per-image mean averages each metric over pairs and is the headline
    number; the pooled report recomputes every metric from counts summed
    over all pixels of all pairs.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no mask pairs to evaluate")
    reports = []
    sums = {"tp": 0.0, "fp": 0.0, "fn": 0.0, "tn": 0.0,
            "abs_err": 0.0, "n": 0.0}
    bsums = {k: 0.0 for k in ("matched_any", "union", "matched_t", "bt",
                              "matched_p", "bp")}
    for pair in pairs:
        y = pair.y_true.astype(bool)
        p = pair.y_pred >= threshold
        tp = float((y & p).sum())
        fp = float((~y & p).sum())
        fn = float((y & ~p).sum())
        tn = float((~y & ~p).sum())
        abs_err = float(np.abs(pair.y_true - pair.y_pred).sum())
        bc = _boundary_counts(y, p, boundary_tolerance_px)
        reports.append(_report_from_counts(tp, fp, fn, tn, abs_err,
                                           pair.n_pixels, bc))
        for key, val in zip(("tp", "fp", "fn", "tn", "abs_err", "n"),
                            (tp, fp, fn, tn, abs_err, pair.n_pixels)):
            sums[key] += val
        for key in bsums:
            bsums[key] += bc[key]
    fields = reports[0].as_dict().keys()
    mean = MetricReport(**{
        f: sum(r.as_dict()[f] for r in reports) / len(reports) for f in fields})
    pooled = _report_from_counts(sums["tp"], sums["fp"], sums["fn"],
                                 sums["tn"], sums["abs_err"], sums["n"], bsums)
    return reports, mean, pooled
