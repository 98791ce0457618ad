"""Report figures rendered to files with matplotlib.

Everything here uses the Agg backend and writes PNG files next to the
delimited report output: fan-view occupancy maps with range rings and ROI
shading, rect-view raster panels, and metric comparison charts.
"""

import math
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .preprocess import RoiSpec
from .scanmodel import Sweep, grad_to_rad, rasterize_fan, rasterize_rect

__all__ = ["fan_figure", "rect_figure", "sweep_report_figures",
           "metric_bars_figure"]

FIG_DPI = 120


def _range_ring(ax, origin, radius_px, **kwargs):
    theta = np.linspace(0.0, math.pi, 181)
    ax.plot(origin[0] + radius_px * np.cos(theta),
            origin[1] - radius_px * np.sin(theta), **kwargs)


def fan_figure(sweep: Sweep, path, pixels_per_meter: float = 60.0,
               roi: RoiSpec | None = None, title: str | None = None) -> Path:
    """Plan-view occupancy map with 1 m range rings and ROI shading."""
    path = Path(path)
    raster = rasterize_fan(sweep, pixels_per_meter)
    side = raster.shape[0]
    origin = (side // 2, side - 1)      # (x=col, y=row) of the sonar
    max_range = sweep.config.plan.max_range_m

    fig, ax = plt.subplots(figsize=(7, 4.2), dpi=FIG_DPI)
    ax.imshow(raster, cmap="gray", vmin=0, vmax=255, interpolation="nearest")
    for ring_m in range(1, int(math.floor(max_range)) + 1):
        _range_ring(ax, origin, ring_m * pixels_per_meter,
                    color="tab:cyan", lw=0.6, alpha=0.6)
        ax.annotate(f"{ring_m} m", (origin[0] + ring_m * pixels_per_meter, origin[1]),
                    color="tab:cyan", fontsize=6, ha="left", va="bottom")
    if roi is not None:
        for r_m, style in ((roi.min_range_m, ":"), (roi.max_range_m, "--")):
            _range_ring(ax, origin, r_m * pixels_per_meter,
                        color="tab:orange", lw=0.9, ls=style, alpha=0.9)
    for angle in (sweep.config.sector_start_grad, sweep.config.sector_end_grad):
        theta = grad_to_rad(angle)
        ax.plot([origin[0], origin[0] - max_range * pixels_per_meter
                 * math.sin(theta)],
                [origin[1], origin[1] - max_range * pixels_per_meter
                 * math.cos(theta)],
                color="tab:cyan", lw=0.5, alpha=0.5)
    ax.set_ylim(side - 1, max(0, side - 1 - int(max_range * pixels_per_meter) - 20))
    ax.set_title(title or f"fan view ({sweep.metadata.get('scene', 'scan')})",
                 fontsize=9)
    ax.set_axis_off()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def rect_figure(sweep: Sweep, path, title: str | None = None) -> Path:
    """Range-angle raster with physical axis labels."""
    path = Path(path)
    raster = rasterize_rect(sweep)
    cfg = sweep.config
    fig, ax = plt.subplots(figsize=(8, 3.2), dpi=FIG_DPI)
    ax.imshow(raster, cmap="gray", vmin=0, vmax=255, aspect="auto",
              interpolation="nearest",
              extent=(0.0, cfg.plan.max_range_m,
                      cfg.sector_end_grad, cfg.sector_start_grad))
    ax.set_xlabel("range [m]")
    ax.set_ylabel("beam angle [grad]")
    ax.set_title(title or f"rect view ({sweep.metadata.get('scene', 'scan')})",
                 fontsize=9)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def sweep_report_figures(sweep: Sweep, out_dir, stem: str,
                         processed: Sweep | None = None,
                         roi: RoiSpec | None = None,
                         pixels_per_meter: float = 60.0) -> list[Path]:
    """Render the standard figure set for one scan."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [
        rect_figure(sweep, out_dir / f"{stem}.rect.png"),
        fan_figure(sweep, out_dir / f"{stem}.fan.png",
                   pixels_per_meter=pixels_per_meter, roi=roi),
    ]
    if processed is not None:
        written.append(rect_figure(processed, out_dir / f"{stem}.proc.rect.png",
                                   title="rect view, preprocessed"))
        written.append(fan_figure(processed, out_dir / f"{stem}.proc.fan.png",
                                  pixels_per_meter=pixels_per_meter, roi=roi,
                                  title="fan view, preprocessed"))
    return written


def metric_bars_figure(reports: dict, path, title: str = "segmentation metrics"
                       ) -> Path:
    """Grouped bars, one group per metric, one bar per labeled report.

    ``reports`` maps a label (e.g. "preprocessed", "raw") to a MetricReport
    or plain dict of metric name to value.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    labels = list(reports)
    first = reports[labels[0]]
    names = list(first.as_dict() if hasattr(first, "as_dict") else first)
    x = np.arange(len(names), dtype=float)
    width = 0.8 / max(1, len(labels))

    fig, ax = plt.subplots(figsize=(8, 3.4), dpi=FIG_DPI)
    for k, label in enumerate(labels):
        rep = reports[label]
        vals = rep.as_dict() if hasattr(rep, "as_dict") else rep
        ax.bar(x + k * width, [vals[n] for n in names], width, label=label)
    ax.set_xticks(x + width * (len(labels) - 1) / 2)
    ax.set_xticklabels([n.upper() for n in names], fontsize=8)
    ax.set_ylim(0, 1.05)
    ax.set_title(title, fontsize=9)
    ax.legend(fontsize=8)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
