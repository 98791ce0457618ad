"""Command-line entry point.

Subcommands:
    simulate    render one experiment scene to scan file, rasters and mask
    preprocess  run the ROI + statistical threshold chain on a scan file
    dataset     generate / build / split / validate annotated datasets
    eval        score predicted masks against ground truth, JSON + CSV
    report      figures and a delimited summary for a scan file
    import      ingest externally collected raw data via column mapping
    serve       run the HTTP API and the TCP device emulator
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import datastore, figures, simulator
from .metrics import MaskPair, evaluate_many
from .preprocess import RoiSpec, ThresholdRule, preprocess_sweep
from .scanmodel import rasterize_rect


def _cmd_simulate(args) -> int:
    scene = simulator.experiment_scene(args.experiment, seed=args.seed)
    sweep, truth = simulator.simulate_sweep(scene, simulator.pool_config())
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{scene.name}-seed{args.seed}"
    datastore.save_sweep(sweep, out / f"{stem}.scan")
    datastore.save_raster_png(rasterize_rect(sweep), out / f"{stem}.raw.png")
    datastore.save_mask_png(truth.object_mask(), out / f"{stem}.mask.png")
    if args.preprocess:
        processed = preprocess_sweep(sweep)
        datastore.save_sweep(processed, out / f"{stem}.proc.scan")
        datastore.save_raster_png(rasterize_rect(processed),
                                  out / f"{stem}.proc.png")
    print(f"wrote {stem}.* to {out}")
    return 0


def _cmd_preprocess(args) -> int:
    sweep = datastore.load_sweep(args.input)
    roi = RoiSpec(args.roi_min, args.roi_max)
    processed = preprocess_sweep(sweep, roi, ThresholdRule(args.rule))
    datastore.save_sweep(processed, args.output)
    print(f"wrote {args.output}")
    return 0


def _cmd_dataset(args) -> int:
    if args.mode == "generate":
        jitter = simulator.DatasetJitter(seed=args.seed)
        config = simulator.pool_config(sample_count=args.bins,
                                        angular_step_grad=args.step,
                                        sector_start_grad=-args.sector,
                                        sector_end_grad=args.sector)
        noise = None
        if args.speckle_prob is not None or args.speckle_max is not None:
            defaults = simulator.NoiseModel()
            noise = simulator.NoiseModel(
                speckle_prob=(args.speckle_prob
                              if args.speckle_prob is not None
                              else defaults.speckle_prob),
                speckle_max=(args.speckle_max
                             if args.speckle_max is not None
                             else defaults.speckle_max))
        manifest = simulator.generate_dataset(
            args.out, count=args.count, jitter=jitter, split=args.split,
            config=config, noise=noise)
        print(f"generated {len(manifest.entries)} samples: "
              f"{manifest.counts['train']} train / {manifest.counts['val']} val "
              f"-> {args.out}/manifest.json")
        return 0
    if args.mode in ("build", "split"):
        manifest, orphans = datastore.build_manifest(
            args.dir, split_fraction=args.split, seed=args.seed)
        for name in orphans:
            print(f"warning: orphan file excluded: {name}", file=sys.stderr)
        print(f"manifest: {manifest.counts['train']} train / "
              f"{manifest.counts['val']} val -> {Path(args.dir)}/manifest.json")
        return 0
    if args.mode == "validate":
        manifest_path = Path(args.dir)
        if manifest_path.is_dir():
            manifest_path = manifest_path / "manifest.json"
        manifest = datastore.load_manifest(manifest_path)
        problems = datastore.validate_manifest(manifest, manifest_path.parent)
        for problem in problems:
            print(f"problem: {problem}", file=sys.stderr)
        print(f"{len(manifest.entries)} entries, {len(problems)} problems")
        return 1 if problems else 0
    raise AssertionError(args.mode)


def _load_mask_pairs(true_dir: Path, pred_dir: Path):
    """Match mask files between two directories by filename."""
    names = sorted(p.name for p in true_dir.glob("*.png"))
    pairs, used = [], []
    for name in names:
        pred_path = pred_dir / name
        if not pred_path.exists():
            continue
        y_true = datastore.load_mask_png(true_dir / name).astype(float)
        # Predictions may be soft probability maps (0..255 grayscale).
        raw = datastore.load_raster_png(pred_path).astype(float) / 255.0
        pairs.append(MaskPair(y_true, raw))
        used.append(name)
    return used, pairs


def _cmd_eval(args) -> int:
    true_dir, pred_dir = Path(args.true), Path(args.pred)
    names, pairs = _load_mask_pairs(true_dir, pred_dir)
    if not pairs:
        print(f"no matching mask pairs between {true_dir} and {pred_dir}",
              file=sys.stderr)
        return 1
    reports, mean, pooled = evaluate_many(pairs, threshold=args.threshold)
    doc = {
        "pairs": {n: r.as_dict() for n, r in zip(names, reports)},
        "mean": mean.as_dict(),
        "pixel_pooled": pooled.as_dict(),
        "count": len(pairs),
    }
    report_path = Path(args.report)
    report_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.write_text(json.dumps(doc, indent=2) + "\n")
    csv_path = args.csv or report_path.with_suffix(".csv")
    fields = list(mean.as_dict())
    with open(csv_path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["name"] + fields)
        for name, rep in zip(names, reports):
            vals = rep.as_dict()
            writer.writerow([name] + [f"{vals[f]:.6f}" for f in fields])
        for label, rep in (("mean", mean), ("pixel_pooled", pooled)):
            vals = rep.as_dict()
            writer.writerow([label] + [f"{vals[f]:.6f}" for f in fields])
    if args.figures:
        figures.metric_bars_figure({"mean": mean, "pixel_pooled": pooled},
                                   Path(args.figures) / "metrics.png")
    print(f"evaluated {len(pairs)} pairs -> {report_path}, {csv_path}")
    print("mean:   " + " ".join(f"{k}={v:.4f}" for k, v in mean.as_dict().items()))
    print("pooled: " + " ".join(f"{k}={v:.4f}" for k, v in pooled.as_dict().items()))
    return 0


def _cmd_report(args) -> int:
    sweep = datastore.load_sweep(args.scan)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.scan).stem
    roi = RoiSpec(args.roi_min, args.roi_max)
    processed = preprocess_sweep(sweep, roi) if args.preprocess else None
    written = figures.sweep_report_figures(sweep, out, stem,
                                           processed=processed, roi=roi,
                                           pixels_per_meter=args.ppm)
    summary = out / f"{stem}.summary.csv"
    with open(summary, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["angle_grad", "nonzero_bins", "max_intensity",
                         "peak_range_m"])
        sd = sweep.config.plan.sample_distance_m
        source = processed if processed is not None else sweep
        for line in source.lines:
            vals = line.intensities
            nonzero = int(np.count_nonzero(vals))
            peak = int(vals.argmax())
            writer.writerow([line.angle_grad, nonzero, int(vals.max()),
                             f"{(peak + 1) * sd:.4f}"])
    written.append(summary)
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_import(args) -> int:
    hints = {}
    if args.angle_unit:
        hints["angle_unit"] = args.angle_unit
    if args.angle_col is not None:
        hints["angle_col"] = args.angle_col
    if args.delimiter:
        hints["delimiter"] = args.delimiter
    if args.range is not None:
        hints["range_m"] = args.range
    if args.skip_rows:
        hints["skip_rows"] = args.skip_rows
    result = datastore.import_external(args.input, hints)
    for lineno, reason in result.skipped_rows:
        where = f"line {lineno}" if lineno else "sequence"
        print(f"skipped {where}: {reason}", file=sys.stderr)
    datastore.save_sweep(result.sweep, args.output)
    print(f"imported {len(result.sweep.lines)} lines "
          f"({len(result.skipped_rows)} rows skipped) -> {args.output}")
    return 0


def _cmd_serve(args) -> int:
    from .service import EmulatorServer, ApiServer, ScanStore

    servers = []
    if args.http:
        store = ScanStore(args.data)
        api = ApiServer(("", args.http), store, verbose=args.verbose)
        api.serve_background()
        servers.append(api)
        print(f"http api on :{args.http}, data dir {args.data}")
    if args.emulator:
        scene = simulator.experiment_scene(args.scene, seed=args.seed)
        emu = EmulatorServer(("", args.emulator), scene,
                             lines_per_second=args.rate)
        emu.serve_background()
        servers.append(emu)
        print(f"device emulator on :{args.emulator}, scene {scene.name}, "
              f"{args.rate} lines/s")
    if not servers:
        print("nothing to serve; pass --http and/or --emulator", file=sys.stderr)
        return 2
    try:
        import time
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        for server in servers:
            server.shutdown()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="p3sonar", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate one experiment scene")
    p.add_argument("--experiment", type=int, required=True, metavar="N",
                   help="experiment number 1..10")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--preprocess", action="store_true",
                   help="also write the preprocessed scan and raster")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("preprocess", help="ROI gate + statistical threshold")
    p.add_argument("input", help="input scan file")
    p.add_argument("output", help="output scan file")
    p.add_argument("--roi-min", type=float, default=0.75)
    p.add_argument("--roi-max", type=float, default=6.0)
    p.add_argument("--rule", choices=[r.value for r in ThresholdRule],
                   default=ThresholdRule.TWO_MU_PLUS_SIGMA.value)
    p.set_defaults(func=_cmd_preprocess)

    p = sub.add_parser("dataset", help="generate or manage datasets")
    p.add_argument("mode", nargs="?", default="generate",
                   choices=["generate", "build", "split", "validate"])
    p.add_argument("dir", nargs="?", help="data directory (build/validate)")
    p.add_argument("--count", type=int, default=700)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", type=float, default=0.8)
    p.add_argument("--out", help="output directory (generate)")
    p.add_argument("--bins", type=int, default=1200,
                   help="range samples per beam (generate)")
    p.add_argument("--step", type=int, default=1,
                   help="angular step in gradians (generate)")
    p.add_argument("--sector", type=int, default=100,
                   help="half sector width in gradians (generate)")
    p.add_argument("--speckle-prob", type=float,
                   help="per-bin speckle probability override (generate)")
    p.add_argument("--speckle-max", type=int,
                   help="max speckle intensity override (generate)")
    p.set_defaults(func=_cmd_dataset)

    p = sub.add_parser("eval", help="score predicted masks")
    p.add_argument("--true", required=True, help="ground-truth mask directory")
    p.add_argument("--pred", required=True, help="predicted mask directory")
    p.add_argument("--report", required=True, help="output JSON path")
    p.add_argument("--csv", help="output CSV path (default: next to JSON)")
    p.add_argument("--figures", help="directory for metric figures")
    p.add_argument("--threshold", type=float, default=0.5)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("report", help="figures + summary for a scan file")
    p.add_argument("--scan", required=True, help="scan file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--preprocess", action="store_true", default=True)
    p.add_argument("--no-preprocess", dest="preprocess", action="store_false")
    p.add_argument("--roi-min", type=float, default=0.75)
    p.add_argument("--roi-max", type=float, default=6.0)
    p.add_argument("--ppm", type=float, default=60.0,
                   help="fan view pixels per meter")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("import", help="ingest external raw data")
    p.add_argument("input")
    p.add_argument("output", help="output scan file")
    p.add_argument("--angle-unit", choices=["grad", "deg"])
    p.add_argument("--angle-col", type=int)
    p.add_argument("--delimiter")
    p.add_argument("--range", type=float, help="assumed max range in meters")
    p.add_argument("--skip-rows", type=int, default=0)
    p.set_defaults(func=_cmd_import)

    p = sub.add_parser("serve", help="HTTP API and/or TCP device emulator")
    p.add_argument("--http", type=int, metavar="PORT")
    p.add_argument("--emulator", type=int, metavar="PORT")
    p.add_argument("--data", default="./p3sonar-data", help="data directory")
    p.add_argument("--scene", type=int, default=1,
                   help="emulator experiment scene 1..10")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rate", type=float, default=20.0,
                   help="emulator lines per second, 0 = unthrottled")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "dataset":
        if args.mode == "generate" and not args.out:
            build_parser().error("dataset generate requires --out")
        if args.mode in ("build", "split", "validate") and not args.dir:
            build_parser().error(f"dataset {args.mode} requires a directory")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
