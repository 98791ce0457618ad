"""Harness command line: train one model, export predictions, or run the
preprocessed-vs-raw comparison."""

import argparse
import json
import sys
from pathlib import Path

from .train import (TrainConfig, compare_variants, export_truth_masks,
                    predict_and_export, run_primary_eval, train)


def _cmd_train(args) -> int:
    config = TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                         learning_rate=args.lr, dice_weight=args.dice_weight,
                         seed=args.seed, variant=args.variant,
                         downscale=args.downscale)
    result = train(args.manifest, config, args.out, device=args.device)
    print(f"checkpoint: {result.checkpoint_path}")
    print(f"final loss: {result.loss_log[-1]:.5f}")
    return 0


def _cmd_predict(args) -> int:
    hard_dir, soft_dir = predict_and_export(
        args.checkpoint, args.manifest, args.split, args.out,
        device=args.device)
    print(f"masks: {hard_dir}\nprobabilities: {soft_dir}")
    if args.eval:
        truth = export_truth_masks(args.manifest, args.split,
                                   Path(args.out) / "truth")
        report = run_primary_eval(truth, hard_dir,
                                  Path(args.out) / "report.json")
        print(json.dumps(report["mean"], indent=2))
    return 0


def _cmd_compare(args) -> int:
    result = compare_variants(args.manifest, args.out, epochs=args.epochs,
                              seeds=tuple(args.seeds), downscale=args.downscale,
                              batch_size=args.batch_size, device=args.device)
    for seed, doc in result["seeds"].items():
        pre, raw = doc["preprocessed"], doc["raw"]
        print(f"seed {seed}: preprocessed PA={pre['pa']:.3f} DC={pre['dc']:.3f}"
              f" | raw PA={raw['pa']:.3f} DC={raw['dc']:.3f}"
              f" | win={doc['preprocessed_wins']}")
    print(f"preprocessed wins {result['wins']}/{len(result['seeds'])} seeds")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="segharness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--dice-weight", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variant", choices=["raw", "preprocessed"],
                   default="preprocessed")
    p.add_argument("--downscale", type=int, default=1)
    p.add_argument("--device", default="cpu")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict")
    p.add_argument("checkpoint")
    p.add_argument("manifest")
    p.add_argument("--split", default="val")
    p.add_argument("--out", required=True)
    p.add_argument("--eval", action="store_true",
                   help="also score with the primary eval CLI")
    p.add_argument("--device", default="cpu")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("compare")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--downscale", type=int, default=1)
    p.add_argument("--device", default="cpu")
    p.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
