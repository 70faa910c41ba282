"""Command line: `segmenter train ...` and `segmenter infer ...`.

Exit codes: 0 success, 2 bad usage or unusable input, 3 missing files
or directories.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence, Tuple

from .infer import infer_dir
from .train import TrainConfig, train

__all__ = ["main", "build_parser"]


def _parse_size(text: str) -> Tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"size must look like 640x480, got {text!r}"
        ) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segmenter",
        description="Toy encoder-decoder iris segmentation: train on an "
        "images/+masks/ dataset, then emit mask PNGs for new images.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train on a dataset directory")
    p.add_argument("--data", required=True, help="directory with images/ and masks/")
    p.add_argument("--out", required=True, help="model checkpoint path")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--input-size", type=_parse_size, default=(320, 240),
                   metavar="WxH")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(cmd="train")

    p = sub.add_parser("infer", help="segment every PNG in a directory")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="in_dir", required=True, metavar="DIR")
    p.add_argument("--out", required=True, help="output mask directory")
    p.add_argument("--size", type=_parse_size, default=None, metavar="WxH",
                   help="output mask size (default: each source image's size)")
    p.set_defaults(cmd="infer")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "train":
            cfg = TrainConfig(
                epochs=args.epochs,
                batch_size=args.batch_size,
                learning_rate=args.lr,
                momentum=args.momentum,
                train_fraction=args.train_fraction,
                input_size=args.input_size,
            )
            log = train(args.data, args.out, cfg, seed=args.seed)
            print(f"best val IoU {log['best_val_iou']:.4f} "
                  f"(epoch {log['best_epoch']}) -> {args.out}")
        else:
            n = infer_dir(args.model, args.in_dir, args.out, args.size)
            print(f"wrote {n} masks to {args.out}")
        return 0
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
