"""Command-line entry point exposing the pipeline as subcommands.

Exit codes: 0 success, 2 bad usage/parameters, 3 data error (missing or
malformed inputs), 4 internal error.  Failures print one JSON line to
stderr: {"error": category, "detail": text}.

A JSON config file (via --config or the IRISFORGE_CONFIG env var) may
override circle-search, normalization, and matching defaults:

    {"hough": {"r_min_outer": 40.0, ...},
     "normalize": {"n_radial": 64, "n_angular": 512},
     "match": {"max_shift": 16, "min_bits": 128}}
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

from . import augment as augment_mod
from . import eval as eval_mod
from . import metrics
from . import synth as synth_mod
from .match import DEFAULT_MAX_SHIFT, DEFAULT_MIN_BITS, run_manifest
from .circlefit import HoughConfig, boundaries_from_json, boundaries_to_json, fit_boundaries
from .encode import default_bank, encode, load_bank, save_code
from .errors import DataError
from .imgcore import load_gray_image, load_mask, save_gray_image
from .normalize import rubber_sheet, save_normalized

__all__ = ["main", "build_parser"]

_CONFIG_ENV = "IRISFORGE_CONFIG"


class _Parser(argparse.ArgumentParser):
    """argparse that also emits the machine-readable error line."""

    def error(self, message):
        self.print_usage(sys.stderr)
        _emit("usage", message)
        raise SystemExit(2)


def _emit(category: str, detail: str) -> None:
    print(json.dumps({"error": category, "detail": detail}), file=sys.stderr)


# ---------------------------------------------------------------------------
# config handling

def _load_config(path: Optional[str]) -> dict:
    path = path or os.environ.get(_CONFIG_ENV)
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    return cfg


def _hough_config(cfg: dict, width: int, height: int) -> HoughConfig:
    overrides = cfg.get("hough", {})
    try:
        return HoughConfig.for_frame(width, height, **overrides)
    except TypeError as exc:
        raise ValueError(f"bad hough config: {exc}") from exc


def _norm_dims(cfg: dict) -> Tuple[int, int]:
    sec = cfg.get("normalize", {})
    return int(sec.get("n_radial", 64)), int(sec.get("n_angular", 512))


def _match_params(cfg: dict, args) -> Tuple[int, int]:
    sec = cfg.get("match", {})
    max_shift = args.max_shift if args.max_shift is not None else int(
        sec.get("max_shift", DEFAULT_MAX_SHIFT)
    )
    min_bits = args.min_bits if args.min_bits is not None else int(
        sec.get("min_bits", DEFAULT_MIN_BITS)
    )
    return max_shift, min_bits


def _run_jobs(fn, jobs_args: Sequence, jobs: int) -> list:
    if jobs <= 1:
        return [fn(a) for a in jobs_args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, jobs_args))


def _png_stems(directory: str) -> Dict[str, str]:
    if not os.path.isdir(directory):
        raise FileNotFoundError(f"not a directory: {directory}")
    out = {}
    for name in os.listdir(directory):
        if name.lower().endswith(".png"):
            out[os.path.splitext(name)[0]] = os.path.join(directory, name)
    return out


# ---------------------------------------------------------------------------
# worker functions (module-level so process pools can pickle them)

def _seg_eval_one(job: Tuple[str, str, str]) -> Tuple[str, float, float]:
    stem, pred_path, gt_path = job
    pred = load_mask(pred_path)
    gt = load_mask(gt_path)
    score = metrics.seg_score(pred, gt)
    return stem, score.iou, score.hd


def _augment_one(job: Tuple[str, str, str]) -> str:
    stem, src, out_dir = job
    image = load_gray_image(src)
    for variant, suffix in zip(augment_mod.augment_five_fold(image), augment_mod.AUGMENT_SUFFIXES):
        save_gray_image(variant, os.path.join(out_dir, f"{stem}_{suffix}.png"))
    return stem


def _pipeline_one(job: dict) -> str:
    image = load_gray_image(job["image_path"])
    mask = load_mask(job["mask_path"])
    cfg = HoughConfig.for_frame(mask.width, mask.height, **job["hough_overrides"])
    bounds = fit_boundaries(mask, cfg)
    with open(job["circles_path"], "w", encoding="utf-8") as fh:
        fh.write(boundaries_to_json(bounds) + "\n")
    norm = rubber_sheet(image, mask, bounds, job["n_radial"], job["n_angular"])
    bank = load_bank(job["bank_path"]) if job["bank_path"] else default_bank()
    save_code(encode(norm, bank), job["code_path"])
    return job["stem"]


# ---------------------------------------------------------------------------
# subcommands

def _cmd_synth(args) -> int:
    records = synth_mod.sample_dataset(
        args.count,
        args.samples_per_id,
        width=args.width,
        height=args.height,
        seed=args.seed,
        noise_sigma=args.noise_sigma,
        max_rotation_deg=args.max_rotation_deg,
        max_occlusion=args.max_occlusion,
    )
    synth_mod.write_dataset(records, args.out)
    print(f"wrote {len(records)} images to {args.out}")
    return 0


def _cmd_seg_eval(args) -> int:
    pred = _png_stems(args.pred)
    gt = _png_stems(args.gt)
    stems = sorted(set(pred) & set(gt))
    if not stems:
        raise DataError("no common stems between --pred and --gt directories")
    rows = _run_jobs(_seg_eval_one, [(s, pred[s], gt[s]) for s in stems], args.jobs)
    rows.sort(key=lambda r: r[0])

    csv_path = os.path.splitext(args.out)[0] + ".csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stem", "iou", "hd"])
        for stem, iou_v, hd_v in rows:
            writer.writerow([stem, f"{iou_v:.9f}", f"{hd_v:.9f}"])

    iou_summary = metrics.summarize(r[1] for r in rows)
    hd_summary = metrics.summarize(r[2] for r in rows)
    payload = {
        "n": len(rows),
        "iou": {"mean": iou_summary.mean, "std": iou_summary.std},
        "hd": {"mean": hd_summary.mean, "std": hd_summary.std},
        "per_file_csv": os.path.basename(csv_path),
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    print(f"IoU {iou_summary.mean:.4f} +/- {iou_summary.std:.4f}, "
          f"HD {hd_summary.mean:.4f} +/- {hd_summary.std:.4f} over {len(rows)} pairs")
    return 0


def _cmd_fit(args) -> int:
    cfg = _load_config(args.config)
    mask = load_mask(args.mask)
    bounds = fit_boundaries(mask, _hough_config(cfg, mask.width, mask.height))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(boundaries_to_json(bounds) + "\n")
    return 0


def _cmd_normalize(args) -> int:
    cfg = _load_config(args.config)
    image = load_gray_image(args.image)
    mask = load_mask(args.mask)
    with open(args.circles, "r", encoding="utf-8") as fh:
        bounds = boundaries_from_json(fh.read())
    n_radial, n_angular = _norm_dims(cfg)
    save_normalized(rubber_sheet(image, mask, bounds, n_radial, n_angular), args.out_prefix)
    return 0


def _cmd_encode(args) -> int:
    cfg = _load_config(args.config)
    image = load_gray_image(args.image)
    mask = load_mask(args.mask)
    if args.circles:
        with open(args.circles, "r", encoding="utf-8") as fh:
            bounds = boundaries_from_json(fh.read())
    else:
        bounds = fit_boundaries(mask, _hough_config(cfg, mask.width, mask.height))
    n_radial, n_angular = _norm_dims(cfg)
    norm = rubber_sheet(image, mask, bounds, n_radial, n_angular)
    bank = load_bank(args.bank) if args.bank else default_bank()
    save_code(encode(norm, bank), args.out)
    return 0


def _cmd_match(args) -> int:
    cfg = _load_config(args.config)
    max_shift, min_bits = _match_params(cfg, args)
    n = run_manifest(args.manifest, args.out, max_shift=max_shift, min_bits=min_bits)
    print(f"scored {n} pairs -> {args.out}")
    return 0


def _cmd_roc(args) -> int:
    scores = eval_mod.read_scores_csv(args.scores)
    curve = eval_mod.roc(scores)
    stats = eval_mod.summarize_scores(scores)
    eval_mod.write_roc_csv(curve, args.out_prefix + "_roc.csv")
    eval_mod.write_summary_json(curve, stats, args.out_prefix + "_summary.json")
    eval_mod.write_boxplot_csv(stats, args.out_prefix + "_boxplot.csv")
    print(f"EER {curve.eer:.4f}")
    return 0


def _cmd_augment(args) -> int:
    sources = _png_stems(args.in_dir)
    if not sources:
        raise DataError(f"no PNG files in {args.in_dir}")
    os.makedirs(args.out, exist_ok=True)
    stems = sorted(sources)
    _run_jobs(_augment_one, [(s, sources[s], args.out) for s in stems], args.jobs)
    print(f"augmented {len(stems)} images five-fold -> {args.out}")
    return 0


def _load_identities(dataset_dir: str, stems: Sequence[str]) -> Dict[str, str]:
    """Identity label per stem: truth.jsonl if present, else stem prefix."""
    truth_path = os.path.join(dataset_dir, "truth.jsonl")
    if os.path.exists(truth_path):
        table: Dict[str, str] = {}
        with open(truth_path, "r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    table[rec["name"]] = str(rec["identity"])
        missing = [s for s in stems if s not in table]
        if missing:
            raise DataError(f"truth.jsonl lacks entries for {len(missing)} stems, e.g. {missing[0]}")
        return {s: table[s] for s in stems}
    return {s: s.split("_")[0] for s in stems}


def _cmd_pipeline(args) -> int:
    cfg = _load_config(args.config)
    images = _png_stems(os.path.join(args.dataset, "images"))
    masks = _png_stems(os.path.join(args.dataset, "masks"))
    stems = sorted(set(images) & set(masks))
    if not stems:
        raise DataError(f"{args.dataset}: no image/mask pairs with common stems")
    identities = _load_identities(args.dataset, stems)

    circles_dir = os.path.join(args.out, "circles")
    codes_dir = os.path.join(args.out, "codes")
    os.makedirs(circles_dir, exist_ok=True)
    os.makedirs(codes_dir, exist_ok=True)

    n_radial, n_angular = _norm_dims(cfg)
    jobs = [
        {
            "stem": s,
            "image_path": images[s],
            "mask_path": masks[s],
            "circles_path": os.path.join(circles_dir, s + ".json"),
            "code_path": os.path.join(codes_dir, s + ".bin"),
            "hough_overrides": cfg.get("hough", {}),
            "n_radial": n_radial,
            "n_angular": n_angular,
            "bank_path": args.bank,
        }
        for s in stems
    ]
    _run_jobs(_pipeline_one, jobs, args.jobs)

    pairs_path = os.path.join(args.out, "pairs.csv")
    with open(pairs_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["code_path_a", "code_path_b", "label"])
        for sa, sb in itertools.combinations(stems, 2):
            label = "genuine" if identities[sa] == identities[sb] else "impostor"
            writer.writerow([f"codes/{sa}.bin", f"codes/{sb}.bin", label])

    max_shift, min_bits = _match_params(cfg, args)
    scores_path = os.path.join(args.out, "scores.csv")
    run_manifest(pairs_path, scores_path, max_shift=max_shift, min_bits=min_bits)

    scores = eval_mod.read_scores_csv(scores_path)
    curve = eval_mod.roc(scores)
    stats = eval_mod.summarize_scores(scores)
    eval_mod.write_roc_csv(curve, os.path.join(args.out, "roc.csv"))
    eval_mod.write_summary_json(curve, stats, os.path.join(args.out, "summary.json"))
    eval_mod.write_boxplot_csv(stats, os.path.join(args.out, "boxplot.csv"))
    report = {
        "n_images": len(stems),
        "n_genuine": stats.genuine.n,
        "n_impostor": stats.impostor.n,
        "eer": curve.eer,
        "genuine_mean": stats.genuine.mean,
        "impostor_mean": stats.impostor.mean,
        "mean_separation": stats.impostor.mean - stats.genuine.mean,
    }
    with open(os.path.join(args.out, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    print(f"EER {curve.eer:.4f} over {stats.genuine.n} genuine / "
          f"{stats.impostor.n} impostor pairs")
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="irisforge",
        description="Iris recognition pipeline: synthetic data, circle fitting, "
        "normalization, Gabor codes, matching, and evaluation.",
        epilog=f"Set {_CONFIG_ENV} to supply a default --config path.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a synthetic eye dataset")
    p.add_argument("--count", type=int, default=50, help="number of identities")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples-per-id", type=int, default=4)
    p.add_argument("--width", type=int, default=320)
    p.add_argument("--height", type=int, default=240)
    p.add_argument("--noise-sigma", type=float, default=8.0)
    p.add_argument("--max-rotation-deg", type=float, default=5.0)
    p.add_argument("--max-occlusion", type=float, default=0.3)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("seg-eval", help="score predicted masks against ground truth")
    p.add_argument("--pred", required=True, help="directory of predicted mask PNGs")
    p.add_argument("--gt", required=True, help="directory of ground-truth mask PNGs")
    p.add_argument("--out", required=True, help="summary JSON path (per-file CSV written beside it)")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_seg_eval)

    p = sub.add_parser("fit", help="fit pupil/iris circles to a mask")
    p.add_argument("--mask", required=True)
    p.add_argument("--out", required=True, help="circles JSON path")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("normalize", help="rubber-sheet unwrap to the polar rectangle")
    p.add_argument("--image", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--circles", required=True)
    p.add_argument("--out-prefix", required=True, help="writes <prefix>_tex.png and <prefix>_valid.png")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_normalize)

    p = sub.add_parser("encode", help="image + mask -> iris code (fits circles if not given)")
    p.add_argument("--image", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--circles", help="circles JSON; fitted from the mask when omitted")
    p.add_argument("--bank", help="filter-bank JSON; built-in default bank when omitted")
    p.add_argument("--out", required=True, help="output code file")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("match", help="score code pairs from a manifest CSV")
    p.add_argument("--manifest", required=True, help="CSV: code_path_a,code_path_b,label")
    p.add_argument("--out", required=True, help="scores CSV path")
    p.add_argument("--max-shift", type=int, default=None)
    p.add_argument("--min-bits", type=int, default=None)
    p.add_argument("--config")
    p.set_defaults(func=_cmd_match)

    p = sub.add_parser("roc", help="ROC/EER and class statistics from a scores CSV")
    p.add_argument("--scores", required=True)
    p.add_argument("--out-prefix", required=True,
                   help="writes <prefix>_roc.csv, <prefix>_summary.json, <prefix>_boxplot.csv")
    p.set_defaults(func=_cmd_roc)

    p = sub.add_parser("augment", help="write the five augmented variants of each PNG")
    p.add_argument("--in", dest="in_dir", required=True, metavar="DIR")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("pipeline", help="dataset -> codes -> all-pairs scores -> ROC/EER report")
    p.add_argument("--dataset", required=True, help="directory with images/ and masks/ (+ optional truth.jsonl)")
    p.add_argument("--out", required=True)
    p.add_argument("--bank", help="filter-bank JSON; built-in default when omitted")
    p.add_argument("--max-shift", type=int, default=None)
    p.add_argument("--min-bits", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--config")
    p.set_defaults(func=_cmd_pipeline)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        _emit("data", str(exc))
        return 3
    except DataError as exc:
        _emit("data", f"{type(exc).__name__}: {exc}")
        return 3
    except ValueError as exc:
        _emit("usage", str(exc))
        return 2
    except OSError as exc:
        _emit("data", str(exc))
        return 3
    except Exception as exc:  # pragma: no cover - safety net
        _emit("internal", f"{type(exc).__name__}: {exc}")
        return 4


if __name__ == "__main__":
    sys.exit(main())
