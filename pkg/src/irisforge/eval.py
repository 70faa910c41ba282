"""Score-set analytics: ROC sweep, EER, and per-class statistics.

Scores are fractional Hamming distances, so lower means a better
match.  At threshold t, FMR is the fraction of impostor scores < t
(falsely accepted) and FNMR the fraction of genuine scores >= t
(falsely rejected).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .errors import ManifestError

__all__ = [
    "ScoreSet",
    "RocCurve",
    "ClassStats",
    "ScoreStats",
    "roc",
    "summarize_scores",
    "read_scores_csv",
    "write_roc_csv",
    "write_summary_json",
    "write_boxplot_csv",
]


@dataclass(frozen=True)
class ScoreSet:
    genuine: Tuple[float, ...]
    impostor: Tuple[float, ...]

    def __post_init__(self):
        gen = tuple(float(s) for s in self.genuine)
        imp = tuple(float(s) for s in self.impostor)
        for name, scores in (("genuine", gen), ("impostor", imp)):
            if any(not (0.0 <= s <= 1.0) for s in scores):
                raise ValueError(f"{name} scores must lie in [0, 1]")
        object.__setattr__(self, "genuine", gen)
        object.__setattr__(self, "impostor", imp)


@dataclass(frozen=True)
class RocCurve:
    """Sweep points ordered by increasing threshold."""

    thresholds: Tuple[float, ...]
    points: Tuple[Tuple[float, float], ...]  # (fmr, fnmr) per threshold
    eer: float


@dataclass(frozen=True)
class ClassStats:
    n: int
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    mean: float
    std: float  # population


@dataclass(frozen=True)
class ScoreStats:
    genuine: ClassStats
    impostor: ClassStats


def roc(scores: ScoreSet) -> RocCurve:
    """Threshold sweep over the sorted union of all scores.

    The sweep appends one sentinel threshold above the maximum so the
    curve reaches (FMR=1, FNMR=0).  EER is read where FMR crosses FNMR,
    linearly interpolating between the bracketing sweep points.
    """
    if not scores.genuine or not scores.impostor:
        raise ValueError("ROC needs non-empty genuine and impostor score lists")
    gen = np.sort(np.asarray(scores.genuine))
    imp = np.sort(np.asarray(scores.impostor))
    union = np.unique(np.concatenate([gen, imp]))
    sentinel = np.nextafter(union[-1], np.inf)
    thr = np.append(union, sentinel)

    fmr = np.searchsorted(imp, thr, side="left") / imp.size  # fraction < t
    fnmr = (gen.size - np.searchsorted(gen, thr, side="left")) / gen.size  # fraction >= t

    diff = fmr - fnmr  # non-decreasing in t
    k = int(np.argmax(diff >= 0))
    if diff[k] == 0 or k == 0:
        eer = float(fmr[k])
    else:
        lam = -diff[k - 1] / (diff[k] - diff[k - 1])
        eer = float(fmr[k - 1] + lam * (fmr[k] - fmr[k - 1]))

    return RocCurve(
        thresholds=tuple(float(t) for t in thr),
        points=tuple((float(a), float(b)) for a, b in zip(fmr, fnmr)),
        eer=eer,
    )


def _class_stats(values: Sequence[float]) -> ClassStats:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot summarize an empty score class")
    q1, med, q3 = np.quantile(arr, [0.25, 0.5, 0.75])  # R-7 linear interpolation
    return ClassStats(
        n=int(arr.size),
        minimum=float(arr.min()),
        q1=float(q1),
        median=float(med),
        q3=float(q3),
        maximum=float(arr.max()),
        mean=float(arr.mean()),
        std=float(arr.std()),
    )


def summarize_scores(scores: ScoreSet) -> ScoreStats:
    return ScoreStats(
        genuine=_class_stats(scores.genuine),
        impostor=_class_stats(scores.impostor),
    )


# ---------------------------------------------------------------------------
# file formats

def read_scores_csv(path: str) -> ScoreSet:
    """Load a scores CSV (columns: label, score) into a ScoreSet."""
    genuine: List[float] = []
    impostor: List[float] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"label", "score"}.issubset(reader.fieldnames):
            raise ManifestError(f"{path}: scores CSV needs 'label' and 'score' columns")
        for lineno, row in enumerate(reader, start=2):
            label = row["label"].strip()
            try:
                value = float(row["score"])
            except ValueError as exc:
                raise ManifestError(f"{path}:{lineno}: bad score {row['score']!r}") from exc
            if label == "genuine":
                genuine.append(value)
            elif label == "impostor":
                impostor.append(value)
            else:
                raise ManifestError(f"{path}:{lineno}: bad label {label!r}")
    return ScoreSet(genuine=tuple(genuine), impostor=tuple(impostor))


def write_roc_csv(curve: RocCurve, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "fmr", "fnmr"])
        for t, (a, b) in zip(curve.thresholds, curve.points):
            writer.writerow([f"{t:.9f}", f"{a:.9f}", f"{b:.9f}"])


def _stats_dict(s: ClassStats) -> dict:
    return {
        "n": s.n,
        "min": s.minimum,
        "q1": s.q1,
        "median": s.median,
        "q3": s.q3,
        "max": s.maximum,
        "mean": s.mean,
        "std": s.std,
    }


def write_summary_json(curve: RocCurve, stats: ScoreStats, path: str) -> None:
    payload = {
        "eer": curve.eer,
        "genuine": _stats_dict(stats.genuine),
        "impostor": _stats_dict(stats.impostor),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def write_boxplot_csv(stats: ScoreStats, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class", "n", "min", "q1", "median", "q3", "max", "mean", "std"])
        for name, s in (("genuine", stats.genuine), ("impostor", stats.impostor)):
            writer.writerow(
                [name, s.n, s.minimum, s.q1, s.median, s.q3, s.maximum, s.mean, s.std]
            )
