"""Segmentation quality metrics: IoU and fractional Hamming distance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .imgcore import BinaryMask, require_same_shape

__all__ = ["SegScore", "MetricSummary", "iou", "mask_hd", "seg_score", "summarize"]


@dataclass(frozen=True)
class SegScore:
    """Per-pair segmentation agreement."""

    iou: float
    hd: float


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    std: float  # population standard deviation
    n: int


def iou(pred: BinaryMask, gt: BinaryMask) -> float:
    """Intersection over union of two masks.

    Defined as 1.0 when both masks are empty (union is empty).
    """
    require_same_shape(pred, gt, "masks")
    inter = np.count_nonzero(pred.bits & gt.bits)
    union = np.count_nonzero(pred.bits | gt.bits)
    if union == 0:
        return 1.0
    return inter / union


def mask_hd(pred: BinaryMask, gt: BinaryMask) -> float:
    """Fraction of pixels where the two masks disagree."""
    require_same_shape(pred, gt, "masks")
    return np.count_nonzero(pred.bits ^ gt.bits) / pred.bits.size


def seg_score(pred: BinaryMask, gt: BinaryMask) -> SegScore:
    return SegScore(iou=iou(pred, gt), hd=mask_hd(pred, gt))


def summarize(values: Iterable[float]) -> MetricSummary:
    """Mean and population standard deviation of a non-empty collection."""
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot summarize an empty collection")
    return MetricSummary(mean=float(arr.mean()), std=float(arr.std()), n=int(arr.size))
