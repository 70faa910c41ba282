"""Masked fractional Hamming distance between iris codes.

Scores count disagreeing bits over the intersection of the two
validity masks.  match() compensates eye rotation by trying every
circular column shift in a window and keeping the best (lowest) score;
column shifts of the code correspond to angular steps of the
normalized raster (cols_step source columns per code column).
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .encode import IrisCode, load_code
from .errors import InsufficientOverlapError, ManifestError, ShapeMismatchError

__all__ = [
    "MatchResult",
    "hd_at_shift",
    "match",
    "run_manifest",
    "read_manifest",
    "write_scores_csv",
]

DEFAULT_MAX_SHIFT = 16
DEFAULT_MIN_BITS = 128


@dataclass(frozen=True)
class MatchResult:
    score: float
    best_shift: int
    bits_compared: int


def _require_same_shape(a: IrisCode, b: IrisCode) -> None:
    if a.bits.shape != b.bits.shape:
        raise ShapeMismatchError(f"codes differ in shape: {a.bits.shape} vs {b.bits.shape}")


def hd_at_shift(a: IrisCode, b: IrisCode, shift: int) -> Tuple[float, int]:
    """Fractional HD with b circularly shifted by `shift` columns."""
    _require_same_shape(a, b)
    b_bits = np.roll(b.bits, shift, axis=1)
    b_valid = np.roll(b.valid, shift, axis=1)
    common = a.valid & b_valid
    count = int(np.count_nonzero(common))
    if count == 0:
        raise InsufficientOverlapError("no jointly valid bits at this shift")
    disagree = int(np.count_nonzero((a.bits ^ b_bits) & common))
    return disagree / count, count


def _shift_order(max_shift: int) -> List[int]:
    # 0, -1, +1, -2, +2, ...: scanning in tie-break priority order lets a
    # strict < comparison implement "smaller |shift|, negative first"
    order = [0]
    for s in range(1, max_shift + 1):
        order.extend((-s, s))
    return order


def match(
    a: IrisCode,
    b: IrisCode,
    max_shift: int = DEFAULT_MAX_SHIFT,
    min_bits: int = DEFAULT_MIN_BITS,
) -> MatchResult:
    """Best masked HD over all shifts in [-max_shift, +max_shift].

    Only shifts with at least min_bits jointly valid bits compete.
    Ties break toward smaller |shift|, then negative before positive.
    """
    _require_same_shape(a, b)
    if max_shift < 0:
        raise ValueError("max_shift must be >= 0")
    if min_bits < 1:
        raise ValueError("min_bits must be >= 1")
    cols = a.bits.shape[1]

    # pack rows into bytes once; all shifts become column re-indexing
    pa = np.packbits(a.bits, axis=0, bitorder="little")
    pav = np.packbits(a.valid, axis=0, bitorder="little")
    pb = np.packbits(b.bits, axis=0, bitorder="little")
    pbv = np.packbits(b.valid, axis=0, bitorder="little")

    shifts = np.array(_shift_order(max_shift))
    idx = (np.arange(cols)[None, :] - shifts[:, None]) % cols  # (S, C): shifted b columns
    b_sh = pb[:, idx]  # (RB, S, C)
    bv_sh = pbv[:, idx]
    common = pav[:, None, :] & bv_sh
    counts = np.bitwise_count(common).sum(axis=(0, 2))
    disagree = np.bitwise_count((pa[:, None, :] ^ b_sh) & common).sum(axis=(0, 2))

    best: MatchResult | None = None
    for s, cnt, bad in zip(shifts.tolist(), counts.tolist(), disagree.tolist()):
        if cnt < min_bits:
            continue
        score = bad / cnt
        if best is None or score < best.score:
            best = MatchResult(score=score, best_shift=s, bits_compared=cnt)
    if best is None:
        raise InsufficientOverlapError(
            f"no shift within +/-{max_shift} has >= {min_bits} jointly valid bits"
        )
    return best


# ---------------------------------------------------------------------------
# batch manifest

_LABELS = ("genuine", "impostor")


def read_manifest(path: str) -> List[Tuple[str, str, str]]:
    """Rows of (code_path_a, code_path_b, label); paths relative to the CSV."""
    base = os.path.dirname(os.path.abspath(path))
    rows: List[Tuple[str, str, str]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        needed = {"code_path_a", "code_path_b", "label"}
        if reader.fieldnames is None or not needed.issubset(reader.fieldnames):
            raise ManifestError(f"{path}: manifest needs columns {sorted(needed)}")
        for lineno, row in enumerate(reader, start=2):
            label = row["label"].strip()
            if label not in _LABELS:
                raise ManifestError(f"{path}:{lineno}: bad label {label!r}")
            pa, pb = row["code_path_a"].strip(), row["code_path_b"].strip()
            if not os.path.isabs(pa):
                pa = os.path.join(base, pa)
            if not os.path.isabs(pb):
                pb = os.path.join(base, pb)
            rows.append((pa, pb, label))
    return rows


def write_scores_csv(rows: Sequence[Tuple[str, str, float, int, int]], path: str) -> None:
    """Rows of (pair_id, label, score, best_shift, bits_compared)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pair_id", "label", "score", "best_shift", "bits_compared"])
        for pair_id, label, score, shift, bits in rows:
            writer.writerow([pair_id, label, f"{score:.9f}", shift, bits])


def run_manifest(
    manifest_path: str,
    out_path: str,
    max_shift: int = DEFAULT_MAX_SHIFT,
    min_bits: int = DEFAULT_MIN_BITS,
) -> int:
    """Score every manifest pair and write the scores CSV; returns row count."""
    entries = read_manifest(manifest_path)
    cache: dict = {}

    def load(p: str) -> IrisCode:
        if p not in cache:
            cache[p] = load_code(p)
        return cache[p]

    out_rows = []
    for path_a, path_b, label in entries:
        result = match(load(path_a), load(path_b), max_shift=max_shift, min_bits=min_bits)
        pair_id = f"{_stem(path_a)}:{_stem(path_b)}"
        out_rows.append((pair_id, label, result.score, result.best_shift, result.bits_compared))
    write_scores_csv(out_rows, out_path)
    return len(out_rows)


def _stem(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]
