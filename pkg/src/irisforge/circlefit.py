"""Circle geometry and circular-Hough boundary fitting on binary masks.

Coordinates follow image convention: x grows rightward, y grows
downward, angles are measured counterclockwise from the +x axis in a
y-up frame, i.e. the point at angle theta on a circle is
(cx + r*cos(theta), cy - r*sin(theta)).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from numba import njit
from scipy import ndimage

from .errors import CircleFitError, MaskTooSmallError
from .imgcore import BinaryMask

__all__ = [
    "Circle",
    "IrisBoundaries",
    "HoughConfig",
    "HoughResult",
    "mask_boundary",
    "hough_circle",
    "fit_boundaries",
    "boundaries_to_json",
    "boundaries_from_json",
]

_CONTAIN_TOL = 1e-9


@dataclass(frozen=True)
class Circle:
    cx: float
    cy: float
    r: float

    def __post_init__(self):
        if not (self.r > 0) or not math.isfinite(self.r):
            raise ValueError(f"circle radius must be positive and finite, got {self.r}")
        if not (math.isfinite(self.cx) and math.isfinite(self.cy)):
            raise ValueError("circle center must be finite")

    def point_at(self, theta: float) -> Tuple[float, float]:
        return (self.cx + self.r * math.cos(theta), self.cy - self.r * math.sin(theta))


@dataclass(frozen=True)
class IrisBoundaries:
    """Pupil circle nested inside the iris circle.

    pupil_synthesized marks a pupil that was not detected but invented
    (concentric, 0.2x the iris radius) so downstream stages still run.
    """

    pupil: Circle
    iris: Circle
    pupil_synthesized: bool = False

    def __post_init__(self):
        if self.pupil.r >= self.iris.r:
            raise ValueError(
                f"pupil radius {self.pupil.r:.3f} must be smaller than iris radius {self.iris.r:.3f}"
            )
        d = math.hypot(self.pupil.cx - self.iris.cx, self.pupil.cy - self.iris.cy)
        if d + self.pupil.r > self.iris.r + _CONTAIN_TOL:
            raise ValueError(
                f"pupil (r={self.pupil.r:.3f}, offset {d:.3f}) not contained in "
                f"iris (r={self.iris.r:.3f})"
            )


@dataclass(frozen=True)
class HoughConfig:
    """Search ranges and grid resolution for the circular Hough transform.

    Center cells sit on a grid of pitch accumulator_step aligned to the
    pixel origin; radii on a grid of pitch radius_step starting at the
    range minimum.  max_boundary_points caps the number of edge points
    voted (evenly-strided subsample) to bound runtime; vote_floor is the
    minimum normalized vote count (votes / circumference) for a circle
    to count as found.
    """

    r_min_outer: float
    r_max_outer: float
    r_min_inner: float
    r_max_inner: float
    accumulator_step: float = 1.0
    radius_step: float = 1.0
    vote_floor: float = 0.2
    max_boundary_points: int = 512

    def __post_init__(self):
        for lo, hi, tag in (
            (self.r_min_outer, self.r_max_outer, "outer"),
            (self.r_min_inner, self.r_max_inner, "inner"),
        ):
            if not (0 < lo <= hi):
                raise ValueError(f"bad {tag} radius range [{lo}, {hi}]")
        if self.accumulator_step <= 0 or self.radius_step <= 0:
            raise ValueError("grid steps must be positive")
        if self.max_boundary_points < 8:
            raise ValueError("max_boundary_points too small to vote for a circle")

    @classmethod
    def for_frame(cls, width: int, height: int, **overrides) -> "HoughConfig":
        """Default search ranges scaled to the frame width."""
        cfg = cls(
            r_min_outer=width / 8.0,
            r_max_outer=width / 2.0,
            r_min_inner=width / 40.0,
            r_max_inner=width / 4.0,
        )
        return replace(cfg, **overrides) if overrides else cfg


@dataclass(frozen=True)
class HoughResult:
    circle: Circle
    votes: int
    normalized_votes: float


def mask_boundary(mask: BinaryMask) -> np.ndarray:
    """Foreground pixels with at least one 4-neighbour outside the mask.

    Pixels on the raster border count as boundary.  Returns an (N, 2)
    int64 array of (x, y), ordered row-major.
    """
    b = mask.bits
    padded = np.zeros((b.shape[0] + 2, b.shape[1] + 2), dtype=bool)
    padded[1:-1, 1:-1] = b
    interior = (
        padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    ys, xs = np.nonzero(b & ~interior)
    return np.column_stack((xs, ys)).astype(np.int64)


@njit(cache=True)
def _accumulate(px, py, cx0, cy0, step, ncx, ncy, r0, rstep, nr, acc):  # pragma: no cover
    # One vote per (point, center cell) pair: the radius bin whose circle
    # passes within half a radius step of the point.  A point votes for a
    # cell when |dist(point, center) - r_bin| <= rstep/2 for some bin.
    half = rstep / 2.0
    for i in range(px.shape[0]):
        x = px[i]
        y = py[i]
        for iy in range(ncy):
            dy = y - (cy0 + step * iy)
            dy2 = dy * dy
            for ix in range(ncx):
                dx = x - (cx0 + step * ix)
                d = math.sqrt(dx * dx + dy2)
                lo = int(math.ceil((d - half - r0) / rstep))
                hi = int(math.floor((d + half - r0) / rstep))
                if lo < 0:
                    lo = 0
                if hi > nr - 1:
                    hi = nr - 1
                for ir in range(lo, hi + 1):
                    acc[ir, iy, ix] += 1


def _grid_1d(lo: float, hi: float, step: float) -> np.ndarray:
    """Grid of pitch `step` anchored at 0, restricted to [lo, hi]."""
    i0 = math.ceil(lo / step - 1e-12)
    i1 = math.floor(hi / step + 1e-12)
    if i1 < i0:
        i0 = i1 = round((lo + hi) / 2 / step)
    return step * np.arange(i0, i1 + 1, dtype=np.float64)


def hough_circle(
    points: np.ndarray,
    r_range: Tuple[float, float],
    frame: Tuple[int, int],
    accumulator_step: float = 1.0,
    radius_step: float = 1.0,
    center_constraint: Optional[Tuple[float, float, float]] = None,
    containment: Optional[Tuple[float, float, float]] = None,
) -> HoughResult:
    """Strongest circle through a point set by accumulator voting.

    points: (N, 2) array of (x, y).  frame: (width, height) bounding the
    center search.  center_constraint=(cx, cy, max_dist) restricts
    candidate centers to a disk; containment=(cx, cy, limit) admits only
    candidate circles lying entirely within `limit` of that point
    (dist(center) + r <= limit).  The winning cell is the global vote
    maximum, ties broken by smallest (r, cy, cx); its center/radius are
    refined by a vote-weighted centroid over the 3x3x3 neighbourhood.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"points must be (N, 2), got {pts.shape}")
    if pts.shape[0] == 0:
        raise ValueError("empty point set")
    r_min, r_max = float(r_range[0]), float(r_range[1])
    if not (0 < r_min <= r_max):
        raise ValueError(f"bad radius range [{r_min}, {r_max}]")
    if accumulator_step <= 0 or radius_step <= 0:
        raise ValueError("grid steps must be positive")
    width, height = frame

    x_lo, x_hi, y_lo, y_hi = 0.0, width - 1.0, 0.0, height - 1.0
    if center_constraint is not None:
        ccx, ccy, cmax = center_constraint
        x_lo, x_hi = max(x_lo, ccx - cmax), min(x_hi, ccx + cmax)
        y_lo, y_hi = max(y_lo, ccy - cmax), min(y_hi, ccy + cmax)
    cxs = _grid_1d(x_lo, x_hi, accumulator_step)
    cys = _grid_1d(y_lo, y_hi, accumulator_step)
    nr = int(math.floor((r_max - r_min) / radius_step + 1e-12)) + 1
    rs = r_min + radius_step * np.arange(nr)

    acc = np.zeros((nr, len(cys), len(cxs)), dtype=np.int64)
    _accumulate(
        np.ascontiguousarray(pts[:, 0]),
        np.ascontiguousarray(pts[:, 1]),
        cxs[0],
        cys[0],
        float(accumulator_step),
        len(cxs),
        len(cys),
        float(r_min),
        float(radius_step),
        nr,
        acc,
    )
    if center_constraint is not None:
        ccx, ccy, cmax = center_constraint
        gx, gy = np.meshgrid(cxs, cys)
        outside = (gx - ccx) ** 2 + (gy - ccy) ** 2 > cmax * cmax
        acc[:, outside] = 0
    if containment is not None:
        ocx, ocy, limit = containment
        gx, gy = np.meshgrid(cxs, cys)
        dist = np.hypot(gx - ocx, gy - ocy)
        sticks_out = rs[:, None, None] + dist[None, :, :] > limit + 1e-9
        acc[sticks_out] = 0

    best = int(acc.argmax())  # C-order flat index == smallest (r, cy, cx) tie-break
    votes = int(acc.flat[best])
    if votes <= 0:
        raise CircleFitError("no circle received any votes in the search region")
    ir, iy, ix = np.unravel_index(best, acc.shape)

    # vote-weighted centroid over the 3x3x3 cell neighbourhood (clipped at edges)
    sl_r = slice(max(ir - 1, 0), min(ir + 2, acc.shape[0]))
    sl_y = slice(max(iy - 1, 0), min(iy + 2, acc.shape[1]))
    sl_x = slice(max(ix - 1, 0), min(ix + 2, acc.shape[2]))
    w = acc[sl_r, sl_y, sl_x].astype(np.float64)
    wsum = w.sum()
    rr, yy, xx = np.meshgrid(rs[sl_r], cys[sl_y], cxs[sl_x], indexing="ij")
    r_ref = float((w * rr).sum() / wsum)
    cy_ref = float((w * yy).sum() / wsum)
    cx_ref = float((w * xx).sum() / wsum)

    return HoughResult(
        circle=Circle(cx_ref, cy_ref, r_ref),
        votes=votes,
        normalized_votes=votes / (2 * math.pi * r_ref),
    )


def _subsample_points(points: np.ndarray, cap: int) -> np.ndarray:
    n = points.shape[0]
    if n <= cap:
        return points
    idx = (np.arange(cap) * n) // cap  # even stride, deterministic
    return points[idx]


def fit_boundaries(mask: BinaryMask, config: Optional[HoughConfig] = None) -> IrisBoundaries:
    """Fit iris (outer) and pupil (inner) circles to a segmentation mask.

    The outer circle is the Hough winner over the mask's boundary
    points; it must reach the vote floor or CircleFitError is raised.
    The pupil search is restricted to centers within 0.5*r_iris of the
    iris center.  If no pupil cell reaches the vote floor (mask without
    a hole), a concentric pupil at 0.2*r_iris is synthesized and
    flagged.  A detected pupil is clamped to lie inside the iris.
    """
    cfg = config if config is not None else HoughConfig.for_frame(mask.width, mask.height)

    labels, nlab = ndimage.label(mask.bits)
    if nlab == 0:
        raise MaskTooSmallError("mask is empty")
    sizes = np.bincount(labels.ravel())[1:]
    if sizes.max() < 100:
        raise MaskTooSmallError(
            f"largest connected region has {int(sizes.max())} pixels (< 100)"
        )

    points = _subsample_points(mask_boundary(mask), cfg.max_boundary_points)
    frame = (mask.width, mask.height)

    outer = hough_circle(
        points,
        (cfg.r_min_outer, cfg.r_max_outer),
        frame,
        cfg.accumulator_step,
        cfg.radius_step,
    )
    if outer.normalized_votes < cfg.vote_floor:
        raise CircleFitError(
            f"outer circle normalized votes {outer.normalized_votes:.3f} "
            f"below floor {cfg.vote_floor}"
        )
    iris = outer.circle

    # the inner search admits only circles that a pupil could be: centers
    # near the iris center and wholly inside the iris with a 2-bin margin,
    # which keeps the limbus itself from winning the pupil vote
    pupil: Optional[Circle] = None
    try:
        inner = hough_circle(
            points,
            (cfg.r_min_inner, cfg.r_max_inner),
            frame,
            cfg.accumulator_step,
            cfg.radius_step,
            center_constraint=(iris.cx, iris.cy, 0.5 * iris.r),
            containment=(iris.cx, iris.cy, iris.r - 2.0 * cfg.radius_step),
        )
    except CircleFitError:
        inner = None
    if inner is not None and inner.normalized_votes >= cfg.vote_floor:
        cand = inner.circle
        d = math.hypot(cand.cx - iris.cx, cand.cy - iris.cy)
        r_fit = min(cand.r, iris.r - d)  # clamp so the pupil stays inside the iris
        if 1.0 <= r_fit < iris.r:
            pupil = Circle(cand.cx, cand.cy, r_fit)

    if pupil is None:
        return IrisBoundaries(
            pupil=Circle(iris.cx, iris.cy, 0.2 * iris.r),
            iris=iris,
            pupil_synthesized=True,
        )
    return IrisBoundaries(pupil=pupil, iris=iris, pupil_synthesized=False)


def boundaries_to_json(b: IrisBoundaries) -> str:
    payload = {
        "pupil": {"cx": b.pupil.cx, "cy": b.pupil.cy, "r": b.pupil.r},
        "iris": {"cx": b.iris.cx, "cy": b.iris.cy, "r": b.iris.r},
        "pupil_synthesized": b.pupil_synthesized,
    }
    return json.dumps(payload, indent=2)


def boundaries_from_json(text: str) -> IrisBoundaries:
    obj = json.loads(text)
    try:
        pupil = Circle(**obj["pupil"])
        iris = Circle(**obj["iris"])
        flag = bool(obj.get("pupil_synthesized", False))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed boundaries JSON: {exc}") from exc
    return IrisBoundaries(pupil=pupil, iris=iris, pupil_synthesized=flag)
