"""Gabor-phase encoding of a normalized iris into a binary code.

A filter bank of complex Gabor kernels (modulation along the angular
axis) is correlated with the normalized texture on a regular grid of
application points.  Each point yields two bits: sign of the real and
imaginary responses.  A bit is valid only when enough of the kernel's
support lies on valid texture.

Boundary handling treats the normalized domain as a cylinder: the
angular axis wraps, the radial axis clamps to its edge rows.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import CorruptCodeError
from .normalize import NormalizedIris

__all__ = [
    "GaborKernel",
    "FilterBank",
    "IrisCode",
    "make_gabor_kernel",
    "default_bank",
    "encode",
    "save_bank",
    "load_bank",
    "save_code",
    "load_code",
]

_MEAN_TOL = 1e-9
_NORM_TOL = 1e-9
# responses this close to zero are treated as exact zeros before the
# sign is taken, so all-zero cases (e.g. constant texture) are stable
RESPONSE_EPS = 1e-6

_MAGIC = b"IRCD"
_VERSION = 1


@dataclass(frozen=True, eq=False)
class GaborKernel:
    """One complex kernel; both parts zero-mean and unit L2 norm."""

    real: np.ndarray
    imag: np.ndarray

    def __post_init__(self):
        re = np.ascontiguousarray(self.real, dtype=np.float64)
        im = np.ascontiguousarray(self.imag, dtype=np.float64)
        if re.ndim != 2 or re.shape != im.shape:
            raise ValueError("kernel parts must be 2-D and of equal shape")
        h, w = re.shape
        if h % 2 == 0 or w % 2 == 0:
            raise ValueError(f"kernel dimensions must be odd, got {h}x{w}")
        for name, part in (("real", re), ("imag", im)):
            if abs(part.sum()) > _MEAN_TOL:
                raise ValueError(f"{name} part is not zero-mean (|sum|={abs(part.sum()):.2e})")
            if abs(np.linalg.norm(part) - 1.0) > _NORM_TOL:
                raise ValueError(f"{name} part is not unit-norm")
        re.setflags(write=False)
        im.setflags(write=False)
        object.__setattr__(self, "real", re)
        object.__setattr__(self, "imag", im)

    @property
    def height(self) -> int:
        return self.real.shape[0]

    @property
    def width(self) -> int:
        return self.real.shape[1]


def _normalize_part(part: np.ndarray) -> np.ndarray:
    part = part - part.mean()
    n = np.linalg.norm(part)
    if n == 0:
        raise ValueError("kernel part vanished after DC removal")
    part = part / n
    # one refinement pass keeps the float residue of the mean within tolerance
    part = part - part.mean()
    return part / np.linalg.norm(part)


def make_gabor_kernel(
    wavelength: float,
    sigma_radial: float,
    sigma_angular: float,
    rows: int,
    cols: int,
) -> GaborKernel:
    """Gaussian-windowed complex sinusoid modulated along the angular axis."""
    if wavelength <= 0 or sigma_radial <= 0 or sigma_angular <= 0:
        raise ValueError("wavelength and sigmas must be positive")
    y = np.arange(rows, dtype=np.float64) - rows // 2
    x = np.arange(cols, dtype=np.float64) - cols // 2
    env = np.exp(-(y**2) / (2 * sigma_radial**2))[:, None] * np.exp(
        -(x**2) / (2 * sigma_angular**2)
    )[None, :]
    arg = 2 * np.pi * x / wavelength
    return GaborKernel(
        real=_normalize_part(env * np.cos(arg)[None, :]),
        imag=_normalize_part(env * np.sin(arg)[None, :]),
    )


@dataclass(frozen=True)
class FilterBank:
    """Kernels plus their application grid and validity threshold.

    steps[k] = (rows_step, cols_step) for kernels[k].  All kernels must
    share one cols_step so their bit planes live on a single circular
    angular grid (this is what makes code columns commensurate with
    normalized-texture rotations).
    """

    kernels: Tuple[GaborKernel, ...]
    steps: Tuple[Tuple[int, int], ...]
    support_valid_fraction: float = 0.75

    def __post_init__(self):
        kernels = tuple(self.kernels)
        steps = tuple((int(r), int(c)) for r, c in self.steps)
        if len(kernels) < 1:
            raise ValueError("bank needs at least one kernel")
        if len(steps) != len(kernels):
            raise ValueError("need one (rows_step, cols_step) per kernel")
        if any(r < 1 or c < 1 for r, c in steps):
            raise ValueError("grid steps must be >= 1")
        if len({c for _, c in steps}) != 1:
            raise ValueError("all kernels must share the same cols_step")
        if not (0 <= self.support_valid_fraction <= 1):
            raise ValueError("support_valid_fraction must be in [0, 1]")
        object.__setattr__(self, "kernels", kernels)
        object.__setattr__(self, "steps", steps)

    @property
    def cols_step(self) -> int:
        return self.steps[0][1]


def default_bank() -> FilterBank:
    """Three complex Gabor kernels at wavelengths ~one octave apart.

    Sizes 9x15, 9x27, 9x51 taps (radial x angular); each kernel's
    wavelength equals its window width, the angular sigma is a quarter
    window, and the radial sigma is 2 rows.  Applied every 4 radial
    rows x 4 angular columns with support_valid_fraction 0.75.
    """
    sizes = (15, 27, 51)
    kernels = tuple(
        make_gabor_kernel(
            wavelength=float(w),
            sigma_radial=2.0,
            sigma_angular=w / 4.0,
            rows=9,
            cols=w,
        )
        for w in sizes
    )
    return FilterBank(kernels=kernels, steps=((4, 4),) * 3, support_valid_fraction=0.75)


@dataclass(frozen=True, eq=False)
class IrisCode:
    """Stacked sign-bit planes (kernel-major, real then imaginary rows)."""

    bits: np.ndarray
    valid: np.ndarray
    n_angular_positions: int

    def __post_init__(self):
        bits = np.ascontiguousarray(self.bits)
        valid = np.ascontiguousarray(self.valid)
        if bits.dtype != np.bool_:
            bits = bits.astype(bool)
        if valid.dtype != np.bool_:
            valid = valid.astype(bool)
        if bits.ndim != 2 or bits.shape != valid.shape:
            raise ValueError("bits and valid must be 2-D and of equal shape")
        if self.n_angular_positions != bits.shape[1]:
            raise ValueError(
                f"n_angular_positions {self.n_angular_positions} != columns {bits.shape[1]}"
            )
        bits.setflags(write=False)
        valid.setflags(write=False)
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "valid", valid)

    @property
    def total_bits(self) -> int:
        return self.bits.size

    def __eq__(self, other):
        if not isinstance(other, IrisCode):
            return NotImplemented
        return np.array_equal(self.bits, other.bits) and np.array_equal(self.valid, other.valid)

    __hash__ = None


def _responses(padded: np.ndarray, kernel2d: np.ndarray, rows: np.ndarray, cols: np.ndarray):
    windows = sliding_window_view(padded, kernel2d.shape)
    sub = windows[rows][:, cols]
    return np.einsum("rcij,ij->rc", sub, kernel2d)


def encode(n: NormalizedIris, bank: FilterBank) -> IrisCode:
    """Quantize complex Gabor responses into a masked binary code.

    Application points for a kernel with steps (sr, sc) are rows
    0, sr, 2*sr, ... and columns 0, sc, ..., n_angular - sc; n_angular
    must be divisible by cols_step so the angular grid closes.
    """
    nr, na = n.n_radial, n.n_angular
    sc = bank.cols_step
    if na % sc != 0:
        raise ValueError(f"n_angular {na} not divisible by cols_step {sc}")
    for k in bank.kernels:
        if k.height > nr:
            raise ValueError(f"kernel height {k.height} exceeds {nr} radial rows")
        if k.width > na:
            raise ValueError(f"kernel width {k.width} exceeds {na} angular columns")

    cols = np.arange(0, na, sc)
    valid_f = n.valid.astype(np.float64)
    bit_planes: List[np.ndarray] = []
    valid_planes: List[np.ndarray] = []
    for kernel, (sr, _) in zip(bank.kernels, bank.steps):
        ph, pw = kernel.height // 2, kernel.width // 2
        rows = np.arange(0, nr, sr)
        tex = np.pad(n.texture, ((ph, ph), (0, 0)), mode="edge")
        tex = np.pad(tex, ((0, 0), (pw, pw)), mode="wrap")
        vfrac = np.pad(valid_f, ((ph, ph), (0, 0)), mode="edge")
        vfrac = np.pad(vfrac, ((0, 0), (pw, pw)), mode="wrap")

        support = np.ones((kernel.height, kernel.width))
        frac = _responses(vfrac, support, rows, cols) / support.size
        ok = frac >= bank.support_valid_fraction

        for part in (kernel.real, kernel.imag):
            resp = _responses(tex, part, rows, cols)
            resp[np.abs(resp) < RESPONSE_EPS] = 0.0
            bit_planes.append(resp >= 0)
            valid_planes.append(ok)

    return IrisCode(
        bits=np.vstack(bit_planes),
        valid=np.vstack(valid_planes),
        n_angular_positions=len(cols),
    )


# ---------------------------------------------------------------------------
# serialization

def save_bank(bank: FilterBank, path: str) -> None:
    """Write the bank as JSON with explicit coefficient matrices."""
    payload = {
        "support_valid_fraction": bank.support_valid_fraction,
        "kernels": [
            {
                "type": "explicit",
                "rows_step": sr,
                "cols_step": sc,
                "real": k.real.tolist(),
                "imag": k.imag.tolist(),
            }
            for k, (sr, sc) in zip(bank.kernels, bank.steps)
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_bank(path: str) -> FilterBank:
    """Read a bank from JSON.

    Kernels are either {"type": "gabor", wavelength, sigma_radial,
    sigma_angular, rows, cols} or {"type": "explicit", real, imag};
    explicit coefficients are DC-removed and renormalized on load so
    the kernel invariants always hold.  Both forms carry rows_step and
    cols_step.
    """
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    try:
        kernels: List[GaborKernel] = []
        steps: List[Tuple[int, int]] = []
        for item in obj["kernels"]:
            steps.append((int(item["rows_step"]), int(item["cols_step"])))
            if item["type"] == "gabor":
                kernels.append(
                    make_gabor_kernel(
                        wavelength=float(item["wavelength"]),
                        sigma_radial=float(item["sigma_radial"]),
                        sigma_angular=float(item["sigma_angular"]),
                        rows=int(item["rows"]),
                        cols=int(item["cols"]),
                    )
                )
            elif item["type"] == "explicit":
                kernels.append(
                    GaborKernel(
                        real=_normalize_part(np.asarray(item["real"], dtype=np.float64)),
                        imag=_normalize_part(np.asarray(item["imag"], dtype=np.float64)),
                    )
                )
            else:
                raise ValueError(f"unknown kernel type {item['type']!r}")
        fraction = float(obj["support_valid_fraction"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed bank JSON: {exc}") from exc
    return FilterBank(kernels=tuple(kernels), steps=tuple(steps), support_valid_fraction=fraction)


def save_code(code: IrisCode, path: str) -> None:
    """Binary container: magic, version, shape, then packed bit planes.

    Layout (little-endian): b"IRCD", version u8, rows u32, cols u32,
    n_angular_positions u32, then bits and valid planes each packed
    row-major 8-bits-per-byte LSB-first.
    """
    rows, cols = code.bits.shape
    header = _MAGIC + struct.pack("<BIII", _VERSION, rows, cols, code.n_angular_positions)
    payload = (
        np.packbits(code.bits.ravel(), bitorder="little").tobytes()
        + np.packbits(code.valid.ravel(), bitorder="little").tobytes()
    )
    with open(path, "wb") as fh:
        fh.write(header + payload)


def load_code(path: str) -> IrisCode:
    with open(path, "rb") as fh:
        blob = fh.read()
    head_len = len(_MAGIC) + struct.calcsize("<BIII")
    if len(blob) < head_len or blob[:4] != _MAGIC:
        raise CorruptCodeError(f"{path}: not an iris-code file")
    version, rows, cols, n_ang = struct.unpack("<BIII", blob[4:head_len])
    if version != _VERSION:
        raise CorruptCodeError(f"{path}: unsupported version {version}")
    nbits = rows * cols
    plane_bytes = (nbits + 7) // 8
    if len(blob) != head_len + 2 * plane_bytes:
        raise CorruptCodeError(f"{path}: truncated payload")
    def unpack(start: int) -> np.ndarray:
        raw = np.frombuffer(blob, dtype=np.uint8, count=plane_bytes, offset=start)
        flat = np.unpackbits(raw, count=nbits, bitorder="little").astype(bool)
        return flat.reshape(rows, cols)
    try:
        return IrisCode(
            bits=unpack(head_len),
            valid=unpack(head_len + plane_bytes),
            n_angular_positions=n_ang,
        )
    except ValueError as exc:
        raise CorruptCodeError(f"{path}: {exc}") from exc
