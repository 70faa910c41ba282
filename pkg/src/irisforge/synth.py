"""Synthetic eye-image generator with exact ground truth.

Produces gray eye images (dark pupil, textured iris annulus, bright
sclera, optional eyelid occluder and Gaussian noise) together with the
exact segmentation mask and circle parameters, for closed-loop testing
of the fitting/normalization/matching pipeline.

The iris texture is a band-limited field in polar coordinates about the
iris center: a sum of 16 random-phase sinusoids with integer angular
frequencies (so a source rotation is exactly an angular shift of the
field) and low radial frequencies.  Angles follow the package
convention: theta=0 along +x, counterclockwise with y up; a positive
`rotation` turns the eye counterclockwise.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np

from .circlefit import Circle, IrisBoundaries, boundaries_to_json
from .imgcore import BinaryMask, GrayImage, save_gray_image, save_mask

__all__ = [
    "SynthEyeSpec",
    "DatasetRecord",
    "generate",
    "sample_dataset",
    "write_dataset",
    "spec_to_dict",
    "spec_from_dict",
]

# intensity bands: pupil well under the <=30 contract, sclera above >=200
_PUPIL_LEVEL = 20.0
_SCLERA_LEVEL = 230.0
_EYELID_LEVEL = 180.0
_IRIS_MID = 100.0
_IRIS_AMPLITUDE = 45.0

_N_COMPONENTS = 16
_ANGULAR_FREQS = (3, 21)  # integer angular frequency m drawn from [3, 20]
_RADIAL_FREQS = (0, 4)  # radial cycle count q drawn from {0,1,2,3}


@dataclass(frozen=True)
class SynthEyeSpec:
    identity_seed: int
    nuisance_seed: int
    width: int
    height: int
    pupil: Circle
    iris: Circle
    occlusion_fraction: float = 0.0
    noise_sigma: float = 0.0
    rotation: float = 0.0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("frame must be at least 1x1")
        if not (0 <= self.occlusion_fraction < 1):
            raise ValueError(f"occlusion_fraction must be in [0, 1), got {self.occlusion_fraction}")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        # also enforces pupil-inside-iris
        IrisBoundaries(pupil=self.pupil, iris=self.iris)

    @property
    def boundaries(self) -> IrisBoundaries:
        return IrisBoundaries(pupil=self.pupil, iris=self.iris)


def _texture_components(identity_seed: int):
    rng = np.random.default_rng(identity_seed)
    m = rng.integers(*_ANGULAR_FREQS, size=_N_COMPONENTS)
    q = rng.integers(*_RADIAL_FREQS, size=_N_COMPONENTS)
    phase = rng.uniform(0.0, 2 * math.pi, size=_N_COMPONENTS)
    amp = rng.uniform(0.5, 1.0, size=_N_COMPONENTS)
    return m, q, phase, amp


def generate(spec: SynthEyeSpec) -> Tuple[GrayImage, BinaryMask, IrisBoundaries]:
    """Render the eye described by `spec`.

    Returns (image, mask, boundaries) where mask is exactly the iris
    annulus minus the eyelid occluder, independent of noise and
    rotation.
    """
    iris, pupil = spec.iris, spec.pupil
    w, h = spec.width, spec.height
    if (
        iris.cx - iris.r < 0
        or iris.cx + iris.r > w - 1
        or iris.cy - iris.r < 0
        or iris.cy + iris.r > h - 1
    ):
        raise ValueError("iris circle does not fit inside the frame")

    xs = np.arange(w, dtype=np.float64)[None, :]
    ys = np.arange(h, dtype=np.float64)[:, None]
    dxi = xs - iris.cx
    dyi = iris.cy - ys  # y-up angle convention
    d_iris = np.hypot(dxi, dyi)
    d_pupil = np.hypot(xs - pupil.cx, pupil.cy - ys)

    inside_pupil = d_pupil <= pupil.r
    annulus = (d_iris <= iris.r) & ~inside_pupil
    # occluder: everything above the cut line, measured down from the iris top
    y_cut = (iris.cy - iris.r) + 2.0 * iris.r * spec.occlusion_fraction
    occluded = np.broadcast_to(ys < y_cut, (h, w))

    img = np.full((h, w), _SCLERA_LEVEL, dtype=np.float64)
    ai, aj = np.nonzero(annulus)
    if ai.size:
        phi = np.arctan2(dyi[ai, 0], dxi[0, aj])
        span = max(iris.r - pupil.r, 1e-9)
        rho = np.clip((d_iris[ai, aj] - pupil.r) / span, 0.0, 1.0)
        m, q, phase, amp = _texture_components(spec.identity_seed)
        field = np.zeros(ai.size)
        for k in range(_N_COMPONENTS):
            field += amp[k] * np.sin(
                m[k] * (phi - spec.rotation) + 2 * math.pi * q[k] * rho + phase[k]
            )
        img[ai, aj] = _IRIS_MID + _IRIS_AMPLITUDE * field / amp.sum()
    img[inside_pupil] = _PUPIL_LEVEL
    img[occluded] = _EYELID_LEVEL

    if spec.noise_sigma > 0:
        noise_rng = np.random.default_rng(spec.nuisance_seed)
        img += noise_rng.normal(0.0, spec.noise_sigma, size=img.shape)

    image = GrayImage(np.clip(np.rint(img), 0, 255).astype(np.uint8))
    mask = BinaryMask(annulus & ~occluded)
    return image, mask, spec.boundaries


@dataclass(frozen=True)
class DatasetRecord:
    name: str
    identity: int
    spec: SynthEyeSpec


def sample_dataset(
    n_identities: int,
    samples_per_identity: int = 4,
    *,
    width: int = 320,
    height: int = 240,
    seed: int = 0,
    noise_sigma: float = 8.0,
    max_rotation_deg: float = 5.0,
    max_occlusion: float = 0.3,
) -> List[DatasetRecord]:
    """Draw per-identity geometry and per-sample nuisance parameters.

    Each identity gets fixed circles and texture seed; each of its
    samples varies rotation, occlusion, and noise.
    """
    if n_identities < 1 or samples_per_identity < 1:
        raise ValueError("need at least one identity and one sample each")
    rng = np.random.default_rng(seed)
    records: List[DatasetRecord] = []
    for ident in range(n_identities):
        r_i = rng.uniform(0.25, 0.34) * height
        cx = rng.uniform(r_i + 6, width - 1 - r_i - 6)
        cy = rng.uniform(r_i + 6, height - 1 - r_i - 6)
        r_p = rng.uniform(0.28, 0.40) * r_i
        off = rng.uniform(0.0, 2.0)
        ang = rng.uniform(0.0, 2 * math.pi)
        pupil = Circle(cx + off * math.cos(ang), cy - off * math.sin(ang), r_p)
        iris = Circle(cx, cy, r_i)
        identity_seed = int(rng.integers(0, 2**63))
        for s in range(samples_per_identity):
            spec = SynthEyeSpec(
                identity_seed=identity_seed,
                nuisance_seed=int(rng.integers(0, 2**63)),
                width=width,
                height=height,
                pupil=pupil,
                iris=iris,
                occlusion_fraction=float(rng.uniform(0.0, max_occlusion)),
                noise_sigma=noise_sigma,
                rotation=math.radians(float(rng.uniform(-max_rotation_deg, max_rotation_deg))),
            )
            records.append(DatasetRecord(name=f"id{ident:04d}_s{s:02d}", identity=ident, spec=spec))
    return records


def spec_to_dict(spec: SynthEyeSpec) -> dict:
    return {
        "identity_seed": spec.identity_seed,
        "nuisance_seed": spec.nuisance_seed,
        "width": spec.width,
        "height": spec.height,
        "pupil": {"cx": spec.pupil.cx, "cy": spec.pupil.cy, "r": spec.pupil.r},
        "iris": {"cx": spec.iris.cx, "cy": spec.iris.cy, "r": spec.iris.r},
        "occlusion_fraction": spec.occlusion_fraction,
        "noise_sigma": spec.noise_sigma,
        "rotation": spec.rotation,
    }


def spec_from_dict(obj: dict) -> SynthEyeSpec:
    return SynthEyeSpec(
        identity_seed=int(obj["identity_seed"]),
        nuisance_seed=int(obj["nuisance_seed"]),
        width=int(obj["width"]),
        height=int(obj["height"]),
        pupil=Circle(**obj["pupil"]),
        iris=Circle(**obj["iris"]),
        occlusion_fraction=float(obj["occlusion_fraction"]),
        noise_sigma=float(obj["noise_sigma"]),
        rotation=float(obj["rotation"]),
    )


def write_dataset(records: Iterable[DatasetRecord], out_dir: str) -> None:
    """Emit images/*.png, masks/*.png, and truth.jsonl under out_dir."""
    img_dir = os.path.join(out_dir, "images")
    mask_dir = os.path.join(out_dir, "masks")
    os.makedirs(img_dir, exist_ok=True)
    os.makedirs(mask_dir, exist_ok=True)
    with open(os.path.join(out_dir, "truth.jsonl"), "w", encoding="utf-8") as fh:
        for rec in records:
            image, mask, bounds = generate(rec.spec)
            save_gray_image(image, os.path.join(img_dir, rec.name + ".png"))
            save_mask(mask, os.path.join(mask_dir, rec.name + ".png"))
            line = {
                "name": rec.name,
                "identity": rec.identity,
                "spec": spec_to_dict(rec.spec),
                "circles": json.loads(boundaries_to_json(bounds)),
            }
            fh.write(json.dumps(line) + "\n")
