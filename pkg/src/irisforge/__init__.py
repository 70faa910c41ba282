"""Iris recognition toolkit built around irregular segmentation masks.

Pipeline: binary mask -> circle fitting (circular Hough transform) ->
rubber-sheet normalization -> Gabor-phase iris code -> masked
fractional Hamming matching -> ROC/EER evaluation; plus a synthetic
eye generator with exact ground truth and the five-fold training
augmentation.
"""

from .augment import (
    AUGMENT_SUFFIXES,
    BLUR_RADII,
    augment_five_fold,
    edge_enhance,
    gaussian_blur,
)
from .circlefit import (
    Circle,
    HoughConfig,
    HoughResult,
    IrisBoundaries,
    fit_boundaries,
    hough_circle,
    mask_boundary,
)
from .encode import (
    FilterBank,
    GaborKernel,
    IrisCode,
    default_bank,
    encode,
    load_bank,
    load_code,
    make_gabor_kernel,
    save_bank,
    save_code,
)
from .errors import (
    CircleFitError,
    CorruptCodeError,
    CorruptImageError,
    DataError,
    InsufficientOverlapError,
    IrisForgeError,
    ManifestError,
    MaskTooSmallError,
    ShapeMismatchError,
    UnsupportedImageError,
)
from .eval import RocCurve, ScoreSet, ScoreStats, roc, summarize_scores
from .imgcore import (
    BinaryMask,
    GrayImage,
    load_gray_image,
    load_mask,
    resize_mask_nn,
    save_gray_image,
    save_mask,
)
from .match import MatchResult, hd_at_shift, match, run_manifest
from .metrics import MetricSummary, SegScore, iou, mask_hd, seg_score, summarize
from .normalize import NormalizedIris, rotate_normalized, rubber_sheet, save_normalized
from .synth import DatasetRecord, SynthEyeSpec, generate, sample_dataset, write_dataset

__version__ = "0.1.0"
