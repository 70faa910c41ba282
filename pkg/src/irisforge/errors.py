"""Exception hierarchy shared across the package.

Anything raised on bad *input data* (unreadable files, malformed masks,
degenerate geometry) derives from DataError so callers can distinguish
"your data is wrong" from programming errors.  Bad *parameters* raise
plain ValueError; missing files raise the builtin FileNotFoundError.
"""


class IrisForgeError(Exception):
    """Base class for all library-specific errors."""


class DataError(IrisForgeError):
    """Input data is unreadable, malformed, or geometrically degenerate."""


class UnsupportedImageError(DataError):
    """Image file exists but is not an 8-bit grayscale/RGB PNG."""


class CorruptImageError(DataError):
    """Image file cannot be decoded."""


class ShapeMismatchError(DataError):
    """Two rasters/codes that must share dimensions do not."""


class MaskTooSmallError(DataError):
    """Mask has no connected foreground region large enough to fit."""


class CircleFitError(DataError):
    """No circle candidate reached the vote floor."""


class InsufficientOverlapError(DataError):
    """Too few jointly-valid bits to form a comparison score."""


class CorruptCodeError(DataError):
    """Iris-code file has a bad magic, version, or truncated payload."""


class ManifestError(DataError):
    """Pair manifest is missing required columns or has bad labels."""
