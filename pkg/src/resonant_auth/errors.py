"""Exception types shared across the package."""


class ResonantAuthError(Exception):
    """Base class for all package-specific errors."""


class FormatError(ResonantAuthError):
    """Malformed or truncated file content."""


class UnsupportedError(ResonantAuthError):
    """Well-formed input in an encoding or configuration we do not handle."""


class EmptyError(ResonantAuthError):
    """Zero-length audio data where samples are required."""


class ManifestError(ResonantAuthError):
    """Dataset manifest violates its schema."""


class NoOnsetError(ResonantAuthError):
    """No sample crosses the onset detection threshold."""


class SilentSegmentError(ResonantAuthError):
    """Segment RMS too small to normalize."""


class ArgumentError(ResonantAuthError, ValueError):
    """Invalid argument value."""


class ShapeError(ArgumentError):
    """Array dimensions do not match."""


class StateError(ResonantAuthError):
    """Operation invoked with stale or inconsistent internal state."""


class CompatibilityError(ResonantAuthError):
    """Model bundle and pipeline configuration do not match."""
