"""Exception types shared across the package."""


class MhotvError(ValueError):
    """Base class for all package-specific errors."""


class LengthMismatch(MhotvError):
    """Two sequences that must share a length do not."""


class ShapeMismatch(MhotvError):
    """Array shapes are inconsistent with the requested operation."""


class DimensionMismatch(MhotvError):
    """Operator and data dimensions disagree."""


class NonSymmetricSpectrum(MhotvError):
    """A real inverse transform was requested of a spectrum that is not
    conjugate-symmetric within tolerance."""


class StencilTooLong(MhotvError):
    """Requested stencil support exceeds the signal length."""


class InvalidOrder(MhotvError):
    """Difference order must be positive."""


class UnsupportedOrder(MhotvError):
    """Wavelet order outside the supported set {1, 2, 3}."""


class GeometryMismatch(MhotvError):
    """Sinogram data does not match the stated acquisition geometry."""


class ConfigError(MhotvError):
    """Invalid or unreadable experiment configuration."""


class NumericalFailure(RuntimeError):
    """A computation produced non-finite values or failed to make progress."""
