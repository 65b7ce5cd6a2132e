"""Exception and warning types shared across the package."""


class UgwbError(Exception):
    """Base class for all package-specific errors."""


class NonConvergence(UgwbError):
    """An iterative numerical routine exhausted its budget before reaching tolerance."""


class InvalidLambda(UgwbError, ValueError):
    """An eigenvalue is outside (0, 1] where the radius map is defined."""


class DimensionMismatch(UgwbError, ValueError):
    """Array shapes are inconsistent with the grid or with each other."""


class WindowTouchesSpectrum(UgwbError):
    """A spectral window boundary falls inside (or too close to) the spectrum."""


class DegenerateFit(UgwbError):
    """Too few usable distance bins to fit a decay rate."""


class TooFewRadii(UgwbError):
    """Gap statistics require at least three distinct radii."""


class BoxExceedsGrid(UgwbError, ValueError):
    """A requested trace box extends beyond the kernel's grid."""


class TruncationWarning(UserWarning):
    """A truncated series or sum may carry error above the requested tolerance."""


class RadiusClampWarning(UserWarning):
    """An eigenvalue implied an imaginary concentration radius; clamped to 0."""


class BetaMarginWarning(UserWarning):
    """The weight rate q is not safely below the kernel's fitted decay rate."""


class OverflowFlagWarning(UserWarning):
    """The weighted kernel norm appears to grow toward the grid boundary."""
