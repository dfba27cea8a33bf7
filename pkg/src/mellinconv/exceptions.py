"""Exception types shared across the library."""


class MellinConvError(Exception):
    """Base class for all library-specific errors."""


class PoleError(MellinConvError):
    """Gamma evaluated at a non-positive integer."""


class NoConvergence(MellinConvError):
    """A series or quadrature failed to reach the requested tolerance."""


class DivergentSeries(MellinConvError):
    """Hypergeometric series outside its region of convergence."""


class BadDenominator(MellinConvError):
    """A lower series parameter is zero or a negative integer."""


class OutOfStrip(MellinConvError):
    """Mellin variable outside the strip of analyticity."""


class EmptyStrip(MellinConvError):
    """Strips of the two transforms do not intersect."""


class PoleCollision(MellinConvError):
    """Two pole sequences coincide; residue series would need log terms."""


class SimplePoleViolation(MellinConvError):
    """Case parameters violate the simple-pole conditions."""


class PatternMismatch(MellinConvError):
    """Convolution spec does not match the requested catalog case."""


class BoundaryRegion(MellinConvError):
    """Effective argument too close to the series branch boundary."""


class SlowDecay(MellinConvError):
    """Contour integrand tail refuses to fall below tolerance."""


class HighVariance(MellinConvError):
    """Monte Carlo estimate exceeds the relative error budget."""


class UnsupportedExpression(MellinConvError):
    """Gamma expression outside the supported structural class."""
