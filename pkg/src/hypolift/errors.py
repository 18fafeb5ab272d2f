"""Exception and warning types raised across the package."""


class HypoliftError(Exception):
    """Base class for all package errors."""


class InvalidParameter(HypoliftError, ValueError):
    pass


class UnsupportedDynamics(HypoliftError, ValueError):
    """Requested operation has no meaning for this kind of dynamics."""


class NoCrossing(HypoliftError, RuntimeError):
    """A norm curve never fell below the requested threshold."""


class NonPSD(HypoliftError, RuntimeError):
    """Covariance could not be factorized even after regularization."""


class NotSquareIntegrable(HypoliftError, ValueError):
    """Density ratio of two Gaussians is not in L2 of the reference law."""


class WindowOutOfRange(HypoliftError, ValueError):
    pass


class InsufficientData(HypoliftError, ValueError):
    pass


class EnvelopeViolation(HypoliftError, RuntimeError):
    """A thinning proposal exceeded its user-supplied rate envelope."""


class BranchAmbiguity(UserWarning):
    """Cube-root branch of a closed-form root degenerated; an alternative was used."""


class NonUnimodalWarning(UserWarning):
    """Grid pre-scan found several local minima of an objective."""
