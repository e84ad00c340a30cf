"""Exception types shared across the package."""


class FracmaxError(Exception):
    """Base class for all package errors."""


class EmptyTarget(FracmaxError):
    """A node-set argument that must be nonempty is empty."""


class MaskMismatch(FracmaxError):
    """Two fields that must share a domain mask do not."""


class DimensionUnsupported(FracmaxError):
    """Operation is only defined for a subset of grid dimensions."""


class ResolutionInsufficient(FracmaxError):
    """Grid spacing too coarse to realize the requested construction."""


class SingularPoint(FracmaxError):
    """Weight evaluated exactly on its singular set with a negative exponent."""


class QuadratureFailure(FracmaxError):
    """Refined quadrature did not converge within the refinement cap."""


class InsufficientScales(FracmaxError):
    """Scale list too short or too narrow for a log-log fit."""


class SupportViolation(FracmaxError):
    """Field is nonzero too close to a boundary where it must vanish."""


class TailDivergent(FracmaxError):
    """Weight fails the tail-integrability hypothesis of the operation."""


class AdmissibilityViolation(FracmaxError):
    """A sweep parameter falls outside the admissible range."""


class DegenerateInput(FracmaxError):
    """Input makes the requested ratio or estimate meaningless (e.g. constant field)."""


class InstanceTooLarge(FracmaxError):
    """Dense solver instance exceeds the free-node cap."""


class UsageError(FracmaxError):
    """Malformed command line or config input."""
