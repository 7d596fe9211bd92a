"""Interval wavelet library exceptions."""


class WaveletException(Exception):
    """Base class for exceptions."""


class WaveletSpecError(WaveletException):
    """Represents invalid user input or an invalid spec file."""


class InvalidFilterError(WaveletSpecError):
    """Represents a malformed filter bank."""


class FilterDimensionMismatch(InvalidFilterError):
    """Represents filters of incompatible sizes."""


class SmoothnessOrderError(WaveletSpecError):
    """Represents a derivative order the supplied data cannot support."""


class LevelTooCoarse(WaveletSpecError):
    """Represents a coarse level below the minimal admissible level."""


class InvalidPartition(WaveletSpecError):
    """Represents a partition that does not cover the unit interval."""


class TransformDimensionMismatch(WaveletSpecError):
    """Represents a coefficient vector of the wrong length."""


class UnknownElement(WaveletSpecError):
    """Represents an element id outside the basis."""


class NumericalError(WaveletException):
    """Base class for numerical failures."""


class DegenerateGenerator(NumericalError):
    """Represents a non-simple eigenvalue 1 of the integer evaluation matrix."""


class GramSystemSingular(NumericalError):
    """Represents a singular self-consistency system for Gram integrals."""


class NormalizationNotUnique(NumericalError):
    """Represents a normalization vector that is not unique."""


class BoundaryConstructionError(NumericalError):
    """Represents a boundary construction without solution."""


class DualConstructionError(BoundaryConstructionError):
    """Represents a dual boundary construction without (unique) solution."""


class SingularCompletion(BoundaryConstructionError):
    """Represents a singular completion [U; V] of the interior wavelets."""


class NotPositiveDefinite(NumericalError):
    """Represents a Gram matrix that is not positive definite."""


class ZeroDiagonal(NumericalError):
    """Represents a zero diagonal entry in a system to precondition."""


class SingularSchurBlock(NumericalError):
    """Represents a singular enrichment block."""


class SingularSystem(NumericalError):
    """Represents a singular linear system."""


class ZeroNorm(NumericalError):
    """Represents a function with zero norm where a norm is divided by."""


class MissingIntegralBackend(NumericalError):
    """Represents an element pair without an integration backend."""
