"""Constants for interval wavelet library."""
from enum import Enum, IntEnum

DEFAULT_TOLERANCE = 1e-12
PERFECT_RECONSTRUCTION_SAMPLES = 64
DETERMINANT_SAMPLES = 1024
DETERMINANT_TOLERANCE = 1e-10
STABILITY_SAMPLES = 1024
STABILITY_MARGIN = 1e-10
SUM_RULE_CAP = 20
DYADIC_LEVEL = 12
# Boundary wavelet completions tied on support are ranked at this level.
RIESZ_TRUNCATION_LEVEL = 6

DENSE_LIMIT = 4096
SVD_DENSE_LIMIT = 5000
CONDITION_AGREEMENT = 1e-6
SINGULAR_THRESHOLD = 1e-14

GAUSS_ORDER = 10
DOUBLE_DIGITS = 15
EXTENDED_DIGITS = 40

# Series expansion replaces integration by parts below this |omega * width|.
OSCILLATION_SERIES_LIMIT = 1.0


class Family(Enum):
    """Primal or dual member of a biorthogonal pair."""

    PRIMAL = "primal"
    DUAL = "dual"


class ElementRole(Enum):
    """Scaling function or wavelet."""

    SCALING = "scaling"
    WAVELET = "wavelet"


class ElementSide(Enum):
    """Where an element sits in the interval."""

    LEFT = "left"
    INTERIOR = "interior"
    RIGHT = "right"


class NormalizationMode(Enum):
    """Per-element scaling applied before assembling a matrix."""

    UNIT_L2 = "unit-l2"
    UNIT_DERIVATIVE = "unit-derivative"
    UNIT_H1 = "unit-h1"
    NONE = "none"


class QuadraturePolicy(Enum):
    """How load vectors are integrated."""

    EXACT = "exact"
    GAUSS = "gauss"


class ProblemType(Enum):
    """Model problem."""

    HELMHOLTZ = "helmholtz"
    BIHARMONIC = "biharmonic"


class ExitCode(IntEnum):
    """Exit status of the command line tool."""

    OK = 0
    VALIDATION = 2
    NUMERICAL = 3


FILTER_CDF22 = "cdf22.json"
FILTER_HERMITE_CUBIC = "hermite_cubic.json"
FILTER_HAAR = "haar.json"
BASIS_CDF22_DIRICHLET = "cdf22_dirichlet.json"

BASIS_NAME_FEM = "fem"
BASIS_NAME_HERMITE = "hermite"

PROBLEM_INDICATOR = "indicator.json"
PROBLEM_INDICATOR_DESK = "indicator_desk.json"
PROBLEM_FPIECE_C1 = "fpiece_c1.json"
PROBLEM_BIHARMONIC_SIN = "biharmonic_sin.json"
