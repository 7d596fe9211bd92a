"""Biorthogonal wavelets on a bounded interval."""

from .basis import (  # noqa: F401
    BasisSpec,
    Element,
    IntervalBasis,
    LevelBounds,
    assemble_basis,
    evaluate_element,
    fem_basis,
    hermite_biharmonic_basis,
    minimal_levels,
)
from .boundary import (  # noqa: F401
    BoundaryData,
    BoundaryFunction,
    EndpointOptions,
    build_boundary,
    construct_dual_phiL,
    construct_dual_psiL,
    construct_phiL,
    construct_psiL,
)
from .transform import Multilevel, fast_transform, inverse_transform  # noqa: F401
