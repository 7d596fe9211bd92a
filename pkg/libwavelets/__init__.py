"""Biorthogonal wavelets on an interval and wavelet Galerkin solvers."""

from typing import Optional

from .const import BASIS_NAME_FEM, BASIS_NAME_HERMITE
from .const import ElementRole  # noqa: F401
from .const import ElementSide  # noqa: F401
from .const import Family
from .const import NormalizationMode  # noqa: F401
from .const import QuadraturePolicy  # noqa: F401
from .filters import BiorthPair, FilterBank, load_pair  # noqa: F401
from .interval import (  # noqa: F401
    BasisSpec,
    IntervalBasis,
    assemble_basis,
    fast_transform,
    fem_basis,
    hermite_biharmonic_basis,
    inverse_transform,
    minimal_levels,
)
from .piecewise import PiecewiseForm  # noqa: F401
from .refinable import RefinableVector, gram_integrals  # noqa: F401


def get_basis(
    name: str,
    finest: Optional[int] = None,
    coarse: Optional[int] = None,
    family: Family = Family.PRIMAL,
) -> IntervalBasis:
    """Get a basis by reference name or basis spec file."""
    if name == BASIS_NAME_FEM:
        return fem_basis(finest if finest is not None else 1)
    if name == BASIS_NAME_HERMITE:
        return hermite_biharmonic_basis(finest if finest is not None else 1)
    return assemble_basis(BasisSpec.from_fixture(name), coarse, finest, family)
