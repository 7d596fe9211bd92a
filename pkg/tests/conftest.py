"""Interval wavelets test configuration."""

import pytest

from libwavelets.const import BASIS_CDF22_DIRICHLET, FILTER_CDF22, FILTER_HERMITE_CUBIC, Family
from libwavelets.filters import BiorthPair, FilterBank, load_filters, load_pair
from libwavelets.interval.basis import (
    BasisSpec,
    EndpointData,
    IntervalBasis,
    assemble_basis,
    build_endpoints,
)
from libwavelets.refinable import RefinableVector, load_generators


@pytest.fixture(scope="session")
def cdf_pair() -> BiorthPair:
    """Return the CDF 2/2 filter bank."""
    return load_pair(FILTER_CDF22)


@pytest.fixture(scope="session")
def hermite_filters() -> dict:
    """Return the Hermite cubic filters a and b."""
    return load_filters(FILTER_HERMITE_CUBIC)


@pytest.fixture(scope="session")
def hat() -> RefinableVector:
    """Return the hat function generator."""
    return load_generators(FILTER_CDF22)[0]


@pytest.fixture(scope="session")
def hat_dual() -> RefinableVector:
    """Return the CDF 2/2 dual generator."""
    return load_generators(FILTER_CDF22)[1]


@pytest.fixture(scope="session")
def hermite() -> RefinableVector:
    """Return the Hermite cubic generator."""
    return load_generators(FILTER_HERMITE_CUBIC)[0]


@pytest.fixture(scope="session")
def dirichlet_spec() -> BasisSpec:
    """Return the shipped Dirichlet basis spec."""
    return BasisSpec.from_fixture(BASIS_CDF22_DIRICHLET)


@pytest.fixture(scope="session")
def dirichlet_endpoints(dirichlet_spec: BasisSpec) -> EndpointData:
    """Return the boundary functions of the Dirichlet spec."""
    return build_endpoints(dirichlet_spec)


@pytest.fixture(scope="session")
def dirichlet_basis(dirichlet_spec: BasisSpec, dirichlet_endpoints: EndpointData) -> IntervalBasis:
    """Return B_{2,5}."""
    return assemble_basis(dirichlet_spec, 2, 5, Family.PRIMAL, dirichlet_endpoints)


@pytest.fixture(scope="session")
def biorthogonal_bases(dirichlet_spec: BasisSpec, dirichlet_endpoints: EndpointData):
    """Return the primal and dual bases at J = 3, N = 6."""
    primal = assemble_basis(dirichlet_spec, 3, 6, Family.PRIMAL, dirichlet_endpoints)
    dual = assemble_basis(dirichlet_spec, 3, 6, Family.DUAL, dirichlet_endpoints)
    return primal, dual


def scalar_bank(coefficients, low: int) -> FilterBank:
    """Build a scalar filter from consecutive taps."""
    return FilterBank.from_scalar(coefficients, low)
