"""Tests for the fast wavelet transform."""

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from libwavelets.exceptions import TransformDimensionMismatch
from libwavelets.interval.basis import IntervalBasis
from libwavelets.interval.transform import (
    Multilevel,
    fast_transform,
    inverse_transform,
    single_scale_size,
    unflatten,
)


def test_round_trip(dirichlet_basis: IntervalBasis):
    """Test inverse(fast(s)) = s for real and complex data."""
    rng = np.random.default_rng(7)
    values = rng.standard_normal(single_scale_size(dirichlet_basis))
    assert values.shape == (31,)
    multilevel = fast_transform(dirichlet_basis, values)
    assert np.allclose(inverse_transform(dirichlet_basis, multilevel), values)
    complex_values = values + 1j * rng.standard_normal(values.shape)
    multilevel = fast_transform(dirichlet_basis, complex_values)
    assert np.allclose(inverse_transform(dirichlet_basis, multilevel), complex_values)


def test_same_function(dirichlet_basis: IntervalBasis):
    """Test both coefficient vectors describe one function."""
    rng = np.random.default_rng(11)
    values = rng.standard_normal(31)
    multilevel = fast_transform(dirichlet_basis, values)
    space = dirichlet_basis.space
    single = space.matrix([e.atoms for e in dirichlet_basis.scaling_set(5)], 5)
    atoms = dirichlet_basis.coefficient_matrix(5).T @ multilevel.flatten()
    assert np.allclose(atoms, single.T @ values)


def test_level_sizes(dirichlet_basis: IntervalBasis):
    """Test the split follows the levels of the basis."""
    multilevel = fast_transform(dirichlet_basis, np.ones(31))
    assert multilevel.scaling.shape == (3,)
    assert [d.shape[0] for d in multilevel.details] == [4, 8, 16]
    again = unflatten(dirichlet_basis, multilevel.flatten())
    assert np.array_equal(again.flatten(), multilevel.flatten())


def test_dimension_mismatch(dirichlet_basis: IntervalBasis):
    """Test wrong coefficient counts."""
    with pytest.raises(TransformDimensionMismatch):
        fast_transform(dirichlet_basis, np.ones(30))
    with pytest.raises(TransformDimensionMismatch):
        inverse_transform(dirichlet_basis, Multilevel(np.ones(3), [np.ones(4)]))
    with pytest.raises(TransformDimensionMismatch):
        details = [np.ones(4), np.ones(7), np.ones(16)]
        inverse_transform(dirichlet_basis, Multilevel(np.ones(3), details))
    with pytest.raises(TransformDimensionMismatch):
        unflatten(dirichlet_basis, np.ones(5))


@settings(max_examples=20, deadline=None)
@given(values=st.lists(st.floats(-1e3, 1e3), min_size=31, max_size=31))
def test_round_trip_property(dirichlet_basis: IntervalBasis, values):
    """Test the inverse undoes the forward transform for arbitrary data."""
    values = np.asarray(values)
    multilevel = fast_transform(dirichlet_basis, values)
    assert np.allclose(inverse_transform(dirichlet_basis, multilevel), values, atol=1e-8)
