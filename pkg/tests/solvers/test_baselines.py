"""Tests for the finite element and finite difference baselines."""

from fractions import Fraction
import math

import numpy as np
import pytest

from libwavelets.exceptions import WaveletSpecError
from libwavelets.solvers.baselines import (
    discrete_error,
    fd_baseline,
    fem_baseline,
    hat_forms,
    interpolate_hats,
)
from libwavelets.solvers.problems import HelmholtzProblem, relative_L2_error

from . import manufactured_solution


def test_hat_forms():
    """Test the last hat is cut at x = 1."""
    forms = hat_forms(3)
    assert len(forms) == 8
    assert forms[-1].support() == (Fraction(7, 8), Fraction(1))
    assert forms[-1].value_at(1, "left") == 1
    with pytest.raises(WaveletSpecError):
        interpolate_hats([1, 2, 3], 2)


def test_interpolant_matches_grid():
    """Test the hat interpolant reproduces grid values."""
    values = np.arange(1, 5) * (1 + 1j)
    field = interpolate_hats(values, 2)
    assert np.allclose(field.evaluate([0.25, 0.5, 0.75, 1.0]), values)
    assert field.evaluate([0.0])[0] == 0


def test_fd_second_order(manufactured: HelmholtzProblem):
    """Test the grid error decays like h^2."""
    results = [fd_baseline(manufactured, level, manufactured_solution) for level in (5, 6, 7)]
    for coarse, fine in zip(results, results[1:]):
        assert 3.5 < coarse.discrete_error / fine.discrete_error < 4.5
    assert results[-1].size == 128
    assert results[-1].interpolation_error < results[0].interpolation_error
    assert np.isfinite(results[-1].report.kappa)


def test_fd_without_exact(manufactured: HelmholtzProblem):
    """Test errors are only reported with a reference solution."""
    result = fd_baseline(manufactured, 4)
    assert result.discrete_error is None
    assert result.grid[-1] == 1.0
    assert discrete_error(manufactured_solution(result.grid), manufactured_solution, 4) == 0


def test_fem_second_order(manufactured: HelmholtzProblem):
    """Test the hat Galerkin error decays like h^2 in L2."""
    errors = []
    for level in (5, 6):
        result = fem_baseline(manufactured, level)
        assert result.field.metadata["size"] == 2**level
        errors.append(relative_L2_error(result.field, manufactured_solution))
    rate = math.log2(errors[0] / errors[1])
    assert 1.8 < rate < 2.2
