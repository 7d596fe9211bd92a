"""Tests for filter banks."""

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest
import sympy

from libwavelets.exceptions import FilterDimensionMismatch, InvalidFilterError
from libwavelets.filters import (
    BiorthPair,
    FilterBank,
    check_derivative_orthogonality,
    check_eigenvalue_conditions,
    check_perfect_reconstruction,
    check_stable_pair,
    derivative_orthogonal_exists,
    refinable_moments,
    reproduction_coefficients,
    sum_rule_order,
    symbol_eval,
    vanishing_moment_order,
)
from libwavelets.refinable import derivative_gram_symbol, gram_integrals

from .conftest import scalar_bank


def test_from_raw():
    """Test parsing a filter bank."""
    taps = {"-1": ["1/4"], "0": [[1, 2]], "1": [[1, 4]]}
    bank = FilterBank.from_raw({"support": [-1, 1], "taps": taps})
    assert bank.support == (-1, 1)
    assert bank.tap(0)[0, 0] == sympy.Rational(1, 2)
    assert bank.tap(5)[0, 0] == 0
    assert FilterBank.from_raw(bank.as_raw()).support == bank.support


@pytest.mark.parametrize(
    "raw",
    [
        {"support": [-2, 1], "taps": {"-1": [1], "0": [1], "1": [1]}},
        {"support": [0, 1], "taps": {"0": [1], "2": [1]}},
        {"support": [0, 0], "rows": 2, "taps": {"0": [1, 0, 0]}},
        {"taps": {"0": [1]}},
    ],
)
def test_from_raw_invalid(raw):
    """Test malformed filters are rejected."""
    with pytest.raises(InvalidFilterError):
        FilterBank.from_raw(raw)


def test_symbol(cdf_pair: BiorthPair):
    """Test the symbol of the hat filter."""
    xi = np.array([0.0, np.pi, np.pi / 2])
    values = symbol_eval(cdf_pair.a, xi).reshape(-1)
    assert np.allclose(values, [1.0, 0.0, 0.5])


def test_perfect_reconstruction(cdf_pair: BiorthPair):
    """Test the CDF 2/2 bank reconstructs exactly."""
    report = check_perfect_reconstruction(cdf_pair)
    assert report.passed
    assert report.exact is True
    assert report.residual < 1e-12


def test_perfect_reconstruction_fails_for_mismatched_dual(cdf_pair: BiorthPair):
    """Test a primal bank is not its own dual."""
    pair = BiorthPair(cdf_pair.a, cdf_pair.b, cdf_pair.a, cdf_pair.b)
    report = check_perfect_reconstruction(pair)
    assert not report.passed
    assert report.exact is False
    with pytest.raises(InvalidFilterError):
        BiorthPair.verified(cdf_pair.a, cdf_pair.b, cdf_pair.a, cdf_pair.b)


def test_reflected_pair_reconstructs(cdf_pair: BiorthPair):
    """Test reflection keeps perfect reconstruction."""
    assert check_perfect_reconstruction(cdf_pair.reflect()).passed


def test_eigenvalue_conditions(cdf_pair: BiorthPair, hermite_filters: dict):
    """Test the generators satisfy the eigenvalue conditions."""
    assert check_eigenvalue_conditions(cdf_pair.a).passed
    assert check_eigenvalue_conditions(cdf_pair.a_dual).passed
    assert check_eigenvalue_conditions(hermite_filters["a"]).passed


def test_sum_rules(cdf_pair: BiorthPair, hermite_filters: dict):
    """Test sum rule orders of the shipped filters."""
    assert sum_rule_order(cdf_pair.a)[0] == 2
    assert sum_rule_order(cdf_pair.a_dual)[0] == 2
    assert sum_rule_order(hermite_filters["a"])[0] == 4


def test_moments_of_hat(cdf_pair: BiorthPair):
    """Test the hat is normalized and even."""
    data = refinable_moments(cdf_pair.a)
    assert data.moments[0][0, 0] == 1
    assert data.moments[1][0, 0] == 0
    assert (data.matching_jets[0] * data.moments[0])[0, 0] == 1


def test_reproduction_coefficients(cdf_pair: BiorthPair):
    """Test x = sum_k k phi(x - k) for the hat."""
    data = refinable_moments(cdf_pair.a)
    for shift in (-2, 0, 3):
        assert reproduction_coefficients(data, 1, shift)[0, 0] == shift
        assert reproduction_coefficients(data, 0, shift)[0, 0] == 1


def test_vanishing_moments(cdf_pair: BiorthPair, hermite_filters: dict):
    """Test vanishing moment orders."""
    assert vanishing_moment_order(cdf_pair.b, refinable_moments(cdf_pair.a)) == 2
    assert vanishing_moment_order(cdf_pair.b_dual, refinable_moments(cdf_pair.a_dual)) == 2
    hermite_moments = refinable_moments(hermite_filters["a"])
    assert vanishing_moment_order(hermite_filters["b"], hermite_moments) == 0


def test_vanishing_moments_dimension_mismatch(cdf_pair: BiorthPair, hermite_filters: dict):
    """Test a scalar wavelet filter against vector moments."""
    with pytest.raises(FilterDimensionMismatch):
        vanishing_moment_order(cdf_pair.b, refinable_moments(hermite_filters["a"]))


def test_hermite_derivative_orthogonality(hermite, hermite_filters: dict):
    """Test the Hermite wavelet is second order derivative-orthogonal."""
    gram = derivative_gram_symbol(gram_integrals(hermite, hermite, 2), 2)
    assert check_derivative_orthogonality(hermite_filters["a"], hermite_filters["b"], 2, gram)
    assert derivative_orthogonal_exists(hermite_filters["a"], 2)
    assert not derivative_orthogonal_exists(scalar_bank(["1/4", "1/2", "1/4"], -1), 2)


@settings(max_examples=30, deadline=None)
@given(xi=st.floats(-10, 10))
def test_symbol_identities(cdf_pair: BiorthPair, xi):
    """Test the CDF 2/2 symbols are 2 pi periodic and satisfy perfect reconstruction."""
    a = cdf_pair.a.symbol(xi)[0, 0]
    assert np.isclose(cdf_pair.a.symbol(xi + 2 * np.pi)[0, 0], a)
    a_pi = cdf_pair.a.symbol(xi + np.pi)[0, 0]
    dual = cdf_pair.a_dual.symbol(xi)[0, 0]
    dual_pi = cdf_pair.a_dual.symbol(xi + np.pi)[0, 0]
    assert np.isclose(a * np.conj(dual) + a_pi * np.conj(dual_pi), 1)


def test_stable_pair_exact_verdict(caplog):
    """Test a determinant tiny on the circle but never zero is still stable."""
    a = scalar_bank(["1/2", "1/2"], 0)
    tiny = sympy.Rational(1, 10**12)
    b = scalar_bank([tiny / 2, -tiny / 2], 0)
    assert check_stable_pair(a, b)
    assert "never zero" in caplog.text
    assert not check_stable_pair(a, a)


def test_stable_pair_sampled_verdict(monkeypatch):
    """Test sampling decides when the exact root test is unavailable."""

    def unavailable(*args, **kwargs):
        raise NotImplementedError

    a = scalar_bank(["1/2", "1/2"], 0)
    tiny = sympy.Rational(1, 10**12)
    monkeypatch.setattr(sympy, "gcd", unavailable)
    assert not check_stable_pair(a, scalar_bank([tiny / 2, -tiny / 2], 0))
    assert check_stable_pair(a, scalar_bank(["1/2", "-1/2"], 0))
