"""Tests for piecewise polynomial-exponential forms."""

from fractions import Fraction

from hypothesis import given, settings, strategies as st
import mpmath
import numpy as np
import pytest
import sympy

from libwavelets.exceptions import WaveletSpecError
from libwavelets.piecewise import (
    Piece,
    PiecewiseForm,
    as_fraction,
    gauss_legendre_inner,
    linear_combination,
)
from libwavelets.utils import get_context


@pytest.fixture
def hat_form() -> PiecewiseForm:
    """Return the hat function on [-1, 1]."""
    left = PiecewiseForm.polynomial(-1, 0, [1, 1])
    right = PiecewiseForm.polynomial(0, 1, [1, -1])
    return left + right


def test_as_fraction():
    """Test rational conversions."""
    assert as_fraction("3/4") == Fraction(3, 4)
    assert as_fraction(sympy.Rational(-1, 8)) == Fraction(-1, 8)
    assert as_fraction(2) == Fraction(2)


def test_invalid_pieces():
    """Test empty, overlapping and oscillating exact pieces."""
    with pytest.raises(WaveletSpecError):
        PiecewiseForm((Piece(Fraction(1), Fraction(0), ()),))
    first = PiecewiseForm.polynomial(0, 1, [1]).pieces[0]
    second = PiecewiseForm.polynomial(Fraction(1, 2), 2, [1]).pieces[0]
    with pytest.raises(WaveletSpecError):
        PiecewiseForm((first, second))
    raw = {"pieces": [{"interval": [0, 1], "terms": [{"coeffs": [1], "omega": "2*pi"}]}]}
    with pytest.raises(WaveletSpecError):
        PiecewiseForm.from_raw(raw)
    with pytest.raises(WaveletSpecError):
        PiecewiseForm.from_raw({"pieces": [{"terms": []}]})


def test_hat_values(hat_form: PiecewiseForm):
    """Test point values and one-sided derivatives."""
    assert hat_form.value_at(0) == 1
    assert hat_form.value_at(Fraction(1, 4)) == Fraction(3, 4)
    assert hat_form.value_at(0, "left", 1) == 1
    assert hat_form.value_at(0, "right", 1) == -1
    assert hat_form.value_at(3) == 0
    values = hat_form.evaluate([-1.0, -0.5, 0.0, 0.5, 1.0, 2.0])
    assert np.allclose(values, [0, 0.5, 1, 0.5, 0, 0])


def test_hat_integrals(hat_form: PiecewiseForm):
    """Test exact integrals and inner products."""
    assert hat_form.integrate() == 1
    assert hat_form.inner(hat_form) == Fraction(2, 3)
    assert hat_form.inner(hat_form.dilate(0, 1)) == Fraction(1, 6)
    assert hat_form.derivative().inner(hat_form.derivative()) == 2
    assert hat_form.norm() == sympy.sqrt(sympy.Rational(2, 3))
    assert hat_form.restrict(0, Fraction(1, 2)).integrate() == Fraction(3, 8)


def test_dilate_and_reflect(hat_form: PiecewiseForm):
    """Test x -> f(2^j x - k) and x -> f(c - x)."""
    fine = hat_form.dilate(1, 3)
    assert fine.support() == (Fraction(1), Fraction(2))
    assert fine.value_at(Fraction(3, 2)) == 1
    assert fine.inner(fine) == Fraction(1, 3)
    difference = hat_form - hat_form.reflect()
    assert difference.inner(difference) == 0
    ramp = PiecewiseForm.polynomial(0, 1, [0, 1]).reflect(1)
    assert ramp.value_at(Fraction(1, 4), "right") == Fraction(3, 4)


def test_refine_keeps_function(hat_form: PiecewiseForm):
    """Test splitting pieces."""
    refined = hat_form.refine([Fraction(1, 3), Fraction(5)])
    assert Fraction(1, 3) in refined.breakpoints
    assert len(refined.pieces) == 3
    assert refined.inner(hat_form) == Fraction(2, 3)


def test_products_and_combinations(hat_form: PiecewiseForm):
    """Test pointwise products and linear combinations."""
    ramp = PiecewiseForm.polynomial(0, 1, [0, 1])
    assert (ramp * ramp).integrate() == Fraction(1, 3)
    assert (hat_form * ramp).integrate() == Fraction(1, 6)
    total = linear_combination([hat_form, ramp], [2, Fraction(-1, 2)])
    assert total.integrate() == Fraction(7, 4)
    assert (-ramp).integrate() == Fraction(-1, 2)
    assert (3 * ramp).integrate() == Fraction(3, 2)
    assert PiecewiseForm.zero().support() is None
    with pytest.raises(WaveletSpecError):
        ramp.scale(0.5)


def test_oscillating_integrals():
    """Test exp(i omega x) terms in double precision."""
    ctx = mpmath.fp
    wave = PiecewiseForm.exponential(0, 1, 2 * np.pi, 1, ctx)
    assert abs(wave.integrate()) < 1e-12
    assert abs(wave.norm() - 1) < 1e-12
    slope = wave.derivative().value_at(0, "right")
    assert abs(slope - 2j * np.pi) < 1e-12
    assert abs((wave * wave.conjugate()).integrate() - 1) < 1e-12


def test_high_frequency_in_extended_precision():
    """Test a large wave number against the closed form."""
    ctx = get_context(40)
    omega = 20000
    wave = PiecewiseForm.exponential(0, Fraction(3, 16), omega, 1, ctx)
    x = ctx.mpf(3) / 16
    expected = (ctx.expj(omega * x) - 1) / ctx.mpc(0, omega)
    assert abs(wave.integrate() - expected) < ctx.mpf(10) ** -30
    moment = (PiecewiseForm.polynomial(0, Fraction(3, 16), [0, 1], ctx) * wave).integrate()
    inverse = ctx.mpf(1) / omega**2
    closed = ctx.expj(omega * x) * (x / ctx.mpc(0, omega) + inverse) - inverse
    assert abs(moment - closed) < ctx.mpf(10) ** -20


def test_mixed_contexts(hat_form: PiecewiseForm):
    """Test exact forms follow the numeric context of the other operand."""
    wave = PiecewiseForm.exponential(-1, 1, 0, 1, mpmath.fp)
    assert abs((hat_form + wave).integrate() - 3) < 1e-12
    with pytest.raises(WaveletSpecError):
        wave + PiecewiseForm.exponential(-1, 1, 0, 1, get_context(30))
    with pytest.raises(WaveletSpecError):
        wave.to_context(None)


def test_raw_global_coefficients():
    """Test raw coefficients refer to the global variable."""
    raw = {"pieces": [{"interval": ["1", "2"], "terms": [{"coeffs": ["0", "0", "1"]}]}]}
    square = PiecewiseForm.from_raw(raw)
    assert square.value_at(Fraction(3, 2)) == Fraction(9, 4)
    assert square.integrate() == Fraction(7, 3)
    assert PiecewiseForm.from_raw(square.as_raw()) == square


def test_gauss_legendre_inner(hat_form: PiecewiseForm):
    """Test composite quadrature against exact integrals."""
    assert gauss_legendre_inner(hat_form, np.ones_like, 4) == pytest.approx(1.0)
    value = gauss_legendre_inner(hat_form, lambda x: x**2, 4, [Fraction(1, 2)])
    assert value == pytest.approx(1 / 6)


_coefficients = st.lists(st.integers(-6, 6), min_size=1, max_size=4)
_breaks = st.integers(-4, 4).map(lambda n: Fraction(n, 4))


@settings(max_examples=30, deadline=None)
@given(first=_coefficients, second=_coefficients, start=_breaks, shift=st.integers(1, 6))
def test_exact_algebra(first, second, start, shift):
    """Test integrals are linear and the real inner product is the integral of the product."""
    f = PiecewiseForm.polynomial(0, 1, first)
    g = PiecewiseForm.polynomial(start, start + Fraction(shift, 4), second)
    assert (f + g).integrate() == f.integrate() + g.integrate()
    assert (f - g).integrate() == f.integrate() - g.integrate()
    assert f.inner(g) == (f * g).integrate() == g.inner(f)
    assert f.scale(Fraction(3, 2)).inner(g) == Fraction(3, 2) * f.inner(g)
    assert f.reflect(1).integrate() == f.integrate()
