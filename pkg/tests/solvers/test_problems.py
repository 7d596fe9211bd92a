"""Tests for problem files and error measures."""

from fractions import Fraction

import mpmath
import numpy as np
import pytest

from libwavelets.const import PROBLEM_BIHARMONIC_SIN, PROBLEM_INDICATOR, PROBLEM_INDICATOR_DESK
from libwavelets.exceptions import InvalidPartition, WaveletSpecError, ZeroNorm
from libwavelets.piecewise import PiecewiseForm
from libwavelets.solvers.problems import (
    BiharmonicProblem,
    HelmholtzProblem,
    SolutionField,
    load_problem,
    relative_L2_error,
)
from libwavelets.utils import get_context

from . import MANUFACTURED

UNIT = {"pieces": [{"interval": [0, 1], "terms": [{"coeffs": [1]}]}]}


def test_load_shipped_problems():
    """Test the bundled problem files."""
    desk = load_problem(PROBLEM_INDICATOR_DESK)
    assert isinstance(desk, HelmholtzProblem)
    assert desk.pieces == 5
    assert desk.k(mpmath.fp) == 100
    assert desk.partition[1] == (Fraction(3, 16), Fraction(5, 16))
    indicator = load_problem(PROBLEM_INDICATOR)
    assert indicator.precision == 40
    ctx = get_context(40)
    source = indicator.source(ctx)
    assert abs(source.value_at(Fraction(1, 4)) - 2 * ctx.sqrt(2) * 10**8) < ctx.mpf(10) ** -20
    biharmonic = load_problem(PROBLEM_BIHARMONIC_SIN)
    assert isinstance(biharmonic, BiharmonicProblem)
    exact = biharmonic.exact()
    x = np.array([0.1, 0.37, 0.5])
    assert np.allclose(exact.evaluate(x), x * (1 - x) * np.sin(50 * np.pi * x))


def test_manufactured_problem(manufactured: HelmholtzProblem):
    """Test oscillating sources and complex radiation data."""
    assert manufactured.pieces == 1
    assert manufactured.datum(mpmath.fp) == pytest.approx(
        np.sin(10) + 10 * np.cos(10) - 10j * np.sin(10)
    )
    values = manufactured.source(mpmath.fp).evaluate([0.0, 0.3])
    assert np.allclose(values, -20 * np.cos(10 * np.array([0.0, 0.3])))


@pytest.mark.parametrize(
    "changes",
    [
        {"wave_number": -5},
        {"wave_number": "I"},
        {"precision": 10},
        {"type": "biharmonic"},
        {"source": {"pieces": [{"interval": [0, 2], "terms": [{"coeffs": [1]}]}]}},
    ],
)
def test_invalid_helmholtz(changes: dict):
    """Test problem validation."""
    raw = {**MANUFACTURED, **changes}
    with pytest.raises(WaveletSpecError):
        HelmholtzProblem.from_raw(raw)


def test_missing_keys():
    """Test required keys."""
    with pytest.raises(WaveletSpecError):
        HelmholtzProblem.from_raw({"wave_number": 1})
    with pytest.raises(WaveletSpecError):
        BiharmonicProblem.from_raw({"type": "biharmonic"})
    with pytest.raises(WaveletSpecError):
        BiharmonicProblem.from_raw({"type": "helmholtz", "source": UNIT})


@pytest.mark.parametrize(
    "partition",
    [
        [],
        [[0, [1, 2]]],
        [[0, [1, 2]], [[3, 4], 1]],
        [[0, [1, 2]], [[1, 2], [1, 2]], [[1, 2], 1]],
        [["x", 1]],
    ],
)
def test_invalid_partition(partition: list):
    """Test partition validation."""
    with pytest.raises(InvalidPartition):
        HelmholtzProblem.from_raw({"wave_number": 1, "source": UNIT, "partition": partition})


def test_relative_error():
    """Test the L2 error measure on closed forms and callables."""
    ramp = PiecewiseForm.polynomial(0, 1, [0, 1])
    field = SolutionField((ramp,), [1.0])
    assert relative_L2_error(field, ramp) < 1e-12
    half = SolutionField((ramp,), [0.5])
    assert relative_L2_error(half, lambda x: x) == pytest.approx(50.0)
    ctx = get_context(30)
    exact = SolutionField((ramp,), [ctx.mpf(1) / 2], ctx)
    assert relative_L2_error(exact, ramp.scale(Fraction(1, 2)), ctx) < 1e-25
    with pytest.raises(ZeroNorm):
        relative_L2_error(field, lambda x: np.zeros_like(x))
    with pytest.raises(WaveletSpecError):
        SolutionField((ramp,), [1.0, 2.0])


def test_samples():
    """Test equispaced samples of a solution."""
    field = SolutionField((PiecewiseForm.polynomial(0, 1, [0, 1]),), [2.0])
    x, values = field.samples(5)
    assert np.allclose(x, [0, 0.25, 0.5, 0.75, 1])
    assert np.allclose(values, 2 * x)
