"""Tests for the enriched Helmholtz solver and its oracle."""

from fractions import Fraction

import mpmath
import numpy as np
import pytest

from libwavelets.const import PROBLEM_FPIECE_C1, PROBLEM_INDICATOR, ElementSide
from libwavelets.exceptions import WaveletSpecError
from libwavelets.interval.basis import IntervalBasis
from libwavelets.solvers.helmholtz import (
    Recombination,
    build_special_waves,
    modify_right_boundary,
    sesquilinear_matrix,
    solve_helmholtz,
    transmission_solution,
)
from libwavelets.solvers.problems import HelmholtzProblem, relative_L2_error

from tests import DESK_WAVE_NUMBER

from . import MANUFACTURED


def test_transmission_oracle(desk_problem: HelmholtzProblem):
    """Test the oracle solves the equation with its boundary and interface conditions."""
    exact = transmission_solution(desk_problem, mpmath.fp)
    slope = exact.derivative()
    curvature = exact.derivative(2)
    k = DESK_WAVE_NUMBER
    assert abs(exact.value_at(0, "right")) < 1e-12
    radiation = slope.value_at(1, "left") - 1j * k * exact.value_at(1, "left")
    assert abs(radiation) < 1e-8
    for point in (Fraction(3, 16), Fraction(11, 16)):
        assert abs(exact.value_at(point, "left") - exact.value_at(point, "right")) < 1e-10
        assert abs(slope.value_at(point, "left") - slope.value_at(point, "right")) < 1e-8
    inside = Fraction(1, 4)
    residual = -curvature.value_at(inside) - k * k * exact.value_at(inside)
    assert abs(residual - 10000) < 1e-6
    outside = Fraction(1, 2)
    assert abs(-curvature.value_at(outside) - k * k * exact.value_at(outside)) < 1e-6


def test_special_waves(desk_problem: HelmholtzProblem):
    """Test every wave meets its two conditions."""
    waves = build_special_waves(desk_problem)
    assert len(waves) == 2 * desk_problem.pieces
    assert [w.sign for w in waves[:2]] == [1, -1]
    for wave in waves:
        first, second = wave.residuals(wave.piece == desk_problem.pieces - 1)
        assert abs(first) < 1e-12
        assert abs(second) < 1e-9
        assert wave.trial_function().support() == (wave.lo, wave.hi)


def test_modify_right_boundary(dirichlet_basis: IntervalBasis):
    """Test the radiation condition holds for every trial function."""
    modified = modify_right_boundary(dirichlet_basis, float(DESK_WAVE_NUMBER))
    assert modified.modified
    for index in modified.modified:
        assert dirichlet_basis.element(index).side is ElementSide.RIGHT
    for index in range(dirichlet_basis.size):
        assert abs(modified.radiation_residual(index)) < 1e-9
        assert abs(modified.functions[index].value.value_at(0, "right")) < 1e-12


def test_recombination():
    """Test recombination parsing."""
    assert Recombination.from_raw(None) == Recombination()
    parsed = Recombination.from_raw({"post": [[1, 0], [0, "1j"]]})
    assert parsed.pre is None
    assert parsed.post[1][1] == 1j
    with pytest.raises(WaveletSpecError):
        Recombination.from_raw({"pre": [[1, 0], [0, 1, 2]]})


def test_sesquilinear_form(desk_problem: HelmholtzProblem):
    """Test the boundary term makes the form non-Hermitian."""
    waves = [w.trial_function() for w in build_special_waves(desk_problem)]
    matrix = np.array(sesquilinear_matrix(waves, 100.0, mpmath.fp), dtype=complex)
    assert matrix.shape == (10, 10)
    assert not np.allclose(matrix, matrix.conj().T)
    interior = matrix[:8, :8]
    assert np.allclose(interior, interior.conj().T)


def test_enriched_solution_is_exact(desk_problem: HelmholtzProblem):
    """Test special waves reproduce the indicator solution at N = 4."""
    result = solve_helmholtz(desk_problem, 4)
    exact = transmission_solution(desk_problem, mpmath.fp)
    assert relative_L2_error(result.field, exact) < 1e-8
    assert result.field.metadata["M"] == 5
    assert result.field.metadata["size"] == 15 + 2 * 5
    assert result.field.metadata["basis_size"] == 15
    assert len(result.field.forms) == 25
    assert np.isfinite(result.report.kappa)
    assert result.report.kappa_schur is not None


def test_wavelet_only_solution(desk_problem: HelmholtzProblem):
    """Test the plain wavelet space is less accurate than the enriched one."""
    exact = transmission_solution(desk_problem, mpmath.fp)
    plain = solve_helmholtz(desk_problem, 5, enrich=False)
    assert plain.field.metadata["M"] == 0
    assert plain.field.metadata["size"] == plain.field.metadata["basis_size"] == 31
    assert len(plain.field.forms) == 31
    assert relative_L2_error(plain.field, exact) > 1e-3
    unscaled = solve_helmholtz(desk_problem, 5, enrich=False, precondition=False)
    assert np.allclose(unscaled.field.evaluate([0.3, 0.9]), plain.field.evaluate([0.3, 0.9]))


def test_inhomogeneous_radiation_rejected():
    """Test the wavelet solver needs g = 0."""
    with pytest.raises(WaveletSpecError):
        solve_helmholtz(HelmholtzProblem.from_raw(MANUFACTURED), 3)


@pytest.fixture(scope="module")
def indicator() -> HelmholtzProblem:
    """Return the indicator source at k = 20000, solved with 40 digits."""
    return HelmholtzProblem.from_file(PROBLEM_INDICATOR)


def _within_order(value: float, published: float) -> bool:
    return published / 10 <= value <= published * 10


@pytest.mark.slow
def test_indicator_recovered_at_level_four(indicator: HelmholtzProblem):
    """Test k = 20000 is solved exactly once the mesh contains the partition."""
    result = solve_helmholtz(indicator, 4)
    exact = transmission_solution(indicator, result.field.ctx)
    assert relative_L2_error(result.field, exact, result.field.ctx) < 1e-6
    assert result.field.metadata["size"] == 15 + 10
    assert _within_order(result.report.kappa, 59241)
    assert _within_order(result.report.kappa_schur, 14372)


@pytest.mark.slow
def test_indicator_unresolved_at_level_three(indicator: HelmholtzProblem):
    """Test the partition breakpoints off the mesh spoil the enriched solution."""
    result = solve_helmholtz(indicator, 3)
    exact = transmission_solution(indicator, result.field.ctx)
    assert relative_L2_error(result.field, exact, result.field.ctx) > 1
    assert _within_order(result.report.kappa_schur, 9749)


# Preconditioned condition numbers of the plain wavelet system for N = 3..7.
WAVELET_ONLY_KAPPA = {3: 4.673, 4: 7.198, 5: 9.672, 6: 11.716, 7: 13.484}


@pytest.mark.slow
@pytest.mark.parametrize("level", sorted(WAVELET_ONLY_KAPPA))
def test_indicator_wavelet_only(indicator: HelmholtzProblem, level: int):
    """Test the plain wavelet system stays well conditioned at k = 20000."""
    result = solve_helmholtz(indicator, level, enrich=False)
    assert result.field.metadata["size"] == 2**level - 1
    assert result.report.kappa == pytest.approx(WAVELET_ONLY_KAPPA[level], rel=0.1)
    if level == 3:
        exact = transmission_solution(indicator, result.field.ctx)
        error = relative_L2_error(result.field, exact, result.field.ctx)
        assert error == pytest.approx(73.54, rel=0.05)


@pytest.mark.slow
def test_fpiece_wavelet_only():
    """Test the C1 piecewise source at k = 200000 and N = 6 without special waves."""
    problem = HelmholtzProblem.from_file(PROBLEM_FPIECE_C1)
    result = solve_helmholtz(problem, 6, enrich=False)
    assert result.report.kappa == pytest.approx(11.715, rel=0.1)
    exact = transmission_solution(problem, result.field.ctx)
    error = relative_L2_error(result.field, exact, result.field.ctx)
    assert error == pytest.approx(83.50, rel=0.05)


@pytest.mark.slow
def test_fpiece_enriched():
    """Test the enriched C1 piecewise problem at N = 6."""
    problem = HelmholtzProblem.from_file(PROBLEM_FPIECE_C1)
    result = solve_helmholtz(problem, 6)
    assert result.field.metadata["size"] == 63 + 6
    exact = transmission_solution(problem, result.field.ctx)
    assert relative_L2_error(result.field, exact, result.field.ctx) < 1
    assert _within_order(result.report.kappa, 282841)
    assert _within_order(result.report.kappa_schur, 72458)
