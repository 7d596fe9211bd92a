"""Tests for Galerkin assembly and conditioning."""

import math

import mpmath
import numpy as np
import pytest
import scipy.io
import scipy.sparse

from libwavelets.assembly import (
    GalerkinSystem,
    NormalizationRecord,
    apply_diagonal_preconditioner,
    condition_number,
    conditioning,
    element_norms,
    export_matrix,
    gram_matrix,
    level_blocks_vanish,
    load_vector,
    mass_matrix,
    schur_condition,
    stiffness_matrix,
    verify_basis,
)
from libwavelets.const import NormalizationMode, QuadraturePolicy
from libwavelets.exceptions import (
    MissingIntegralBackend,
    SingularSchurBlock,
    WaveletException,
    WaveletSpecError,
    ZeroDiagonal,
    ZeroNorm,
)
from libwavelets.interval.basis import (
    IntervalBasis,
    assemble_basis,
    fem_basis,
    hermite_biharmonic_basis,
)
from libwavelets.piecewise import PiecewiseForm
from libwavelets.utils import get_context


def test_fem_gram():
    """Test the hat mass and stiffness entries at level 3."""
    basis = fem_basis(3)
    mass = gram_matrix(basis).toarray()
    assert mass[0, 0] == pytest.approx(1 / 12)
    assert mass[0, 1] == pytest.approx(1 / 48)
    assert mass[0, 2] == 0
    stiffness = gram_matrix(basis, 1).toarray()
    assert stiffness[3, 3] == pytest.approx(16)
    assert stiffness[3, 4] == pytest.approx(-8)
    assert np.allclose(element_norms(basis), math.sqrt(1 / 12))


def test_fem_conditioning():
    """Test kappa of the normalized hat mass tends to 3 and stiffness grows like 4^N."""
    mass = mass_matrix(fem_basis(6))
    assert mass.normalization.mode is NormalizationMode.UNIT_L2
    kappa = condition_number(mass.matrix)
    assert 2.9 < kappa < 3
    coarse = condition_number(stiffness_matrix(fem_basis(4)).matrix)
    fine = condition_number(stiffness_matrix(fem_basis(5)).matrix)
    assert 3.5 < fine / coarse < 4.5


def test_wavelet_conditioning(dirichlet_spec, dirichlet_endpoints):
    """Test the normalized wavelet stiffness stays well conditioned."""
    kappas = []
    for finest in (5, 6):
        basis = assemble_basis(dirichlet_spec, 2, finest, endpoints=dirichlet_endpoints)
        kappas.append(condition_number(stiffness_matrix(basis).matrix))
    assert kappas[1] / kappas[0] < 1.5


def test_hermite_stiffness_is_identity():
    """Test the biharmonic basis diagonalizes the second derivative form."""
    basis = hermite_biharmonic_basis(3)
    system = stiffness_matrix(basis, 2)
    assert np.max(np.abs(system.matrix - np.eye(basis.size))) < 1e-10
    assert level_blocks_vanish(system.matrix, basis)
    report = verify_basis(basis, moments=0, stiffness_order=2, derivatives=2)
    assert report.passed()
    assert report.block_diagonal is True


def test_verify_dirichlet(dirichlet_basis: IntervalBasis):
    """Test homogeneous boundary values and vanishing moments of B_{2,5}."""
    report = verify_basis(dirichlet_basis)
    assert report.passed()
    assert report.biorthogonality is None
    assert report.endpoint == 0
    assert report.moments == 0
    raw = report.as_raw()
    assert raw["levels"] == [2, 5]
    assert raw["vanishing_moments_checked"] == 2
    assert not level_blocks_vanish(gram_matrix(dirichlet_basis), dirichlet_basis)


def test_verify_level_mismatch(dirichlet_basis: IntervalBasis, biorthogonal_bases):
    """Test primal and dual bases must share levels."""
    _, dual = biorthogonal_bases
    with pytest.raises(WaveletSpecError):
        verify_basis(dirichlet_basis, dual)


def test_condition_numbers():
    """Test singular, empty and block conditioning."""
    assert condition_number(np.array([[1.0, 1.0], [1.0, 1.0]])) == math.inf
    with pytest.raises(WaveletSpecError):
        conditioning(np.zeros((2, 2)))
    report = schur_condition(np.diag([1.0, 2.0, 3.0, 4.0]), 2)
    assert report.kappa == pytest.approx(4)
    assert report.kappa_schur == pytest.approx(2)
    assert report.kappa_block == pytest.approx(4 / 3)
    with pytest.raises(WaveletSpecError):
        schur_condition(np.eye(3), 0)
    singular = np.array([[1.0, 0, 0], [0, 1.0, 1.0], [0, 1.0, 1.0]])
    with pytest.raises(SingularSchurBlock):
        schur_condition(singular, 2)


def test_non_hermitian_conditioning():
    """Test singular values are used for non-Hermitian matrices."""
    matrix = scipy.sparse.csr_matrix(np.array([[2.0, 1.0], [0.0, 1.0]]))
    report = conditioning(matrix)
    values = np.linalg.svd(matrix.toarray(), compute_uv=False)
    assert report.kappa == pytest.approx(values[0] / values[-1])
    assert report.method == "svd"


def test_diagonal_preconditioner():
    """Test symmetric diagonal scaling of matrix and rhs."""
    system = GalerkinSystem(np.array([[4.0, 2.0], [2.0, 9.0]]), np.array([2.0, 3.0]))
    scaled = apply_diagonal_preconditioner(system)
    assert np.allclose(scaled.matrix, [[1.0, 1 / 3], [1 / 3, 1.0]])
    assert np.allclose(scaled.rhs, [1.0, 1.0])
    assert np.allclose(scaled.recover(np.array([1.0, 1.0])), [0.5, 1 / 3])
    with pytest.raises(ZeroDiagonal):
        apply_diagonal_preconditioner(GalerkinSystem(np.array([[0.0, 1.0], [1.0, 1.0]])))
    with pytest.raises(ZeroNorm):
        NormalizationRecord(NormalizationMode.UNIT_L2, 0, np.array([1.0, 0.0]))


def test_load_vector():
    """Test exact, quadrature and extended precision loads."""
    basis = fem_basis(3)
    one = PiecewiseForm.polynomial(0, 1, [1])
    assert np.allclose(load_vector(basis, one), 1 / 8)
    quadrature = load_vector(basis, np.ones_like, QuadraturePolicy.GAUSS)
    assert np.allclose(quadrature, 1 / 8)
    ctx = get_context(30)
    extended = load_vector(basis, one.to_context(ctx), ctx=ctx)
    assert all(abs(value - ctx.mpf(1) / 8) < ctx.mpf(10) ** -25 for value in extended)
    with pytest.raises(MissingIntegralBackend):
        load_vector(basis, np.ones_like)
    with pytest.raises(WaveletSpecError):
        load_vector(basis, PiecewiseForm.polynomial(0, 2, [1]))
    wave = PiecewiseForm.exponential(0, 1, 10, 1, mpmath.fp)
    loads = load_vector(basis, wave)
    assert np.iscomplexobj(loads)


def test_export_matrix(tmp_path):
    """Test Matrix Market export."""
    matrix = gram_matrix(fem_basis(2))
    path = tmp_path / "mass.mtx"
    export_matrix(matrix, path, "hat mass")
    assert np.allclose(scipy.io.mmread(str(path)).toarray(), matrix.toarray())
    with pytest.raises(WaveletException, match="does not exist"):
        export_matrix(matrix, tmp_path / "missing" / "mass.mtx")
    assert not (tmp_path / "missing").exists()
