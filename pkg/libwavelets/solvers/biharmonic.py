"""Biharmonic solver on the derivative-orthogonal Hermite wavelet basis."""

import logging
from typing import Optional

import mpmath
import numpy as np
import scipy.linalg
import scipy.sparse

from ..assembly import GalerkinSystem, conditioning, load_vector, stiffness_matrix
from ..const import NormalizationMode, QuadraturePolicy
from ..interval.basis import IntervalBasis, element_form, hermite_biharmonic_basis
from .problems import BiharmonicProblem, SolutionField, SolveResult

_LOGGER = logging.getLogger(__name__)

IDENTITY_TOLERANCE = 1e-10


def identity_deviation(matrix) -> float:
    """Return the largest absolute row sum of matrix - I."""
    dense = matrix.toarray() if scipy.sparse.issparse(matrix) else np.asarray(matrix)
    return float(np.max(np.sum(np.abs(dense - np.eye(dense.shape[0])), axis=1)))


def solve_biharmonic(
    problem: BiharmonicProblem,
    finest: int,
    ctx=mpmath.fp,
    basis: Optional[IntervalBasis] = None,
) -> SolveResult:
    """Solve u'''' = f with clamped ends on B_{1,N}.

    With every element scaled to ||g''|| = 1 the stiffness matrix is the
    identity, so the coefficients are the normalized loads <f, g_l>.
    """
    basis = basis or hermite_biharmonic_basis(finest)
    system = stiffness_matrix(basis, 2, NormalizationMode.UNIT_DERIVATIVE)
    scales = system.normalization.scales
    loads = load_vector(basis, problem.source(ctx), QuadraturePolicy.EXACT, ctx)
    rhs = np.array([complex(x) for x in loads]) * scales
    deviation = identity_deviation(system.matrix)
    if deviation <= IDENTITY_TOLERANCE:
        coefficients = rhs
    else:
        _LOGGER.warning("Stiffness matrix deviates from I by %.3e, solving instead", deviation)
        dense = system.matrix.toarray() if scipy.sparse.issparse(system.matrix) else system.matrix
        coefficients = scipy.linalg.solve(dense, rhs, assume_a="pos")
    report = conditioning(system.matrix)
    field = SolutionField(
        tuple(element_form(basis, e, 0) for e in basis.elements),
        list(coefficients * scales),
        mpmath.fp,
        {"problem": problem.name, "N": finest, "size": basis.size},
    )
    _LOGGER.info(
        "Solved %s at N = %d with %d elements, kappa %.6g",
        problem.name, finest, basis.size, report.kappa,
    )
    return SolveResult(field, report, GalerkinSystem(system.matrix, rhs, system.normalization))
