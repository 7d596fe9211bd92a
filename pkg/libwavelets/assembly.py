"""Galerkin matrices, load vectors and condition numbers of interval bases."""

import logging
import math
import pathlib
from typing import Callable, Optional, Sequence, Union

import attr
import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse

from . import linalg
from .const import (
    CONDITION_AGREEMENT,
    DENSE_LIMIT,
    GAUSS_ORDER,
    SVD_DENSE_LIMIT,
    ElementRole,
    NormalizationMode,
    QuadraturePolicy,
)
from .exceptions import (
    MissingIntegralBackend,
    SingularSchurBlock,
    WaveletException,
    WaveletSpecError,
    ZeroDiagonal,
    ZeroNorm,
)
from .interval.basis import IntervalBasis, atom_gram, element_form, gram_table
from .piecewise import PiecewiseForm, gauss_legendre_inner
from .utils import is_double

_LOGGER = logging.getLogger(__name__)

METHOD_SVD = "svd"
METHOD_EIGEN = "eigen"

Matrix = Union[np.ndarray, scipy.sparse.spmatrix]


@attr.s(frozen=True)
class NormalizationRecord:
    """Positive factors d with normalized element n = d[n] * element n."""

    mode: NormalizationMode = attr.ib()
    order: int = attr.ib()
    scales: np.ndarray = attr.ib(eq=False, repr=False)

    @scales.validator
    def _positive(self, _, value):
        if np.any(~(np.asarray(value) > 0)):
            raise ZeroNorm("normalization factors must be positive")


@attr.s(frozen=True)
class ConditioningReport:
    """Condition number with the method that produced it."""

    kappa: float = attr.ib()
    method: str = attr.ib()
    size: int = attr.ib()
    alternative: Optional[float] = attr.ib(default=None)
    kappa_schur: Optional[float] = attr.ib(default=None)
    kappa_block: Optional[float] = attr.ib(default=None)


@attr.s(frozen=True)
class GalerkinSystem:
    """Matrix, optional right-hand side and the scaling applied to the elements."""

    matrix: Matrix = attr.ib(eq=False, repr=False)
    rhs: Optional[np.ndarray] = attr.ib(default=None, eq=False, repr=False)
    normalization: Optional[NormalizationRecord] = attr.ib(default=None)
    preconditioner: Optional[np.ndarray] = attr.ib(default=None, eq=False, repr=False)
    labels: Sequence[str] = attr.ib(factory=tuple, eq=False, repr=False)

    @property
    def size(self) -> int:
        """Return the dimension."""
        return self.matrix.shape[0]

    def recover(self, solution: np.ndarray) -> np.ndarray:
        """Map a solution of the preconditioned system back to element coefficients."""
        if self.preconditioner is None:
            return solution
        return self.preconditioner * solution


def _dense_or_sparse(matrix: Matrix) -> Matrix:
    if scipy.sparse.issparse(matrix) and matrix.shape[0] <= DENSE_LIMIT:
        return matrix.toarray()
    return matrix


def gram_matrix(basis: IntervalBasis, order: int = 0, other: Optional[IntervalBasis] = None):
    """Return [<g_l^(m), h_n^(m)>] for elements g of basis and h of other."""
    other = basis if other is None else other
    level = max(basis.top_level, other.top_level)
    table = gram_table(basis, order, other)
    atoms = atom_gram(table, basis, level, other)
    left = basis.coefficient_matrix(level)
    right = left if other is basis else other.coefficient_matrix(level)
    result = (left @ atoms @ right.conj().T).tocsr()
    _LOGGER.debug("Gram matrix of order %d: %d x %d, %d nonzeros", order, *result.shape, result.nnz)
    return result


def element_norms(basis: IntervalBasis, order: int = 0) -> np.ndarray:
    """Return ||g^(order)|| for every element."""
    level = basis.top_level
    table = gram_table(basis, order)
    coefficients = basis.coefficient_matrix(level)
    product = (coefficients @ atom_gram(table, basis, level)).multiply(coefficients.conj())
    squares = np.asarray(product.sum(axis=1)).ravel().real
    if np.any(squares <= 0):
        raise ZeroNorm(f"an element has vanishing order {order} norm")
    return np.sqrt(squares)


def normalization_record(
    basis: IntervalBasis, mode: NormalizationMode, order: int = 1
) -> NormalizationRecord:
    """Return the factors that give every element unit norm in the chosen sense."""
    if mode is NormalizationMode.NONE:
        return NormalizationRecord(mode, 0, np.ones(basis.size))
    if mode is NormalizationMode.UNIT_L2:
        return NormalizationRecord(mode, 0, 1.0 / element_norms(basis, 0))
    if mode is NormalizationMode.UNIT_DERIVATIVE:
        return NormalizationRecord(mode, order, 1.0 / element_norms(basis, order))
    squares = element_norms(basis, 0) ** 2 + element_norms(basis, 1) ** 2
    return NormalizationRecord(mode, 1, 1.0 / np.sqrt(squares))


def _normalized(matrix: Matrix, scales: np.ndarray) -> Matrix:
    if scipy.sparse.issparse(matrix):
        diagonal = scipy.sparse.diags(scales)
        return (diagonal @ matrix @ diagonal).tocsr()
    return scales[:, None] * matrix * scales[None, :]


def mass_matrix(
    basis: IntervalBasis, mode: NormalizationMode = NormalizationMode.UNIT_L2
) -> GalerkinSystem:
    """Return the normalized [<g_l, g_n>]."""
    record = normalization_record(basis, mode)
    matrix = _normalized(gram_matrix(basis, 0), record.scales)
    return GalerkinSystem(_dense_or_sparse(matrix), normalization=record)


def stiffness_matrix(
    basis: IntervalBasis,
    order: int = 1,
    mode: NormalizationMode = NormalizationMode.UNIT_DERIVATIVE,
) -> GalerkinSystem:
    """Return the normalized [<g_l^(m), g_n^(m)>]."""
    record = normalization_record(basis, mode, order)
    matrix = _normalized(gram_matrix(basis, order), record.scales)
    return GalerkinSystem(_dense_or_sparse(matrix), normalization=record)


def _atom_forms(basis: IntervalBasis, level: int):
    if basis.generator.piecewise is None:
        raise MissingIntegralBackend(f"{basis.name} has no closed-form generator")
    space = basis.space
    first, last = space.bounds(level)
    for k in range(first, last + 1):
        for form in basis.generator.piecewise:
            yield form.dilate(level, k).restrict(0, basis.length)


def load_vector(
    basis: IntervalBasis,
    source: Union[PiecewiseForm, Callable],
    policy: QuadraturePolicy = QuadraturePolicy.EXACT,
    ctx=None,
) -> Union[np.ndarray, list]:
    """Return [<f, g_l>] for every element.

    The exact policy integrates closed forms; the Gauss policy applies a
    composite Gauss-Legendre rule on pieces aligned with both supports. With a
    numeric context other than double the values stay in that context.
    """
    if policy is QuadraturePolicy.EXACT and not isinstance(source, PiecewiseForm):
        raise MissingIntegralBackend("exact integration needs a closed-form source")
    if isinstance(source, PiecewiseForm):
        support = source.support()
        if support is not None and (support[0] < 0 or support[1] > basis.length):
            raise WaveletSpecError(f"source extends beyond [0, {basis.length}]")
    if ctx is not None and not is_double(ctx):
        if policy is not QuadraturePolicy.EXACT:
            raise WaveletSpecError("extended precision loads need the exact policy")
        return [source.inner(element_form(basis, e, 0, ctx)) for e in basis.elements]
    level = basis.top_level
    values = []
    for atom in _atom_forms(basis, level):
        if policy is QuadraturePolicy.EXACT:
            values.append(complex(source.inner(atom)))
        else:
            function = source.evaluate if isinstance(source, PiecewiseForm) else source
            points = source.breakpoints if isinstance(source, PiecewiseForm) else None
            values.append(np.conj(gauss_legendre_inner(atom, function, GAUSS_ORDER, points)))
    loads = basis.coefficient_matrix(level).conj() @ np.array(values)
    _LOGGER.debug("Load vector of %d entries by %s", len(loads), policy.value)
    return loads if np.any(np.imag(loads)) else np.real(loads)


def _is_hermitian(matrix: Matrix) -> bool:
    if scipy.sparse.issparse(matrix):
        difference = matrix - matrix.conj().T
        return difference.nnz == 0 or abs(difference).max() <= 1e-12 * abs(matrix).max()
    return bool(np.allclose(matrix, np.conj(matrix.T), rtol=0, atol=1e-12 * np.abs(matrix).max()))


def _ratio(smallest: float, largest: float) -> float:
    if linalg.is_numerically_singular(smallest, largest):
        return math.inf
    return largest / smallest


def conditioning(matrix: Matrix) -> ConditioningReport:
    """Return the condition number by singular values and, for Hermitian input, eigenvalues."""
    size = matrix.shape[0]
    values = matrix.data if scipy.sparse.issparse(matrix) else np.asarray(matrix)
    if size == 0 or not np.any(values):
        raise WaveletSpecError("condition number of an empty or zero matrix")
    hermitian = _is_hermitian(matrix)
    eigen = None
    if hermitian:
        smallest, largest = linalg.extreme_eigenvalues(matrix)
        eigen = _ratio(smallest, largest) if smallest > 0 else None
    if size <= SVD_DENSE_LIMIT or eigen is None:
        kappa = _ratio(*linalg.extreme_singular_values(matrix))
        if eigen is not None and math.isfinite(kappa):
            if abs(eigen - kappa) > CONDITION_AGREEMENT * kappa:
                _LOGGER.warning("Singular value and eigenvalue ratios differ: %.6g, %.6g", kappa, eigen)
                return ConditioningReport(kappa, METHOD_SVD, size, eigen)
        return ConditioningReport(kappa, METHOD_SVD, size)
    _LOGGER.debug("Eigenvalue ratio of a %d x %d Hermitian matrix", size, size)
    return ConditioningReport(eigen, METHOD_EIGEN, size)


def condition_number(matrix: Matrix) -> float:
    """Return sigma_max / sigma_min, inf for a numerically singular matrix."""
    return conditioning(matrix).kappa


def schur_condition(matrix: Matrix, block: int) -> ConditioningReport:
    """Return kappa of A1 - A2 A4^-1 A3 for the trailing block A4 of size block."""
    dense = matrix.toarray() if scipy.sparse.issparse(matrix) else np.asarray(matrix)
    size = dense.shape[0]
    if not 0 < block < size:
        raise WaveletSpecError(f"block size {block} outside 1..{size - 1}")
    split = size - block
    a1, a2 = dense[:split, :split], dense[:split, split:]
    a3, a4 = dense[split:, :split], dense[split:, split:]
    kappa_block = condition_number(a4)
    if not math.isfinite(kappa_block):
        raise SingularSchurBlock(f"the trailing {block} x {block} block is singular")
    schur = a1 - a2 @ scipy.linalg.solve(a4, a3)
    report = conditioning(dense)
    return attr.evolve(
        report, kappa_schur=condition_number(schur), kappa_block=kappa_block
    )


def apply_diagonal_preconditioner(system: GalerkinSystem) -> GalerkinSystem:
    """Return D^-1/2 A D^-1/2 with D = |diag A|; the rhs is scaled alike."""
    matrix = system.matrix
    diagonal = np.abs(matrix.diagonal())
    if np.any(diagonal == 0):
        raise ZeroDiagonal(f"zero diagonal entry at {int(np.argmin(diagonal))}")
    scales = 1.0 / np.sqrt(diagonal)
    rhs = None if system.rhs is None else scales * system.rhs
    previous = system.preconditioner if system.preconditioner is not None else 1.0
    return attr.evolve(
        system,
        matrix=_normalized(matrix, scales),
        rhs=rhs,
        preconditioner=previous * scales,
    )


def level_blocks_vanish(matrix: Matrix, basis: IntervalBasis, tolerance: float = 1e-12) -> bool:
    """Whether entries between elements of different levels vanish."""
    dense = matrix.toarray() if scipy.sparse.issparse(matrix) else np.asarray(matrix)
    levels = np.array([e.level for e in basis.elements])
    cross = levels[:, None] != levels[None, :]
    return bool(np.all(np.abs(dense[cross]) <= tolerance))


def export_matrix(matrix: Matrix, path, comment: str = "") -> None:
    """Write a matrix in Matrix Market coordinate format."""
    path = pathlib.Path(path)
    if not path.parent.is_dir():
        raise WaveletException(f"cannot write {path}: directory {path.parent} does not exist")
    sparse = matrix if scipy.sparse.issparse(matrix) else scipy.sparse.coo_matrix(matrix)
    try:
        scipy.io.mmwrite(str(path), sparse, comment=comment)
    except (OSError, ValueError) as err:
        raise WaveletException(f"cannot write {path}: {err}") from err


@attr.s(frozen=True)
class VerificationReport:
    """Residuals of the structural properties of an assembled basis."""

    name: str = attr.ib()
    size: int = attr.ib()
    coarse: int = attr.ib()
    finest: int = attr.ib()
    biorthogonality: Optional[float] = attr.ib(default=None)
    endpoint: Optional[float] = attr.ib(default=None)
    moments: Optional[float] = attr.ib(default=None)
    moment_order: int = attr.ib(default=0)
    block_diagonal: Optional[bool] = attr.ib(default=None)

    def passed(self, tolerance: float = 1e-10) -> bool:
        """Whether every computed residual is below the tolerance."""
        residuals = [self.biorthogonality, self.endpoint, self.moments]
        return all(r is None or r <= tolerance for r in residuals) and self.block_diagonal is not False

    def as_raw(self) -> dict:
        """Return a JSON-ready dict."""
        return {
            "basis": self.name,
            "size": self.size,
            "levels": [self.coarse, self.finest],
            "biorthogonality_residual": self.biorthogonality,
            "endpoint_residual": self.endpoint,
            "moment_residual": self.moments,
            "vanishing_moments_checked": self.moment_order,
            "stiffness_block_diagonal": self.block_diagonal,
        }


def _endpoint_residual(basis: IntervalBasis, derivatives: int) -> float:
    worst = 0.0
    for element in basis.elements:
        for order in range(derivatives):
            form = element_form(basis, element, order)
            worst = max(
                worst,
                abs(float(form.value_at(0, "right"))),
                abs(float(form.value_at(basis.length, "left"))),
            )
    return worst


def _moment_residual(basis: IntervalBasis, moments: int) -> float:
    monomials = [
        PiecewiseForm.polynomial(0, basis.length, [0] * q + [1]) for q in range(moments)
    ]
    worst = 0.0
    for element in basis.elements:
        if element.role is not ElementRole.WAVELET:
            continue
        form = element_form(basis, element, 0)
        for monomial in monomials:
            worst = max(worst, abs(float(form.inner(monomial))))
    return worst


def verify_basis(
    basis: IntervalBasis,
    dual: Optional[IntervalBasis] = None,
    moments: int = 2,
    stiffness_order: Optional[int] = None,
    derivatives: int = 1,
) -> VerificationReport:
    """Check biorthogonality, boundary values, vanishing moments and stiffness blocks.

    The endpoint and moment residuals come from exact closed forms and are
    skipped for generators without them.
    """
    biorthogonality = None
    if dual is not None:
        if (dual.coarse, dual.finest) != (basis.coarse, basis.finest):
            raise WaveletSpecError("primal and dual bases cover different levels")
        gram = gram_matrix(basis, 0, dual)
        dense = gram.toarray() if scipy.sparse.issparse(gram) else np.asarray(gram)
        biorthogonality = float(np.max(np.abs(dense - np.eye(basis.size))))
    endpoint = moment = None
    if basis.generator.piecewise is not None:
        endpoint = _endpoint_residual(basis, derivatives)
        if moments:
            moment = _moment_residual(basis, moments)
    block_diagonal = None
    if stiffness_order is not None:
        system = stiffness_matrix(basis, stiffness_order, NormalizationMode.UNIT_DERIVATIVE)
        block_diagonal = level_blocks_vanish(system.matrix, basis, 1e-10)
    report = VerificationReport(
        basis.name, basis.size, basis.coarse, basis.finest,
        biorthogonality, endpoint, moment, moments if moment is not None else 0, block_diagonal,
    )
    _LOGGER.info("Verified %s: %s", basis.name, report)
    return report
