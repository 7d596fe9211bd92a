"""Exact rational and floating point linear algebra helpers."""

import logging
from fractions import Fraction
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg
import sympy
from sympy.polys.matrices import DomainMatrix

from .const import DENSE_LIMIT, SINGULAR_THRESHOLD
from .exceptions import SingularSystem

_LOGGER = logging.getLogger(__name__)

SparseRow = Dict[int, Fraction]


def _domain(matrix: sympy.MatrixBase) -> DomainMatrix:
    return DomainMatrix.from_Matrix(sympy.Matrix(matrix)).to_field()


def rref(matrix: sympy.MatrixBase) -> Tuple[sympy.Matrix, Tuple[int, ...]]:
    """Return the reduced row echelon form and its pivot columns."""
    matrix = sympy.Matrix(matrix)
    if matrix.rows == 0 or matrix.cols == 0:
        return matrix, ()
    reduced, pivots = _domain(matrix).rref()
    return reduced.to_Matrix(), tuple(pivots)


def row_basis(matrix: sympy.MatrixBase) -> sympy.Matrix:
    """Return the nonzero rows of the reduced row echelon form."""
    reduced, pivots = rref(matrix)
    return reduced[: len(pivots), :]


def rank(matrix: sympy.MatrixBase) -> int:
    """Return the exact rank."""
    return len(rref(matrix)[1])


def nullspace(matrix: sympy.MatrixBase) -> sympy.Matrix:
    """Return a matrix whose columns form a basis of the right nullspace."""
    matrix = sympy.Matrix(matrix)
    reduced, pivots = rref(matrix)
    free = [j for j in range(matrix.cols) if j not in pivots]
    basis = sympy.zeros(matrix.cols, len(free))
    for column, j in enumerate(free):
        basis[j, column] = 1
        for row, p in enumerate(pivots):
            basis[p, column] = -reduced[row, j]
    return basis


def left_nullspace(matrix: sympy.MatrixBase) -> sympy.Matrix:
    """Return a matrix whose rows form a basis of {c : c * matrix = 0}."""
    return nullspace(sympy.Matrix(matrix).T).T


def independent_rows(matrix: sympy.MatrixBase) -> List[int]:
    """Return the earliest rows spanning the row space."""
    matrix = sympy.Matrix(matrix)
    if matrix.rows == 0:
        return []
    return list(rref(matrix.T)[1])


def solve(lhs: sympy.MatrixBase, rhs: sympy.MatrixBase) -> sympy.Matrix:
    """Solve lhs * X = rhs exactly, raising SingularSystem for singular lhs."""
    lhs, rhs = sympy.Matrix(lhs), sympy.Matrix(rhs)
    if lhs.rows != lhs.cols or rank(lhs) < lhs.rows:
        raise SingularSystem(f"singular {lhs.rows}x{lhs.cols} system")
    return (_domain(lhs).inv() * _domain(rhs)).to_Matrix()


def solve_left(lhs: sympy.MatrixBase, rhs: sympy.MatrixBase) -> sympy.Matrix:
    """Solve X * lhs = rhs for a consistent, possibly rectangular system.

    lhs must have full row rank; the solution is then unique.
    """
    lhs, rhs = sympy.Matrix(lhs), sympy.Matrix(rhs)
    if lhs.rows == 0:
        if any(x != 0 for x in rhs):
            raise SingularSystem("inconsistent system against an empty basis")
        return sympy.zeros(rhs.rows, 0)
    _, pivots = rref(lhs.T)
    if len(pivots) < lhs.rows:
        raise SingularSystem("rows are linearly dependent")
    columns = list(rref(lhs)[1])
    solution = solve(lhs[:, columns].T, rhs[:, columns].T).T
    residual = (solution * lhs - rhs).applyfunc(sympy.expand)
    if not residual.is_zero_matrix:
        raise SingularSystem("rows do not lie in the span of the basis")
    return solution


def in_row_space(basis: sympy.MatrixBase, rows: sympy.MatrixBase) -> bool:
    """Whether every row of rows lies in the row space of basis."""
    basis = sympy.Matrix(basis)
    return rank(basis.col_join(sympy.Matrix(rows))) == rank(basis)


def to_fraction(value) -> Fraction:
    """Convert an exact sympy rational to a Fraction."""
    value = sympy.nsimplify(value) if not isinstance(value, sympy.Rational) else value
    if not isinstance(value, sympy.Rational):
        raise SingularSystem(f"expected a rational entry, got {value}")
    return Fraction(int(value.p), int(value.q))


def sparse_rows(matrix: sympy.MatrixBase, columns: Sequence[int]) -> List[SparseRow]:
    """Convert matrix rows to {column label: Fraction} dictionaries."""
    matrix = sympy.Matrix(matrix)
    rows = []
    for i in range(matrix.rows):
        row = {}
        for j, label in enumerate(columns):
            value = matrix[i, j]
            if value != 0:
                row[label] = to_fraction(value)
        rows.append(row)
    return rows


def sparse_combination(rows: Sequence[Mapping[int, Fraction]], weights: Sequence) -> SparseRow:
    """Return sum_i weights[i] * rows[i] for sparse rows."""
    result: SparseRow = {}
    for row, weight in zip(rows, weights):
        if weight == 0:
            continue
        for key, value in row.items():
            result[key] = result.get(key, 0) + weight * value
    return {key: value for key, value in result.items() if value != 0}


def sparse_to_csr(rows: Sequence[Mapping[int, Fraction]], width: int) -> scipy.sparse.csr_matrix:
    """Build a float CSR matrix from sparse exact rows."""
    data, indices, indptr = [], [], [0]
    for row in rows:
        for key in sorted(row):
            indices.append(key)
            data.append(float(row[key]))
        indptr.append(len(indices))
    return scipy.sparse.csr_matrix(
        (np.array(data, dtype=float), np.array(indices, dtype=np.int64), np.array(indptr)),
        shape=(len(rows), width),
    )


def _is_tridiagonal(matrix: np.ndarray) -> bool:
    n = matrix.shape[0]
    if n < 3:
        return False
    return not np.any(np.triu(matrix, 2)) and not np.any(np.tril(matrix, -2))


def extreme_eigenvalues(matrix) -> Tuple[float, float]:
    """Return the smallest and largest eigenvalue of a Hermitian matrix."""
    if scipy.sparse.issparse(matrix) and matrix.shape[0] > DENSE_LIMIT:
        largest = scipy.sparse.linalg.eigsh(matrix, k=1, which="LA", return_eigenvectors=False)
        try:
            smallest = scipy.sparse.linalg.eigsh(
                matrix, k=1, sigma=0, which="LM", return_eigenvectors=False
            )
        except (RuntimeError, scipy.sparse.linalg.ArpackNoConvergence):
            _LOGGER.warning("Shift-invert failed, falling back to the smallest algebraic mode")
            smallest = scipy.sparse.linalg.eigsh(
                matrix, k=1, which="SA", return_eigenvectors=False
            )
        _LOGGER.debug("Sparse extremal eigenvalues of a %d x %d matrix", *matrix.shape)
        return float(smallest[0]), float(largest[0])
    dense = matrix.toarray() if scipy.sparse.issparse(matrix) else np.asarray(matrix)
    if np.isrealobj(dense) and _is_tridiagonal(dense):
        values = scipy.linalg.eigvalsh_tridiagonal(
            np.diag(dense).copy(), np.diag(dense, 1).copy()
        )
    else:
        values = np.linalg.eigvalsh(dense)
    return float(values[0]), float(values[-1])


def extreme_singular_values(matrix) -> Tuple[float, float]:
    """Return the smallest and largest singular value."""
    if scipy.sparse.issparse(matrix) and matrix.shape[0] > DENSE_LIMIT:
        largest = scipy.sparse.linalg.svds(matrix, k=1, which="LM", return_singular_vectors=False)
        gram = (matrix.conj().T @ matrix).tocsc()
        smallest = scipy.sparse.linalg.eigsh(
            gram, k=1, sigma=0, which="LM", return_eigenvectors=False
        )
        return float(np.sqrt(max(smallest[0].real, 0.0))), float(largest[0])
    dense = matrix.toarray() if scipy.sparse.issparse(matrix) else np.asarray(matrix)
    values = np.linalg.svd(dense, compute_uv=False)
    return float(values[-1]), float(values[0])


def is_numerically_singular(smallest: float, largest: float) -> bool:
    """Whether a spectrum indicates a singular matrix."""
    return largest == 0 or smallest <= SINGULAR_THRESHOLD * largest
