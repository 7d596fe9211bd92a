"""Fast wavelet transform between single-scale and multilevel coefficients."""

import logging
from typing import List

import attr
import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from ..exceptions import TransformDimensionMismatch
from .basis import IntervalBasis

_LOGGER = logging.getLogger(__name__)


@attr.s(frozen=True)
class Multilevel:
    """Coefficients over Phi_J and Psi_J, ..., Psi_N-1."""

    scaling: np.ndarray = attr.ib(eq=False)
    details: List[np.ndarray] = attr.ib(eq=False)

    def flatten(self) -> np.ndarray:
        """Return the coefficients in the element order of the basis."""
        return np.concatenate([self.scaling] + list(self.details))


def _level_matrix(basis: IntervalBasis, level: int) -> scipy.sparse.csc_matrix:
    return basis.memo(("numeric", level), lambda: basis.refinement(level).numeric().tocsc())


def _level_solver(basis: IntervalBasis, level: int):
    return basis.memo(
        ("splu", level), lambda: scipy.sparse.linalg.splu(_level_matrix(basis, level).T.tocsc())
    )


def single_scale_size(basis: IntervalBasis) -> int:
    """Return |Phi_N|."""
    return len(basis.scaling_set(basis.finest))


def fast_transform(basis: IntervalBasis, coefficients) -> Multilevel:
    """Split sum c_k Phi_N,k into scaling and wavelet coefficients.

    Solves [P_j; Q_j]^T [s_j; d_j] = s_j+1 from the finest level down.
    """
    values = np.asarray(coefficients)
    expected = single_scale_size(basis)
    if values.shape != (expected,):
        raise TransformDimensionMismatch(
            f"expected {expected} coefficients at level {basis.finest}, got {values.shape}"
        )
    details = []
    current = values
    for level in range(basis.finest - 1, basis.coarse - 1, -1):
        solver = _level_solver(basis, level)
        if np.iscomplexobj(current):
            split = solver.solve(current.real) + 1j * solver.solve(current.imag)
        else:
            split = solver.solve(current.astype(float))
        size = len(basis.scaling_set(level))
        current, detail = split[:size], split[size:]
        details.append(detail)
    _LOGGER.debug("Transformed %d coefficients over %d levels", expected, len(details))
    return Multilevel(current, details[::-1])


def inverse_transform(basis: IntervalBasis, multilevel: Multilevel) -> np.ndarray:
    """Return s_N from s_J and d_J, ..., d_N-1 by s_j+1 = P_j^T s_j + Q_j^T d_j."""
    if len(multilevel.details) != basis.finest - basis.coarse:
        raise TransformDimensionMismatch(
            f"expected {basis.finest - basis.coarse} detail levels, got {len(multilevel.details)}"
        )
    current = np.asarray(multilevel.scaling)
    for offset, detail in enumerate(multilevel.details):
        level = basis.coarse + offset
        matrix = _level_matrix(basis, level)
        sizes = (len(basis.scaling_set(level)), len(basis.wavelet_set(level)))
        if current.shape != (sizes[0],) or np.shape(detail) != (sizes[1],):
            raise TransformDimensionMismatch(
                f"level {level} expects {sizes[0]} + {sizes[1]} coefficients"
            )
        current = matrix.T @ np.concatenate([current, detail])
    return current


def unflatten(basis: IntervalBasis, values) -> Multilevel:
    """Split a vector in element order into levels."""
    values = np.asarray(values)
    if values.shape != (basis.size,):
        raise TransformDimensionMismatch(f"expected {basis.size} values, got {values.shape}")
    start = len(basis.scaling_set(basis.coarse))
    details = []
    for level in range(basis.coarse, basis.finest):
        stop = start + len(basis.wavelet_set(level))
        details.append(values[start:stop])
        start = stop
    return Multilevel(values[: len(basis.scaling_set(basis.coarse))], details)
