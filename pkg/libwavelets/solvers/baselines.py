"""Hat-function finite elements and centered finite differences for Helmholtz."""

import logging
from typing import Callable, List, Optional, Union

import attr
import mpmath
import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from ..assembly import ConditioningReport, GalerkinSystem, conditioning
from ..const import FILTER_CDF22
from ..exceptions import SingularSystem, WaveletSpecError, ZeroNorm
from ..piecewise import PiecewiseForm
from ..refinable import load_generators
from .problems import HelmholtzProblem, SolutionField, SolveResult, relative_L2_error

_LOGGER = logging.getLogger(__name__)

Exact = Union[PiecewiseForm, Callable]


def hat_forms(level: int) -> List[PiecewiseForm]:
    """Return phi(2^N x - n) on [0, 1] for n = 1..2^N; the last one is a half hat."""
    generator, _ = load_generators(FILTER_CDF22)
    hat = generator.piecewise[0]
    return [hat.dilate(level, n).restrict(0, 1) for n in range(1, 2**level + 1)]


def interpolate_hats(values, level: int) -> SolutionField:
    """Return sum_n U(n) phi(2^N x - n), the hat interpolant of grid values at n 2^-N."""
    values = list(values)
    if len(values) != 2**level:
        raise WaveletSpecError(f"{len(values)} grid values for level {level}")
    return SolutionField(tuple(hat_forms(level)), values, mpmath.fp, {"N": level})


def _solve_sparse(matrix: scipy.sparse.spmatrix, rhs: np.ndarray) -> np.ndarray:
    try:
        solution = scipy.sparse.linalg.spsolve(matrix.tocsc(), rhs)
    except RuntimeError as err:
        raise SingularSystem(f"singular baseline system: {err}") from err
    if not np.all(np.isfinite(solution)):
        raise SingularSystem("singular baseline system")
    return solution


def fem_baseline(problem: HelmholtzProblem, finest: int) -> SolveResult:
    """Solve the Helmholtz problem with hats on the uniform grid of step 2^-N.

    The hat at x = 1 is kept, and the radiation condition enters the
    sesquilinear form as -i k u(1) conj(v(1)) with g conj(v(1)) on the right.
    """
    ctx = mpmath.fp
    k = float(problem.k(ctx))
    size = 2**finest
    h = 1.0 / size
    main = np.full(size, 2.0 / h - k * k * 4.0 * h / 6.0, dtype=complex)
    main[-1] = 1.0 / h - k * k * h / 3.0 - 1j * k
    off = np.full(size - 1, -1.0 / h - k * k * h / 6.0, dtype=complex)
    matrix = scipy.sparse.diags([off, main, off], [-1, 0, 1], format="csr")
    forms = hat_forms(finest)
    source = problem.source(ctx)
    rhs = np.array([complex(source.inner(form)) for form in forms])
    rhs[-1] += complex(problem.datum(ctx))
    report = conditioning(matrix)
    solution = _solve_sparse(matrix, rhs)
    field = SolutionField(
        tuple(forms), list(solution), ctx, {"problem": problem.name, "N": finest, "size": size}
    )
    _LOGGER.info("FEM baseline for %s at N = %d: kappa %.4g", problem.name, finest, report.kappa)
    return SolveResult(field, report, GalerkinSystem(matrix, rhs))


@attr.s(frozen=True)
class DifferenceResult:
    """Grid solution of the finite difference baseline with its error measures."""

    level: int = attr.ib()
    grid: np.ndarray = attr.ib(eq=False, repr=False)
    values: np.ndarray = attr.ib(eq=False, repr=False)
    report: ConditioningReport = attr.ib()
    discrete_error: Optional[float] = attr.ib(default=None)
    interpolation_error: Optional[float] = attr.ib(default=None)

    @property
    def size(self) -> int:
        """Return H = 1 / h."""
        return len(self.values)

    def interpolant(self) -> SolutionField:
        """Return the hat interpolant of the grid values."""
        return interpolate_hats(self.values, self.level)


def _exact_values(exact: Exact, x: np.ndarray) -> np.ndarray:
    if isinstance(exact, PiecewiseForm):
        return exact.evaluate(x)
    return np.asarray(exact(x), dtype=complex)


def discrete_error(values, exact: Exact, level: int) -> float:
    """Return 100 (sum |u(nh) - U(n)|^2 / sum |u(nh)|^2)^(1/2), n = 1..1/h."""
    grid = np.arange(1, 2**level + 1) / 2**level
    target = _exact_values(exact, grid)
    norm = np.linalg.norm(target)
    if norm == 0:
        raise ZeroNorm("the reference solution vanishes on the grid")
    return float(100.0 * np.linalg.norm(target - np.asarray(values)) / norm)


def fd_baseline(
    problem: HelmholtzProblem, level: int, exact: Optional[Exact] = None
) -> DifferenceResult:
    """Solve by centered second differences on x_n = n 2^-level.

    The radiation condition u'(1) - i k u(1) = g closes the system through a
    ghost value U(H + 1) = U(H - 1) + 2 h (i k U(H) + g).
    """
    ctx = mpmath.fp
    k = float(problem.k(ctx))
    size = 2**level
    h = 1.0 / size
    grid = np.arange(1, size + 1) * h
    main = np.full(size, 2.0 - (k * h) ** 2, dtype=complex)
    main[-1] = 1.0 - 1j * k * h - (k * h) ** 2 / 2.0
    off = np.full(size - 1, -1.0, dtype=complex)
    matrix = scipy.sparse.diags([off, main, off], [-1, 0, 1], format="csr") / h**2
    rhs = problem.source(ctx).evaluate(grid).astype(complex)
    rhs[-1] = rhs[-1] / 2.0 + complex(problem.datum(ctx)) / h
    report = conditioning(matrix)
    values = _solve_sparse(matrix, rhs)
    result = DifferenceResult(level, grid, values, report)
    if exact is not None:
        result = attr.evolve(
            result,
            discrete_error=discrete_error(values, exact, level),
            interpolation_error=relative_L2_error(result.interpolant(), exact),
        )
    _LOGGER.info("FD baseline for %s with h = 2^-%d: kappa %.4g", problem.name, level, report.kappa)
    return result
