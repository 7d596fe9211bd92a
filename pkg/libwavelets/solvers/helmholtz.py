"""Helmholtz solver on a Dirichlet wavelet basis enriched by special waves."""

import logging
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import attr
import mpmath
import numpy as np
import scipy.linalg

from ..assembly import (
    GalerkinSystem,
    apply_diagonal_preconditioner,
    conditioning,
    schur_condition,
)
from ..const import BASIS_CDF22_DIRICHLET, ElementRole, ElementSide
from ..exceptions import SingularSystem, WaveletSpecError, ZeroNorm
from ..interval.basis import BasisSpec, IntervalBasis, assemble_basis, element_form
from ..piecewise import Piece, PiecewiseForm, Term, linear_combination
from ..utils import get_context, is_double
from .problems import HelmholtzProblem, SolutionField, SolveResult

_LOGGER = logging.getLogger(__name__)

DIRICHLET_COARSE = 2


def _unit(ctx):
    return ctx.mpc(0, 1)


@attr.s(frozen=True)
class TrialFunction:
    """A closed-form trial function with its derivative."""

    label: str = attr.ib()
    value: PiecewiseForm = attr.ib(eq=False, repr=False)
    slope: PiecewiseForm = attr.ib(eq=False, repr=False)

    def at_right(self, length=1):
        """Return g(L) and g'(L) from the left."""
        return self.value.value_at(length, "left"), self.slope.value_at(length, "left")

    def support(self) -> Optional[Tuple[Fraction, Fraction]]:
        """Return the support hull."""
        return self.value.support()

    def scale(self, factor) -> "TrialFunction":
        """Return factor * g."""
        return TrialFunction(self.label, self.value.scale(factor), self.slope.scale(factor))


def _combine(functions: Sequence[TrialFunction], weights, label: str, ctx) -> TrialFunction:
    return TrialFunction(
        label,
        linear_combination([f.value for f in functions], weights, ctx),
        linear_combination([f.slope for f in functions], weights, ctx),
    )


@attr.s(frozen=True)
class SpecialWave:
    """s(x) = exp(sign i k x) - (lambda1 + lambda2 x) on one partition piece."""

    sign: int = attr.ib()
    piece: int = attr.ib()
    lo: Fraction = attr.ib()
    hi: Fraction = attr.ib()
    lambda1: complex = attr.ib(eq=False)
    lambda2: complex = attr.ib(eq=False)
    wave_number: object = attr.ib(eq=False, repr=False)
    ctx: object = attr.ib(default=mpmath.fp, eq=False, repr=False)

    @property
    def label(self) -> str:
        """Return a short name."""
        return f"wave{'+' if self.sign > 0 else '-'}{self.piece}"

    def trial_function(self) -> TrialFunction:
        """Return the wave with its derivative as closed forms."""
        ctx = self.ctx
        omega = self.sign * self.wave_number
        line = PiecewiseForm.polynomial(self.lo, self.hi, [self.lambda1, self.lambda2], ctx)
        value = PiecewiseForm.exponential(self.lo, self.hi, omega, 1, ctx) - line
        slope = PiecewiseForm.exponential(self.lo, self.hi, omega, _unit(ctx) * omega, ctx)
        slope = slope - PiecewiseForm.polynomial(self.lo, self.hi, [self.lambda2], ctx)
        return TrialFunction(self.label, value, slope)

    def residuals(self, last: bool) -> Tuple[object, object]:
        """Return the two defining conditions evaluated on the wave."""
        function = self.trial_function()
        start = function.value.value_at(self.lo, "right")
        if not last:
            return start, function.value.value_at(self.hi, "left")
        value, slope = function.at_right(self.hi)
        return start, slope - _unit(self.ctx) * self.wave_number * value


def _wave_coefficients(k, sign: int, lo, hi, last: bool, ctx) -> Tuple[object, object]:
    """Solve for (lambda1, lambda2) of one wave."""
    omega = sign * k
    ik = _unit(ctx) * k
    start = ctx.expj(omega * lo)
    if not last:
        stop = ctx.expj(omega * hi)
        lambda2 = (stop - start) / (hi - lo)
        return start - lambda2 * lo, lambda2
    # lambda1 + lo lambda2 = e(lo);  ik lambda1 + (ik - 1) lambda2 = ik (1 - sign) e(1)
    rhs = ik * (1 - sign) * ctx.expj(omega)
    determinant = (ik - 1) - ik * lo
    lambda1 = (start * (ik - 1) - lo * rhs) / determinant
    lambda2 = (rhs - ik * start) / determinant
    return lambda1, lambda2


def build_special_waves(problem: HelmholtzProblem, ctx=mpmath.fp) -> List[SpecialWave]:
    """Return s+ and s- for every partition piece, 2M waves in piece order."""
    k = problem.k(ctx)
    waves = []
    last_index = problem.pieces - 1
    for index, (lo, hi) in enumerate(problem.partition):
        last = index == last_index
        a = ctx.mpf(lo.numerator) / lo.denominator
        b = ctx.mpf(hi.numerator) / hi.denominator
        for sign in (1, -1):
            lambda1, lambda2 = _wave_coefficients(k, sign, a, b, last, ctx)
            waves.append(SpecialWave(sign, index, lo, hi, lambda1, lambda2, k, ctx))
    _LOGGER.debug("Built %d special waves for %d pieces", len(waves), problem.pieces)
    return waves


@attr.s(frozen=True)
class Recombination:
    """Mixing of the right boundary wavelets of a level before and after the modification."""

    pre: Optional[Tuple[Tuple[object, ...], ...]] = attr.ib(default=None)
    post: Optional[Tuple[Tuple[object, ...], ...]] = attr.ib(default=None)

    @classmethod
    def from_raw(cls, raw: Optional[dict]) -> "Recombination":
        """Parse {"pre": [[...]], "post": [[...]]}; missing matrices are identities."""
        if not raw:
            return cls()

        def matrix(key):
            value = raw.get(key)
            if value is None:
                return None
            rows = tuple(tuple(complex(x) if isinstance(x, str) else x for x in row) for row in value)
            if any(len(row) != len(rows) for row in rows):
                raise WaveletSpecError(f"recombination {key!r} must be square")
            return rows

        return cls(matrix("pre"), matrix("post"))

    @staticmethod
    def _apply(matrix, functions: List[TrialFunction], ctx) -> List[TrialFunction]:
        if matrix is None:
            return functions
        if len(matrix) != len(functions):
            raise WaveletSpecError(
                f"recombination of size {len(matrix)} for {len(functions)} boundary wavelets"
            )
        return [
            _combine(functions, list(row), functions[n].label, ctx) for n, row in enumerate(matrix)
        ]

    def before(self, functions: List[TrialFunction], ctx) -> List[TrialFunction]:
        """Mix the original boundary wavelets."""
        return self._apply(self.pre, functions, ctx)

    def after(self, functions: List[TrialFunction], ctx) -> List[TrialFunction]:
        """Mix the modified boundary wavelets."""
        return self._apply(self.post, functions, ctx)


@attr.s(frozen=True)
class Correction:
    """Linear function lambda1 + lambda2 x subtracted on [lo, L]."""

    lo: Fraction = attr.ib()
    lambda1: object = attr.ib(eq=False)
    lambda2: object = attr.ib(eq=False)


@attr.s(frozen=True)
class ModifiedBasis:
    """Trial functions of an interval basis whose right elements obey the radiation condition."""

    basis: IntervalBasis = attr.ib(repr=False)
    wave_number: object = attr.ib(eq=False)
    functions: Tuple[TrialFunction, ...] = attr.ib(eq=False, repr=False)
    corrections: Tuple[Tuple[int, Correction], ...] = attr.ib(eq=False)
    ctx: object = attr.ib(default=mpmath.fp, eq=False, repr=False)

    @property
    def modified(self) -> Tuple[int, ...]:
        """Return the ids of the modified elements."""
        return tuple(index for index, _ in self.corrections)

    def radiation_residual(self, index: int):
        """Return g'(L) - i k g(L) of one trial function."""
        value, slope = self.functions[index].at_right(self.basis.length)
        return slope - _unit(self.ctx) * self.wave_number * value


def _trial_function(basis: IntervalBasis, index: int, ctx) -> TrialFunction:
    element = basis.elements[index]
    return TrialFunction(
        f"{element.role.value}-{element.side.value}-{element.level}-{element.position}"
        f"-{element.component}",
        element_form(basis, element, 0, ctx),
        element_form(basis, element, 1, ctx),
    )


def _needs_correction(function: TrialFunction, length) -> bool:
    value, slope = function.at_right(length)
    return value != 0 or slope != 0


def _correct(function: TrialFunction, k, length, ctx) -> Tuple[TrialFunction, Correction]:
    """Subtract the line with g(l_g) = 0 and g'(L) - i k g(L) = 0 after the change."""
    lo = function.support()[0]
    ik = _unit(ctx) * k
    a = ctx.mpf(lo.numerator) / lo.denominator
    start = function.value.value_at(lo, "right")
    value, slope = function.at_right(length)
    rhs = ik * value - slope
    determinant = (ik * length - 1) - ik * a
    if determinant == 0:
        raise SingularSystem(f"no linear correction for {function.label}")
    lambda1 = (start * (ik * length - 1) - a * rhs) / determinant
    lambda2 = (rhs - ik * start) / determinant
    hi = Fraction(length)
    line = PiecewiseForm.polynomial(lo, hi, [lambda1, lambda2], ctx)
    corrected = TrialFunction(
        function.label + "*",
        function.value - line,
        function.slope - PiecewiseForm.polynomial(lo, hi, [lambda2], ctx),
    )
    return corrected, Correction(lo, lambda1, lambda2)


def modify_right_boundary(
    basis: IntervalBasis,
    k,
    recombination: Optional[Recombination] = None,
    ctx=mpmath.fp,
) -> ModifiedBasis:
    """Make every right boundary element satisfy g'(L) - i k g(L) = 0.

    Right elements already satisfying the condition pass through unchanged.
    The others g are replaced by g - (lambda1 + lambda2 x) on supp g = [l_g, L]
    with the line chosen so that the result still vanishes at l_g.
    """
    recombination = recombination or Recombination()
    length = basis.length
    functions = [_trial_function(basis, e.index, ctx) for e in basis.elements]
    corrections = []
    groups = {}
    for element in basis.elements:
        if element.side is ElementSide.RIGHT:
            groups.setdefault((element.role, element.level), []).append(element.index)
    for (role, level), indices in sorted(groups.items(), key=lambda item: item[0][1]):
        members = [functions[i] for i in indices]
        if role is ElementRole.WAVELET:
            members = recombination.before(members, ctx)
        changed = []
        for index, function in zip(indices, members):
            if _needs_correction(function, length):
                function, correction = _correct(function, k, length, ctx)
                corrections.append((index, correction))
            changed.append(function)
        if role is ElementRole.WAVELET:
            changed = recombination.after(changed, ctx)
        for index, function in zip(indices, changed):
            functions[index] = function
    _LOGGER.debug("Modified %d right boundary elements of %s", len(corrections), basis.name)
    return ModifiedBasis(basis, k, tuple(functions), tuple(corrections), ctx)


def dirichlet_basis(finest: int, spec: Optional[BasisSpec] = None) -> IntervalBasis:
    """Return B_{2,N} of the Dirichlet CDF basis."""
    spec = spec or BasisSpec.from_fixture(BASIS_CDF22_DIRICHLET)
    return assemble_basis(spec, DIRICHLET_COARSE, finest)


def _normalize(functions: Sequence[TrialFunction], ctx) -> List[TrialFunction]:
    result = []
    for function in functions:
        norm = function.slope.norm()
        if norm == 0:
            raise ZeroNorm(f"{function.label} has a vanishing derivative")
        result.append(function.scale(1 / norm))
    return result


def _overlap(first: TrialFunction, second: TrialFunction) -> bool:
    a, b = first.support(), second.support()
    return a is not None and b is not None and a[0] < b[1] and b[0] < a[1]


def sesquilinear_matrix(functions: Sequence[TrialFunction], k, ctx, length=1) -> list:
    """Return [<g_n', g_l'> - k^2 <g_n, g_l> - g_n'(L) conj(g_l(L))] in ctx, rows l."""
    size = len(functions)
    ends = [f.at_right(length) for f in functions]
    zero = ctx.mpc(0, 0)
    matrix = [[zero] * size for _ in range(size)]
    k2 = k * k
    for l in range(size):
        for n in range(l, size):
            if not _overlap(functions[l], functions[n]):
                continue
            first, second = functions[n], functions[l]
            entry = first.slope.inner(second.slope) - k2 * first.value.inner(second.value)
            matrix[l][n] = entry
            if n != l:
                matrix[n][l] = ctx.conj(entry)
    for l in range(size):
        value = ends[l][0]
        if value == 0:
            continue
        for n in range(size):
            matrix[l][n] -= ends[n][1] * ctx.conj(value)
    return matrix


def _solve(matrix: list, rhs: list, ctx) -> list:
    if is_double(ctx):
        try:
            return list(scipy.linalg.solve(np.array(matrix, dtype=complex), np.array(rhs)))
        except (np.linalg.LinAlgError, ValueError) as err:
            raise SingularSystem(f"Helmholtz system is singular: {err}") from err
    try:
        solution = ctx.lu_solve(ctx.matrix(matrix), ctx.matrix(rhs))
    except ZeroDivisionError as err:
        raise SingularSystem("Helmholtz system is singular") from err
    return [solution[i] for i in range(len(rhs))]


def solve_helmholtz(
    problem: HelmholtzProblem,
    finest: int,
    enrich: bool = True,
    ctx=None,
    basis: Optional[IntervalBasis] = None,
    recombination: Optional[Recombination] = None,
    precondition: bool = True,
) -> SolveResult:
    """Solve the Helmholtz problem on B_{2,N}, optionally enriched by special waves.

    Trial functions are scaled to unit derivative norm. The system is solved
    in ctx (double by default, or the problem's precision); condition numbers
    are always computed in double precision on the preconditioned matrix.
    """
    if problem.radiation != 0:
        raise WaveletSpecError("the wavelet solver needs a homogeneous radiation condition")
    ctx = ctx or get_context(problem.precision)
    basis = basis or dirichlet_basis(finest)
    k = problem.k(ctx)
    modified = modify_right_boundary(basis, k, recombination, ctx)
    functions = list(modified.functions)
    waves = build_special_waves(problem, ctx) if enrich else []
    functions.extend(wave.trial_function() for wave in waves)
    functions = _normalize(functions, ctx)
    matrix = sesquilinear_matrix(functions, k, ctx, basis.length)
    source = problem.source(ctx)
    rhs = [source.inner(f.value) for f in functions]
    numeric = GalerkinSystem(
        np.array(matrix, dtype=complex),
        np.array(rhs, dtype=complex),
        labels=tuple(f.label for f in functions),
    )
    if precondition:
        numeric = apply_diagonal_preconditioner(numeric)
        scales = [float(s) for s in numeric.preconditioner]
        matrix = [
            [scales[l] * scales[n] * matrix[l][n] for n in range(len(rhs))] for l in range(len(rhs))
        ]
        rhs = [scales[l] * rhs[l] for l in range(len(rhs))]
    if enrich:
        report = schur_condition(numeric.matrix, len(waves))
    else:
        report = conditioning(numeric.matrix)
    if not np.isfinite(report.kappa):
        raise SingularSystem(f"Helmholtz system at N = {finest} is numerically singular")
    solution = _solve(matrix, rhs, ctx)
    if precondition:
        solution = [scales[i] * x for i, x in enumerate(solution)]
    field = SolutionField(
        tuple(f.value for f in functions),
        solution,
        ctx,
        {
            "problem": problem.name,
            "N": finest,
            "M": problem.pieces if enrich else 0,
            "enriched": enrich,
            "size": len(functions),
            "basis_size": basis.size,
        },
    )
    _LOGGER.info(
        "Solved %s at N = %d (%s): kappa %.4g", problem.name, finest,
        "enriched" if enrich else "wavelet only", report.kappa,
    )
    return SolveResult(field, report, numeric)


def _particular(coeffs: Sequence, k, ctx) -> list:
    """Coefficients of -sum_m (-1)^m p^(2m) / k^(2m + 2), a solution of -u'' - k^2 u = p."""
    result = [ctx.mpc(0, 0)] * len(coeffs)
    current = list(coeffs)
    factor = -1 / (k * k)
    while any(c != 0 for c in current):
        for n, c in enumerate(current):
            result[n] += factor * c
        current = [n * (n - 1) * current[n] for n in range(2, len(current))]
        factor = -factor / (k * k)
    return result


def _source_pieces(source: PiecewiseForm) -> List[Tuple[Fraction, Fraction, list]]:
    """Split [0, 1] at the breakpoints of f; local polynomial of f on each piece."""
    points = sorted({Fraction(0), Fraction(1), *source.breakpoints})
    refined = source.refine(points)
    polynomials = {}
    for piece in refined.pieces:
        for term in piece.terms:
            if term.omega != 0:
                raise WaveletSpecError("the transmission oracle needs a piecewise polynomial source")
            polynomials[piece.lo] = list(term.coeffs)
    return [(lo, hi, polynomials.get(lo, [])) for lo, hi in zip(points, points[1:])]


def _poly_value(coeffs: Sequence, t):
    total = 0
    for c in reversed(coeffs):
        total = total * t + c
    return total


def _poly_slope(coeffs: Sequence, t):
    return _poly_value([n * c for n, c in enumerate(coeffs)][1:], t)


def transmission_solution(problem: HelmholtzProblem, ctx=None) -> PiecewiseForm:
    """Return the exact solution for a piecewise polynomial source.

    On each piece u = A e^(ikt) + B e^(-ikt) + p(t) with t the local variable;
    u and u' match at the breakpoints, u(0) = 0 and u'(1) - i k u(1) = g.
    """
    ctx = ctx or get_context(problem.precision)
    k = problem.k(ctx)
    ik = _unit(ctx) * k
    pieces = _source_pieces(problem.source(ctx))
    size = 2 * len(pieces)
    system = ctx.matrix(size, size)
    rhs = ctx.matrix(size, 1)
    particular = [_particular(coeffs, k, ctx) for _, _, coeffs in pieces]
    widths = [ctx.mpf((hi - lo).numerator) / (hi - lo).denominator for lo, hi, _ in pieces]
    system[0, 0], system[0, 1] = 1, 1
    rhs[0] = -_poly_value(particular[0], 0)
    row = 1
    for p in range(len(pieces) - 1):
        width, poly, following = widths[p], particular[p], particular[p + 1]
        plus, minus = ctx.expj(k * width), ctx.expj(-k * width)
        system[row, 2 * p], system[row, 2 * p + 1] = plus, minus
        system[row, 2 * p + 2], system[row, 2 * p + 3] = -1, -1
        rhs[row] = _poly_value(following, 0) - _poly_value(poly, width)
        system[row + 1, 2 * p], system[row + 1, 2 * p + 1] = ik * plus, -ik * minus
        system[row + 1, 2 * p + 2], system[row + 1, 2 * p + 3] = -ik, ik
        rhs[row + 1] = _poly_slope(following, 0) - _poly_slope(poly, width)
        row += 2
    last, width, poly = len(pieces) - 1, widths[-1], particular[-1]
    plus, minus = ctx.expj(k * width), ctx.expj(-k * width)
    # u'(1) - ik u(1): the e^(ikt) part cancels.
    system[row, 2 * last + 1] = -2 * ik * minus
    rhs[row] = problem.datum(ctx) - _poly_slope(poly, width) + ik * _poly_value(poly, width)
    try:
        amplitudes = ctx.lu_solve(system, rhs)
    except ZeroDivisionError as err:
        raise SingularSystem("transmission system is singular") from err
    result = []
    for p, (lo, hi, _) in enumerate(pieces):
        terms = [Term((amplitudes[2 * p],), k), Term((amplitudes[2 * p + 1],), -k)]
        coeffs = tuple(particular[p])
        if any(c != 0 for c in coeffs):
            terms.append(Term(coeffs, 0))
        result.append(Piece(lo, hi, tuple(terms)))
    _LOGGER.debug("Transmission solution over %d pieces", len(pieces))
    return PiecewiseForm(tuple(result), ctx)
