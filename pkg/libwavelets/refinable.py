"""Refinable vector functions, dyadic evaluation and exact Gram integrals."""

import csv
import io
import logging
from fractions import Fraction
from math import comb, factorial
from typing import Dict, List, Optional, Sequence, Tuple

import attr
import numpy as np
import sympy

from . import linalg
from .const import (
    DYADIC_LEVEL,
    STABILITY_MARGIN,
    STABILITY_SAMPLES,
    Family,
)
from .exceptions import (
    DegenerateGenerator,
    GramSystemSingular,
    NormalizationNotUnique,
    NotPositiveDefinite,
    SmoothnessOrderError,
    WaveletSpecError,
)
from .filters import FilterBank, GramSymbol, MomentData, refinable_moments, reproduction_coefficients
from .piecewise import PiecewiseForm
from .utils import read_json

_LOGGER = logging.getLogger(__name__)

METHOD_REFINEMENT = "refinement"
METHOD_PIECEWISE = "piecewise"


@attr.s(frozen=True, repr=False)
class RefinableVector:
    """phi = 2 sum_k a(k) phi(2. - k), optionally with closed-form pieces."""

    filter: FilterBank = attr.ib()
    moments: MomentData = attr.ib()
    piecewise: Optional[Tuple[PiecewiseForm, ...]] = attr.ib(default=None)

    def __repr__(self) -> str:
        """Return a short description."""
        return f"RefinableVector(support={self.support}, r={self.multiplicity})"

    @classmethod
    def from_filter(
        cls, a: FilterBank, piecewise: Optional[Sequence[PiecewiseForm]] = None
    ) -> "RefinableVector":
        """Build the generator of a filter."""
        if piecewise is not None and len(piecewise) != a.rows:
            raise WaveletSpecError(f"{len(piecewise)} piecewise components for r = {a.rows}")
        return cls(a, refinable_moments(a), tuple(piecewise) if piecewise is not None else None)

    @classmethod
    def from_raw(cls, raw: dict, family: Family = Family.PRIMAL) -> "RefinableVector":
        """Parse the generator of one family from a filter fixture."""
        key = "a" if family is Family.PRIMAL else "a_dual"
        try:
            a = FilterBank.from_raw(raw[key])
        except KeyError as err:
            raise WaveletSpecError(f"filter file has no {key!r} filter") from err
        pieces = raw.get("phi_piecewise" if family is Family.PRIMAL else "phi_dual_piecewise")
        forms = [PiecewiseForm.from_raw(p) for p in pieces] if pieces else None
        return cls.from_filter(a, forms)

    @classmethod
    def from_fixture(cls, name: str, family: Family = Family.PRIMAL) -> "RefinableVector":
        """Load a generator from a filter file."""
        return cls.from_raw(read_json(name), family)

    @property
    def multiplicity(self) -> int:
        """Return r."""
        return self.filter.rows

    @property
    def support(self) -> Tuple[int, int]:
        """Return the integer support [l, h] of phi."""
        return self.filter.support

    @property
    def cell_shifts(self) -> Tuple[int, ...]:
        """Return the shifts j with phi(. - j) nonzero on [0, 1], increasing."""
        low, high = self.support
        return tuple(range(1 - high, -low + 1))

    def reflect(self) -> "RefinableVector":
        """Return the generator of x -> phi(-x)."""
        forms = None
        if self.piecewise is not None:
            forms = [form.reflect(0) for form in self.piecewise]
        return RefinableVector.from_filter(self.filter.reflect(), forms)

    def derivative_forms(self, order: int) -> Tuple[PiecewiseForm, ...]:
        """Return the closed-form derivatives of every component."""
        if self.piecewise is None:
            raise SmoothnessOrderError(f"{self} has no closed form")
        return tuple(form.derivative(order) for form in self.piecewise)

    def reproduction_row(self, exponent: int, shifts: Sequence[int]) -> sympy.Matrix:
        """Return the coefficients of x^exponent over phi(. - j), j in shifts."""
        blocks = [reproduction_coefficients(self.moments, exponent, j) for j in shifts]
        if not blocks:
            return sympy.zeros(1, 0)
        return sympy.Matrix.hstack(*blocks)


def load_generators(name: str) -> Tuple[RefinableVector, Optional[RefinableVector]]:
    """Load the primal and dual generators of a filter file; files without a dual give None."""
    raw = read_json(name)
    dual = RefinableVector.from_raw(raw, Family.DUAL) if "a_dual" in raw else None
    return RefinableVector.from_raw(raw, Family.PRIMAL), dual


@attr.s(frozen=True)
class DyadicValues:
    """Samples of a vector function at start + i / 2^level."""

    start: Fraction = attr.ib()
    level: int = attr.ib()
    values: np.ndarray = attr.ib(eq=False)

    @property
    def grid(self) -> np.ndarray:
        """Return the sample points."""
        return float(self.start) + np.arange(self.values.shape[0]) / 2**self.level

    def index(self, x) -> Optional[int]:
        """Return the sample index of a dyadic point, None outside the grid."""
        position = (Fraction(x) - self.start) * 2**self.level
        if position.denominator != 1:
            raise WaveletSpecError(f"{x} is not on the level {self.level} grid")
        index = int(position)
        if 0 <= index < self.values.shape[0]:
            return index
        return None

    def at(self, x) -> np.ndarray:
        """Return the value at a dyadic point (zero outside the grid)."""
        index = self.index(x)
        if index is None:
            return np.zeros(self.values.shape[1], dtype=self.values.dtype)
        return self.values[index]


def _numeric_taps(bank: FilterBank) -> Dict[int, np.ndarray]:
    taps = {}
    for k, tap in bank.items():
        matrix = np.array(tap.tolist(), dtype=complex)
        taps[k] = matrix.real if not np.any(matrix.imag) else matrix
    return taps


def integer_values(phi: RefinableVector) -> sympy.Matrix:
    """Return phi(n) for n = l..h stacked as an (h - l + 1) x r matrix."""
    low, high = phi.support
    r = phi.multiplicity
    points = list(range(low, high))
    size = len(points) * r
    transition = sympy.zeros(size, size)
    for row, n in enumerate(points):
        for col, m in enumerate(points):
            block = 2 * phi.filter.tap(2 * n - m)
            transition[row * r : (row + 1) * r, col * r : (col + 1) * r] = block
    eigen = linalg.nullspace(transition - sympy.eye(size))
    if eigen.cols != 1:
        raise DegenerateGenerator(
            f"eigenvalue 1 of the integer evaluation matrix has multiplicity {eigen.cols}"
        )
    vector = eigen[:, 0]
    total = sympy.zeros(r, 1)
    for row in range(len(points)):
        total += vector[row * r : (row + 1) * r, 0]
    scale = (phi.moments.matching_jets[0] * total)[0, 0]
    if scale == 0:
        raise DegenerateGenerator("integer values cannot be normalized")
    vector = (vector / scale).applyfunc(sympy.nsimplify)
    values = sympy.zeros(len(points) + 1, r)
    for row in range(len(points)):
        values[row, :] = vector[row * r : (row + 1) * r, 0].T
    return values


def eval_dyadic(phi: RefinableVector, level: int = DYADIC_LEVEL) -> DyadicValues:
    """Evaluate phi on the grid 2^-level * Z by the refinement relation."""
    low, _ = phi.support
    values = np.array(integer_values(phi).tolist(), dtype=float)
    taps = _numeric_taps(phi.filter)
    for n in range(1, level + 1):
        size = (values.shape[0] - 1) * 2 + 1
        refined = np.zeros((size, values.shape[1]), dtype=np.result_type(values, *taps.values()))
        refined[::2] = values
        odd = np.arange(1, size, 2)
        for k, tap in taps.items():
            index = (low - k) * 2 ** (n - 1) + odd
            mask = (index >= 0) & (index < values.shape[0])
            refined[odd[mask]] += 2 * values[index[mask]] @ tap.T
        values = refined
    _LOGGER.debug("Evaluated %s on %d dyadic points", phi, values.shape[0])
    return DyadicValues(Fraction(low), level, values)


def eval_wavelet_dyadic(
    phi: RefinableVector, b: FilterBank, level: int = DYADIC_LEVEL
) -> DyadicValues:
    """Evaluate psi = 2 sum_k b(k) phi(2. - k) on the grid 2^-level * Z."""
    base = eval_dyadic(phi, level)
    low, high = phi.support
    start = Fraction(b.low + low, 2)
    stop = Fraction(b.high + high, 2)
    count = int((stop - start) * 2**level) + 1
    result = np.zeros((count, b.rows), dtype=base.values.dtype)
    points = start + np.arange(count) * Fraction(1, 2**level)
    for k, tap in _numeric_taps(b).items():
        # 2x - k on the level grid of phi
        offsets = np.array([int((2 * x - k - base.start) * 2**level) for x in points])
        mask = (offsets >= 0) & (offsets < base.values.shape[0])
        result[mask] += 2 * base.values[offsets[mask]] @ tap.T
    return DyadicValues(start, level, result)


def refinement_residual(phi: RefinableVector, values: DyadicValues) -> float:
    """Return max |phi(x) - 2 sum_k a(k) phi(2x - k)| over the coarser grid."""
    taps = _numeric_taps(phi.filter)
    worst = 0.0
    coarse = values.level - 1
    if coarse < 0:
        return worst
    step = Fraction(1, 2**coarse)
    low, high = phi.support
    x = Fraction(low)
    while x <= high:
        total = sum(2 * taps[k] @ values.at(2 * x - k) for k in taps)
        worst = max(worst, float(np.max(np.abs(values.at(x) - total))))
        x += step
    return worst


def _kron(left: sympy.Matrix, right: sympy.Matrix) -> sympy.Matrix:
    result = sympy.zeros(left.rows * right.rows, left.cols * right.cols)
    for i in range(left.rows):
        for j in range(left.cols):
            if left[i, j] != 0:
                result[
                    i * right.rows : (i + 1) * right.rows, j * right.cols : (j + 1) * right.cols
                ] = left[i, j] * right
    return result


def transition_matrices(phi: RefinableVector) -> Tuple[sympy.Matrix, sympy.Matrix]:
    """Return (A0, A1) with vec phi = 2 A0 vec phi(2.) + 2 A1 vec phi(2. - 1) on [0, 1]."""
    shifts = phi.cell_shifts
    r = phi.multiplicity
    size = len(shifts) * r
    result = []
    for gamma in (0, 1):
        matrix = sympy.zeros(size, size)
        for row, j in enumerate(shifts):
            for col, k in enumerate(shifts):
                matrix[row * r : (row + 1) * r, col * r : (col + 1) * r] = phi.filter.tap(
                    k + gamma - 2 * j
                )
        result.append(matrix)
    return result[0], result[1]


def _cell_mean(phi: RefinableVector, order: int) -> sympy.Matrix:
    """Return int_0^1 vec phi^(order), normalized by reproducing x^order."""
    a0, a1 = transition_matrices(phi)
    size = a0.rows
    eigen = linalg.nullspace(a0 + a1 - sympy.Rational(1, 2**order) * sympy.eye(size))
    if eigen.cols != 1:
        raise NormalizationNotUnique(
            f"cell mean of order {order} is not unique ({eigen.cols} candidates)"
        )
    if order >= max(phi.moments.sum_rule_order, 1):
        raise SmoothnessOrderError(
            f"order {order} needs sum rule order above {phi.moments.sum_rule_order}"
        )
    row = phi.reproduction_row(order, phi.cell_shifts)
    scale = sympy.expand((row * eigen)[0, 0])
    if scale == 0:
        raise NormalizationNotUnique(f"cell mean of order {order} cannot be normalized")
    return (eigen * factorial(order) / scale).applyfunc(sympy.expand)


def _krylov_reduction(
    a0: sympy.Matrix, a1: sympy.Matrix, mean: sympy.Matrix
) -> Tuple[List[int], sympy.Matrix]:
    """Return the kept entries I and T with vec phi = T vec phi[I]."""
    basis: List[sympy.Matrix] = []
    queue = [mean]
    while queue:
        vector = queue.pop(0)
        candidate = sympy.Matrix.hstack(*basis, vector) if basis else vector
        if linalg.rank(candidate) == len(basis):
            continue
        basis.append(vector)
        queue.extend([a0 * vector, a1 * vector])
    if not basis:
        raise GramSystemSingular("the cell functions vanish identically")
    span = sympy.Matrix.hstack(*basis)
    kept = linalg.independent_rows(span)
    transform = span * linalg.solve(span[kept, :], sympy.eye(len(kept)))
    return kept, transform.applyfunc(sympy.expand)


def cell_coordinates(phi: RefinableVector) -> sympy.Matrix:
    """Return T with vec phi = T vec phi[kept] on [0, 1] for independent kept entries."""
    a0, a1 = transition_matrices(phi)
    _, transform = _krylov_reduction(a0, a1, _cell_mean(phi, 0))
    return transform


@attr.s(frozen=True)
class _ReducedCell:
    kept: List[int] = attr.ib()
    transform: sympy.Matrix = attr.ib()
    a0: sympy.Matrix = attr.ib()
    a1: sympy.Matrix = attr.ib()
    normalizer: sympy.Matrix = attr.ib()


def _reduce(phi: RefinableVector, order: int) -> _ReducedCell:
    a0, a1 = transition_matrices(phi)
    mean = _cell_mean(phi, order)
    kept, transform = _krylov_reduction(a0, a1, mean)
    scale = 2**order
    reduced0 = (scale * a0[kept, :] * transform).applyfunc(sympy.expand)
    reduced1 = (scale * a1[kept, :] * transform).applyfunc(sympy.expand)
    normalizer = phi.reproduction_row(order, phi.cell_shifts) * transform
    _LOGGER.debug(
        "Cell functions of %s, order %d: kept %d of %d entries", phi, order, len(kept), a0.rows
    )
    return _ReducedCell(kept, transform, reduced0, reduced1, normalizer.applyfunc(sympy.expand))


@attr.s(frozen=True)
class GramTable:
    """Inner products of shifts of (derivatives of) two refinable vectors.

    cell[(j, i), (k, i')] = int_0^1 phi_i^(m)(x - j) conj(phi~_i'^(m)(x - k)) dx
    for j in primal_shifts and k in dual_shifts.
    """

    order: int = attr.ib()
    multiplicity: int = attr.ib()
    primal_shifts: Tuple[int, ...] = attr.ib()
    dual_shifts: Tuple[int, ...] = attr.ib()
    cell: sympy.ImmutableMatrix = attr.ib()
    same_family: bool = attr.ib(default=False)
    method: str = attr.ib(default=METHOD_REFINEMENT)
    _blocks: dict = attr.ib(init=False, factory=dict, eq=False, repr=False)

    def cell_block(self, j: int, k: int) -> sympy.Matrix:
        """Return the r x r cell block of shifts (j, k), zero outside."""
        key = (j, k)
        if key not in self._blocks:
            r = self.multiplicity
            p0, d0 = self.primal_shifts[0], self.dual_shifts[0]
            if j in self.primal_shifts and k in self.dual_shifts:
                i, l = j - p0, k - d0
                block = sympy.Matrix(self.cell[i * r : (i + 1) * r, l * r : (l + 1) * r])
            else:
                block = sympy.zeros(r, r)
            self._blocks[key] = block
        return self._blocks[key]

    def _cells(self, j: int, k: int, lo: Optional[int], hi: Optional[int]) -> range:
        first = max(j - self.primal_shifts[-1], k - self.dual_shifts[-1])
        last = min(j - self.primal_shifts[0], k - self.dual_shifts[0])
        if lo is not None:
            first = max(first, lo)
        if hi is not None:
            last = min(last, hi - 1)
        return range(first, last + 1)

    def restricted(self, j: int, k: int, lo: Optional[int] = None, hi: Optional[int] = None):
        """Return <phi(. - j) chi[lo, hi], phi~(. - k)> (None means unbounded)."""
        total = sympy.zeros(self.multiplicity, self.multiplicity)
        for t in self._cells(j, k, lo, hi):
            total += self.cell_block(j - t, k - t)
        return total

    def half_line(self, j: int, k: int) -> sympy.Matrix:
        """Return the inner product of the shifts restricted to [0, inf)."""
        return self.restricted(j, k, 0, None)

    def entry(self, k: int) -> sympy.Matrix:
        """Return <phi^(m), phi~^(m)(. - k)> over the real line."""
        return self.restricted(0, k)

    @property
    def entries(self) -> Dict[int, sympy.Matrix]:
        """Return the nonzero full-line entries by shift."""
        span = (self.primal_shifts[-1] - self.dual_shifts[0]) - (
            self.primal_shifts[0] - self.dual_shifts[-1]
        )
        result = {}
        for k in range(-span - 1, span + 2):
            value = self.entry(k).applyfunc(sympy.expand)
            if not value.is_zero_matrix:
                result[k] = value
        return result

    def numeric_cell(self) -> np.ndarray:
        """Return the cell matrix in double precision."""
        return np.array(self.cell.tolist(), dtype=complex)

    def as_csv(self) -> str:
        """Export the full-line entries as CSV rows (i, j, k, m, value)."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["i", "j", "k", "m", "value_num", "value_den", "value_float"])
        for k, value in sorted(self.entries.items()):
            for i in range(value.rows):
                for j in range(value.cols):
                    entry = sympy.nsimplify(value[i, j])
                    if entry.is_Rational:
                        writer.writerow([i, j, k, self.order, entry.p, entry.q, float(entry)])
                    else:
                        writer.writerow([i, j, k, self.order, "", "", complex(entry)])
        return buffer.getvalue()


def _gram_by_refinement(
    phi: RefinableVector, phi_dual: RefinableVector, order: int
) -> sympy.Matrix:
    left = _reduce(phi, order)
    right = _reduce(phi_dual, order)
    n1, n2 = left.a0.rows, right.a0.rows
    system = sympy.eye(n1 * n2) - 2 * (
        _kron(left.a0, right.a0.conjugate()) + _kron(left.a1, right.a1.conjugate())
    )
    solutions = linalg.nullspace(system)
    if solutions.cols != 1:
        raise GramSystemSingular(
            f"self-consistency system has a {solutions.cols}-dimensional solution space"
        )
    cell = sympy.Matrix(n1, n2, list(solutions[:, 0]))
    value = sympy.expand((left.normalizer * cell * right.normalizer.H)[0, 0])
    if value == 0:
        raise NormalizationNotUnique("normalization vanishes on the solution")
    cell = cell * factorial(order) ** 2 / value
    full = left.transform * cell * right.transform.H
    return full.applyfunc(sympy.expand)


def _support_shifts(forms: Sequence[PiecewiseForm]) -> Tuple[int, ...]:
    bounds = [form.support() for form in forms if form.support() is not None]
    if not bounds:
        raise WaveletSpecError("all components vanish")
    lo = min(b[0] for b in bounds)
    hi = max(b[1] for b in bounds)
    if lo.denominator != 1 or hi.denominator != 1:
        raise WaveletSpecError("closed forms must have integer support")
    return tuple(range(1 - int(hi), -int(lo) + 1))


def gram_from_piecewise(
    primal: Sequence[PiecewiseForm],
    dual: Sequence[PiecewiseForm],
    order: int = 0,
    same_family: bool = False,
) -> GramTable:
    """Build a GramTable by exact integration of closed forms."""
    if len(primal) != len(dual):
        raise WaveletSpecError("closed forms of different multiplicity")
    r = len(primal)
    primal = [form.derivative(order) for form in primal]
    dual = [form.derivative(order) for form in dual]
    left_shifts = _support_shifts(primal)
    right_shifts = _support_shifts(dual)
    cell = sympy.zeros(len(left_shifts) * r, len(right_shifts) * r)
    restricted = {
        (j, i): primal[i].dilate(0, j).restrict(0, 1)
        for j in left_shifts
        for i in range(r)
    }
    for row, j in enumerate(left_shifts):
        for col, k in enumerate(right_shifts):
            for i in range(r):
                for l in range(r):
                    value = restricted[(j, i)].inner(dual[l].dilate(0, k))
                    if isinstance(value, Fraction):
                        value = sympy.Rational(value.numerator, value.denominator)
                    cell[row * r + i, col * r + l] = value
    return GramTable(
        order, r, left_shifts, right_shifts, sympy.ImmutableMatrix(cell), same_family,
        METHOD_PIECEWISE,
    )


def gram_integrals(
    phi: RefinableVector,
    phi_dual: RefinableVector,
    order: int = 0,
    method: Optional[str] = None,
) -> GramTable:
    """Return the Gram table of phi^(order) against shifts of phi_dual^(order).

    method is "refinement" (self-consistency system of the cell functions),
    "piecewise" (closed forms) or None for the default: closed forms for
    derivatives when both generators have them, the refinement system otherwise.
    """
    if phi.multiplicity != phi_dual.multiplicity:
        raise WaveletSpecError("generators of different multiplicity")
    same = phi is phi_dual
    has_forms = phi.piecewise is not None and phi_dual.piecewise is not None
    if method is None:
        method = METHOD_PIECEWISE if order > 0 and has_forms else METHOD_REFINEMENT
    if method == METHOD_PIECEWISE:
        if not has_forms:
            raise SmoothnessOrderError("closed forms are required for this Gram table")
        table = gram_from_piecewise(phi.piecewise, phi_dual.piecewise, order, same)
    elif method == METHOD_REFINEMENT:
        cell = _gram_by_refinement(phi, phi_dual, order)
        table = GramTable(
            order,
            phi.multiplicity,
            phi.cell_shifts,
            phi_dual.cell_shifts,
            sympy.ImmutableMatrix(cell),
            same,
            METHOD_REFINEMENT,
        )
    else:
        raise WaveletSpecError(f"unknown Gram method {method!r}")
    _LOGGER.debug("Gram table of order %d by %s: %d entries", order, method, len(table.entries))
    return table


def gram_difference(first: GramTable, second: GramTable) -> float:
    """Return the largest entry difference between two Gram tables."""
    keys = set(first.entries) | set(second.entries)
    worst = 0.0
    for k in keys:
        difference = first.entry(k) - second.entry(k)
        worst = max([worst] + [abs(complex(x)) for x in difference])
    return worst


def derivative_gram_symbol(table: GramTable, order: int) -> GramSymbol:
    """Return the bracket product symbol sum_k Gram(k) e^{-ik xi}."""
    if table.order != order:
        raise SmoothnessOrderError(f"table has order {table.order}, requested {order}")
    return GramSymbol(FilterBank.from_taps(table.entries), order)


@attr.s(auto_attribs=True, frozen=True)
class StabilityReport:
    """Extreme eigenvalues of the bracket product over the circle."""

    stable: bool
    lower: float
    upper: float


def stability_check(table: GramTable) -> StabilityReport:
    """Check the bracket product symbol is uniformly positive definite."""
    if not table.same_family:
        raise WaveletSpecError("stability needs a Gram table of one generator with itself")
    symbol = FilterBank.from_taps(table.entries)
    xi = 2 * np.pi * np.arange(STABILITY_SAMPLES) / STABILITY_SAMPLES
    values = symbol.symbol(xi)
    hermitian = 0.5 * (values + np.conj(np.swapaxes(values, -1, -2)))
    eigen = np.linalg.eigvalsh(hermitian)
    lower, upper = float(np.min(eigen)), float(np.max(eigen))
    return StabilityReport(lower > STABILITY_MARGIN, lower, upper)


@attr.s(auto_attribs=True, frozen=True)
class RieszBounds:
    """Riesz bounds of a finite truncation."""

    lower: float
    upper: float

    @property
    def ratio(self) -> float:
        """Return upper / lower."""
        return self.upper / self.lower


def riesz_bound_estimate(gram) -> RieszBounds:
    """Return the extreme eigenvalues of a Hermitian positive definite Gram matrix."""
    lower, upper = linalg.extreme_eigenvalues(gram)
    if lower <= 0:
        raise NotPositiveDefinite(f"smallest eigenvalue {lower:.3e} is not positive")
    return RieszBounds(lower, upper)


def cell_moments(phi: RefinableVector, up_to: int) -> List[sympy.Matrix]:
    """Return mu_q = int_0^1 x^q vec phi(x) dx for q = 0..up_to."""
    a0, a1 = transition_matrices(phi)
    size = a0.rows
    moments = [_cell_mean(phi, 0)]
    for q in range(1, up_to + 1):
        rhs = a1 * sum(
            (comb(q, s) * moments[s] for s in range(q)), sympy.zeros(size, 1)
        )
        lhs = 2**q * sympy.eye(size) - a0 - a1
        moments.append(linalg.solve(lhs, rhs).applyfunc(sympy.expand))
    return moments


def half_line_moment(
    phi: RefinableVector, moments: Sequence[sympy.Matrix], degree: int, shift: int
) -> sympy.Matrix:
    """Return int_0^inf x^degree phi(x - shift) dx as an r-vector."""
    r = phi.multiplicity
    shifts = phi.cell_shifts
    total = sympy.zeros(r, 1)
    for t in range(max(0, shift - shifts[-1]), shift - shifts[0] + 1):
        index = shifts.index(shift - t)
        for s in range(degree + 1):
            total += (
                comb(degree, s)
                * sympy.Integer(t) ** (degree - s)
                * moments[s][index * r : (index + 1) * r, 0]
            )
    return total.applyfunc(sympy.expand)
