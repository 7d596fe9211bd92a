"""Boundary scaling functions and wavelets on the half line [0, inf).

Functions are combinations of atoms phi_i(2^s . - k) chi[0, inf), written as
sparse rows {(k, i): coefficient}. Scaling functions live on scale-0 atoms and
wavelets on scale-1 atoms of the same generator.
"""

import itertools
import logging
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import attr
import sympy

from .. import linalg
from ..const import ElementRole, Family
from ..exceptions import (
    BoundaryConstructionError,
    DualConstructionError,
    SingularCompletion,
    SingularSystem,
    WaveletSpecError,
)
from ..filters import BiorthPair, FilterBank
from ..refinable import (
    GramTable,
    RefinableVector,
    cell_coordinates,
    cell_moments,
    gram_integrals,
    half_line_moment,
)
from ..utils import ceil_div, parse_rational

_LOGGER = logging.getLogger(__name__)

Label = Tuple[int, int]
AtomRow = Dict[Label, sympy.Expr]


def _clean(row: Mapping[Label, sympy.Expr]) -> AtomRow:
    result = {}
    for label, value in row.items():
        value = sympy.expand(value)
        if value != 0:
            result[label] = value
    return result


def _rows_from_matrix(matrix: sympy.MatrixBase, labels: Sequence[Label]) -> List[AtomRow]:
    return [
        _clean({label: matrix[i, j] for j, label in enumerate(labels)}) for i in range(matrix.rows)
    ]


def _combine(rows: Sequence[AtomRow], weights: sympy.MatrixBase) -> List[AtomRow]:
    """Return weights * rows for sparse rows."""
    result = []
    for i in range(weights.rows):
        total: AtomRow = {}
        for j, row in enumerate(rows):
            weight = weights[i, j]
            if weight == 0:
                continue
            for label, value in row.items():
                total[label] = total.get(label, 0) + weight * value
        result.append(_clean(total))
    return result


def _unit_atoms(shifts: Sequence[int], r: int) -> List[AtomRow]:
    return [{(k, i): sympy.Integer(1)} for k in shifts for i in range(r)]


def lift(rows: Sequence[AtomRow], bank: FilterBank, floor: int) -> List[AtomRow]:
    """Rewrite scale-s atoms on scale s + 1 by the refinement relation of bank.

    Atoms with shift below floor vanish on [0, inf) and are dropped.
    """
    result = []
    for row in rows:
        total: AtomRow = {}
        for (k, i), value in row.items():
            for m, tap in bank.items():
                q = 2 * k + m
                if q < floor:
                    continue
                for l in range(tap.cols):
                    if tap[i, l] != 0:
                        total[(q, l)] = total.get((q, l), 0) + 2 * value * tap[i, l]
        result.append(_clean(total))
    return result


def support_end(rows: Sequence[AtomRow], generator: RefinableVector, scale: int):
    """Return the right end of the support of the combinations."""
    shifts = [k for row in rows for (k, _) in row]
    if not shifts:
        return sympy.Integer(0)
    return sympy.Rational(max(shifts) + generator.support[1], 2**scale)


class HalfLinePairing:
    """Inner products on [0, inf) between atom combinations of two generators."""

    def __init__(self, table: GramTable):
        """Initialize with the Gram table of the two generators."""
        self.table = table
        self._blocks: Dict[Tuple[int, int], sympy.Matrix] = {}

    def block(self, j: int, k: int) -> sympy.Matrix:
        """Return <phi(. - j) chi[0, inf), phi~(. - k)> as an r x r matrix."""
        key = (j, k)
        if key not in self._blocks:
            self._blocks[key] = self.table.half_line(j, k).applyfunc(sympy.expand)
        return self._blocks[key]

    def matrix(
        self, primal: Sequence[AtomRow], dual: Sequence[AtomRow], scale: int = 0
    ) -> sympy.Matrix:
        """Return [<f, g>] for f in primal and g in dual, both on scale-s atoms."""
        result = sympy.zeros(len(primal), len(dual))
        factor = sympy.Rational(1, 2**scale)
        for a, left in enumerate(primal):
            for b, right in enumerate(dual):
                total = 0
                for (j, i), c in left.items():
                    for (k, l), d in right.items():
                        value = self.block(j, k)[i, l]
                        if value != 0:
                            total += c * sympy.conjugate(d) * value
                result[a, b] = sympy.expand(factor * total)
        return result


@attr.s(frozen=True)
class BoundaryFunction:
    """A left boundary vector function with its refinement relation.

    f = 2 left * phi^L(2.) + 2 sum_k taps[k] phi(2. - k) where phi^L is the
    scaling boundary function of the same family. Scaling functions also keep
    coeffs (A_c) over their truncated shifts.
    """

    role: ElementRole = attr.ib()
    family: Family = attr.ib()
    start: int = attr.ib()
    left: sympy.ImmutableMatrix = attr.ib()
    taps: Dict[int, sympy.ImmutableMatrix] = attr.ib()
    atoms: Tuple[AtomRow, ...] = attr.ib(eq=False)
    scale: int = attr.ib()
    end: sympy.Rational = attr.ib()
    coeffs: Optional[sympy.ImmutableMatrix] = attr.ib(default=None)
    entries: Tuple[Label, ...] = attr.ib(default=())

    @property
    def size(self) -> int:
        """Return the number of functions."""
        return len(self.atoms)

    @property
    def last_shift(self) -> int:
        """Return the largest k with a nonzero tap, start - 1 without taps."""
        shifts = [k for k, tap in self.taps.items() if not tap.is_zero_matrix]
        return max(shifts) if shifts else self.start - 1

    def tap(self, k: int) -> sympy.ImmutableMatrix:
        """Return the tap at interior shift k."""
        if k in self.taps:
            return self.taps[k]
        cols = next(iter(self.taps.values())).cols if self.taps else 1
        return sympy.ImmutableMatrix.zeros(self.size, cols)

    def refinement_matrix(self, stop: Optional[int] = None) -> sympy.Matrix:
        """Return [left | tap(start) | ... | tap(stop)]."""
        stop = self.last_shift if stop is None else stop
        blocks = [sympy.Matrix(self.left)] + [
            sympy.Matrix(self.tap(k)) for k in range(self.start, stop + 1)
        ]
        return sympy.Matrix.hstack(*blocks)


def _entry_labels(start: int, generator: RefinableVector) -> List[Label]:
    """Labels of phi(. - k) chi[0, inf) for k decreasing from start - 1 to 1 - h."""
    high = generator.support[1]
    return [(k, i) for k in range(start - 1, -high, -1) for i in range(generator.multiplicity)]


def independent_entries(
    generator: RefinableVector, labels: Sequence[Label]
) -> Tuple[List[int], sympy.Matrix]:
    """Return kept entries and W with truncated shifts = W * kept truncated shifts."""
    if not labels:
        return [], sympy.zeros(0, 0)
    transform = cell_coordinates(generator)
    shifts = generator.cell_shifts
    r = generator.multiplicity
    cells = max(k for k, _ in labels) - shifts[0] + 1
    width = transform.cols
    rows = sympy.zeros(len(labels), cells * width)
    for row, (k, i) in enumerate(labels):
        for t in range(cells):
            j = k - t
            if j in shifts:
                index = shifts.index(j) * r + i
                rows[row, t * width : (t + 1) * width] = transform[index, :]
    kept = linalg.independent_rows(rows)
    weights = linalg.solve_left(rows[kept, :], rows)
    if len(kept) < len(labels):
        _LOGGER.debug("Deleted %d dependent truncated shifts", len(labels) - len(kept))
    return kept, weights


def _transition(
    bank: FilterBank, rows: Sequence[Label], cols: Sequence[Label]
) -> sympy.Matrix:
    """Return (a(k - 2n))[(n, i), (k, l)]."""
    result = sympy.zeros(len(rows), len(cols))
    for a, (n, i) in enumerate(rows):
        for b, (k, l) in enumerate(cols):
            result[a, b] = bank.tap(k - 2 * n)[i, l]
    return result


def _interior_taps(
    coeffs: sympy.Matrix, rows: Sequence[Label], bank: FilterBank, start: int
) -> Dict[int, sympy.ImmutableMatrix]:
    """Return coeffs * E(k) for k >= start with E(k)[(n, i)] = a(k - 2n)[i, :]."""
    if not rows:
        return {}
    last = 2 * max(n for n, _ in rows) + bank.high
    taps = {}
    for k in range(start, last + 1):
        e_k = sympy.zeros(len(rows), bank.cols)
        for a, (n, i) in enumerate(rows):
            e_k[a, :] = bank.tap(k - 2 * n)[i, :]
        tap = (coeffs * e_k).applyfunc(sympy.expand)
        if not tap.is_zero_matrix:
            taps[k] = sympy.ImmutableMatrix(tap)
    return taps


@attr.s(frozen=True)
class _Truncation:
    labels: Tuple[Label, ...] = attr.ib()
    kept: Tuple[Label, ...] = attr.ib()
    weights: sympy.Matrix = attr.ib()
    transition: sympy.Matrix = attr.ib()


def _truncate(generator: RefinableVector, start: int) -> _Truncation:
    labels = _entry_labels(start, generator)
    index, weights = independent_entries(generator, labels)
    kept = [labels[i] for i in index]
    full = _transition(generator.filter, labels, labels)
    transition = full[index, :] * weights if labels else sympy.zeros(0, 0)
    return _Truncation(tuple(labels), tuple(kept), weights, transition.applyfunc(sympy.expand))


def _reproduction_block(
    generator: RefinableVector, exponents: Sequence[int], labels: Sequence[Label]
) -> sympy.Matrix:
    shifts = sorted({k for k, _ in labels}, reverse=True)
    if not exponents or not labels:
        return sympy.zeros(len(exponents), len(labels))
    return sympy.Matrix.vstack(
        *[generator.reproduction_row(e, shifts) for e in exponents]
    ).applyfunc(sympy.expand)


def _polynomial_factor(matrix: sympy.Matrix, order: int) -> sympy.Matrix:
    """Return prod_{j < order} (matrix - 2^{-j-1})^n, n the size of matrix."""
    n = matrix.rows
    result = sympy.eye(n)
    for j in range(order):
        factor = matrix - sympy.Rational(1, 2 ** (j + 1)) * sympy.eye(n)
        result = result * factor**n
    return result.applyfunc(sympy.expand)


def default_scaling_start(generator: RefinableVector) -> int:
    """Return max(-l_phi, -l_a)."""
    low = generator.support[0]
    return max(-low, -generator.filter.low)


def construct_phiL(
    generator: RefinableVector, exponents: Sequence[int], start: Optional[int] = None
) -> BoundaryFunction:
    """Build phi^L reproducing x^e, e in exponents, and refinable on [0, inf)."""
    minimum = default_scaling_start(generator)
    if start is None:
        start = minimum
    elif start < minimum:
        raise WaveletSpecError(f"n_phi = {start} violates n_phi >= max(-l_phi, -l_a) = {minimum}")
    order = generator.moments.sum_rule_order
    if any(e < 0 or e >= order for e in exponents):
        raise WaveletSpecError(f"exponents {list(exponents)} must lie in 0..{order - 1}")
    trunc = _truncate(generator, start)
    kept = list(trunc.kept)
    if not kept:
        coeffs = sympy.zeros(0, 0)
        pivots: Tuple[int, ...] = ()
    else:
        reproduction = _reproduction_block(generator, exponents, trunc.labels) * trunc.weights
        remainder = _polynomial_factor(trunc.transition, order)
        coeffs = linalg.row_basis(sympy.Matrix.vstack(reproduction, remainder))
        _, pivots = linalg.rref(coeffs)
    product = (coeffs * trunc.transition).applyfunc(sympy.expand)
    left = product[:, list(pivots)] if kept else sympy.zeros(0, 0)
    if not (product - left * coeffs).applyfunc(sympy.expand).is_zero_matrix:
        raise BoundaryConstructionError("A_c E_c = A_L A_c has no solution")
    taps = _interior_taps(coeffs, kept, generator.filter, start)
    atoms = _rows_from_matrix(coeffs, kept)
    _LOGGER.debug(
        "phi^L: n_phi = %d, %d truncated shifts kept, %d functions", start, len(kept), len(atoms)
    )
    return BoundaryFunction(
        ElementRole.SCALING,
        Family.PRIMAL,
        start,
        sympy.ImmutableMatrix(left),
        taps,
        tuple(atoms),
        0,
        support_end(atoms, generator, 0),
        sympy.ImmutableMatrix(coeffs),
        tuple(kept),
    )


def _silent_start(
    rows: Sequence[AtomRow], pairing: HalfLinePairing, generator: RefinableVector, start: int
) -> int:
    """Return the smallest n >= start with <rows, phi~(. - k)> = 0 for all k >= n."""
    shifts = [k for row in rows for (k, _) in row]
    if not shifts:
        return start
    r = generator.multiplicity
    stop = max(shifts) + generator.support[1] - generator.support[0]
    last = start - 1
    for k in range(start, stop + 1):
        products = pairing.matrix(rows, _unit_atoms([k], r))
        if not products.is_zero_matrix:
            last = k
    return max(start, last + 1)


def _moment_pairing(
    generator: RefinableVector,
    moments: Sequence[sympy.Matrix],
    exponents: Sequence[int],
    rows: Sequence[AtomRow],
) -> sympy.Matrix:
    """Return [int_0^inf x^e conj(f)] for e in exponents and f in rows."""
    result = sympy.zeros(len(exponents), len(rows))
    for a, e in enumerate(exponents):
        for b, row in enumerate(rows):
            total = 0
            for (k, i), c in row.items():
                total += sympy.conjugate(c) * half_line_moment(generator, moments, e, k)[i]
            result[a, b] = sympy.expand(total)
    return result


def _solve_dual_coefficients(
    gram: sympy.Matrix,
    reproduction: sympy.Matrix,
    moments: sympy.Matrix,
    transition: sympy.Matrix,
) -> sympy.Matrix:
    """Solve A G = I, reproduction = moments * A and A E = A E G A for A."""
    rows, cols = gram.cols, gram.rows
    symbols = sympy.Matrix(rows, cols, lambda i, j: sympy.Symbol(f"c_{i}_{j}"))
    flat = list(symbols)
    equations = list(symbols * gram - sympy.eye(rows))
    equations += list(reproduction - moments * symbols)
    solutions = sympy.linsolve([sympy.expand(x) for x in equations], flat)
    if solutions == sympy.S.EmptySet:
        raise DualConstructionError("biorthogonality and moment conditions are inconsistent")
    values = sympy.Matrix(rows, cols, list(next(iter(solutions))))
    free = sorted(values.free_symbols, key=str)
    consistency = (values * transition - values * transition * gram * values).applyfunc(
        sympy.expand
    )
    if free:
        _LOGGER.debug("Refinability fixes %d remaining parameters", len(free))
        found = sympy.solve([x for x in consistency if x != 0], free, dict=True)
        found = [s for s in found if set(s) >= set(free)]
        if len(found) != 1:
            raise DualConstructionError(
                f"refinability leaves {len(found)} solutions for {len(free)} parameters"
            )
        values = values.subs(found[0]).applyfunc(sympy.expand)
        consistency = (values * transition - values * transition * gram * values).applyfunc(
            sympy.expand
        )
    if values.free_symbols or not consistency.is_zero_matrix:
        raise DualConstructionError("dual boundary functions are not refinable")
    return values


def construct_dual_phiL(
    generator: RefinableVector,
    dual: RefinableVector,
    phi_left: BoundaryFunction,
    pairing: HalfLinePairing,
    exponents: Optional[Sequence[int]] = None,
    start: Optional[int] = None,
) -> BoundaryFunction:
    """Build phi~^L biorthogonal to phi^L plus phi(. - k), n_phi <= k < n_phi~."""
    if exponents is None:
        exponents = list(range(dual.moments.sum_rule_order))
    minimum = max(-dual.support[0], -dual.filter.low, phi_left.start)
    silent = _silent_start(phi_left.atoms, pairing, dual, minimum)
    if start is None:
        start = silent
    elif start < silent:
        raise WaveletSpecError(
            f"n_phi~ = {start} is below {silent}: phi~(. - k) must be orthogonal to phi^L"
        )
    r = generator.multiplicity
    extended = list(phi_left.atoms) + _unit_atoms(range(phi_left.start, start), r)
    trunc = _truncate(dual, start)
    kept = list(trunc.kept)
    if not extended:
        coeffs = sympy.zeros(0, len(kept))
    else:
        dual_atoms = [{label: sympy.Integer(1)} for label in kept]
        gram = pairing.matrix(extended, dual_atoms).H
        reproduction = _reproduction_block(dual, exponents, trunc.labels) * trunc.weights
        moments = _moment_pairing(generator, cell_moments(generator, max(exponents, default=0)),
                                  exponents, extended)
        coeffs = _solve_dual_coefficients(gram, reproduction, moments, trunc.transition)
    if extended:
        left = (coeffs * trunc.transition * gram).applyfunc(sympy.expand)
    else:
        left = sympy.zeros(0, 0)
    taps = _interior_taps(coeffs, kept, dual.filter, start)
    atoms = _rows_from_matrix(coeffs, kept)
    _LOGGER.debug("phi~^L: n_phi~ = %d, %d functions", start, len(atoms))
    return BoundaryFunction(
        ElementRole.SCALING,
        Family.DUAL,
        start,
        sympy.ImmutableMatrix(left),
        taps,
        tuple(atoms),
        0,
        support_end(atoms, dual, 0),
        sympy.ImmutableMatrix(coeffs),
        tuple(kept),
    )


def wavelet_atoms(bank: FilterBank, shifts: Sequence[int], floor: int) -> List[AtomRow]:
    """Return psi_i(. - k) = 2 sum_q b(q - 2k)[i, :] phi(2. - q) on scale-1 atoms."""
    rows = []
    for k in shifts:
        for i in range(bank.rows):
            row: AtomRow = {}
            for m, tap in bank.items():
                q = 2 * k + m
                if q < floor:
                    continue
                for l in range(tap.cols):
                    if tap[i, l] != 0:
                        row[(q, l)] = 2 * tap[i, l]
            rows.append(_clean(row))
    return rows


def _wavelet_low(bank: FilterBank, generator: RefinableVector) -> int:
    return (bank.low + generator.support[0]) // 2


def _fit_in(rows: Sequence[AtomRow], labels: Sequence[Label]) -> Optional[sympy.Matrix]:
    """Return the coordinates of scale-1 atom rows over unit atom labels."""
    index = {label: n for n, label in enumerate(labels)}
    result = sympy.zeros(len(rows), len(labels))
    for a, row in enumerate(rows):
        for label, value in row.items():
            if label not in index:
                return None
            result[a, index[label]] = value
    return result


@attr.s(frozen=True)
class _Expansion:
    """eta = [boundary(2.); phi(2. - k), k = start..stop] on scale-1 atoms."""

    rows: Tuple[AtomRow, ...] = attr.ib()
    boundary: int = attr.ib()
    start: int = attr.ib()
    stop: int = attr.ib()

    def split(self, coefficients: sympy.Matrix, r: int):
        """Return (left, taps) of a refinement relation eta-coefficients / 2."""
        half = coefficients / 2
        left = half[:, : self.boundary]
        taps = {}
        for n, k in enumerate(range(self.start, self.stop + 1)):
            lo = self.boundary + n * r
            tap = half[:, lo : lo + r].applyfunc(sympy.expand)
            if not tap.is_zero_matrix:
                taps[k] = sympy.ImmutableMatrix(tap)
        return sympy.ImmutableMatrix(left.applyfunc(sympy.expand)), taps

    def combine(self, coefficients: sympy.Matrix) -> List[AtomRow]:
        """Return coefficients * eta."""
        return _combine(self.rows, coefficients)


def _expansion(
    scaling: BoundaryFunction, generator: RefinableVector, start: int, stop: int
) -> _Expansion:
    r = generator.multiplicity
    rows = list(scaling.atoms) + _unit_atoms(range(start, stop + 1), r)
    return _Expansion(tuple(rows), scaling.size, start, stop)


def _last_column(row: sympy.Matrix) -> int:
    return max(j for j in range(row.cols) if row[j] != 0)


def completion_candidates(
    space: sympy.Matrix, fixed: sympy.Matrix, count: int
) -> List[sympy.Matrix]:
    """Return every choice of count rows completing fixed with the shortest support.

    Rows come from the echelon form of space that minimizes last nonzero
    columns. Choices whose longest row ends at the same column tie; they are
    listed in lexicographic order, so the first one is the greedy pick.
    """
    if count == 0:
        return [sympy.zeros(0, space.cols)]
    reversed_rows, _ = linalg.rref(space[:, ::-1])
    candidates = sorted(
        (reversed_rows[i, ::-1] for i in range(linalg.rank(space))), key=_last_column
    )
    target = (linalg.rank(fixed) if fixed.rows else 0) + count
    best: Optional[int] = None
    choices: List[sympy.Matrix] = []
    for subset in itertools.combinations(range(len(candidates)), count):
        reach = max(_last_column(candidates[i]) for i in subset)
        if best is not None and reach > best:
            continue
        rows = sympy.Matrix.vstack(*[candidates[i] for i in subset])
        stacked = sympy.Matrix.vstack(fixed, rows) if fixed.rows else rows
        if linalg.rank(stacked) < target:
            continue
        if best is None or reach < best:
            best, choices = reach, []
        choices.append(rows)
    if not choices:
        raise SingularCompletion(f"no {count} admissible rows complete the interior wavelets")
    return choices


def default_wavelet_start(pair: BiorthPair, generator: RefinableVector, scaling_start: int) -> int:
    """Return max(-l_psi, ceil((n_phi - l_b) / 2))."""
    return max(-_wavelet_low(pair.b, generator), ceil_div(scaling_start - pair.b.low, 2))


def psi_candidates(
    pair: BiorthPair,
    generator: RefinableVector,
    dual: RefinableVector,
    phi_left: BoundaryFunction,
    dual_left: BoundaryFunction,
    pairing: HalfLinePairing,
    targets: Optional[sympy.Matrix] = None,
    start: Optional[int] = None,
) -> List[BoundaryFunction]:
    """Return every admissible psi^L of shortest support, the default first.

    targets, when given, are refinement rows [B_L | B(n_phi) ...] of wanted
    boundary wavelets, zero padded on the right. Boundary wavelets they leave
    open are filled by the shortest supported completion, which may tie.
    """
    minimum = default_wavelet_start(pair, generator, phi_left.start)
    if start is None:
        start = minimum
    elif start < minimum:
        raise WaveletSpecError(f"n_psi = {start} is below max(-l_psi, (n_phi - l_b) / 2)")
    n_phi, n_dual = phi_left.start, dual_left.start
    r = generator.multiplicity
    reach = max(2 * n_phi + pair.a_dual.high, 2 * start + pair.b_dual.high) - 1
    stop = reach + max(pair.a.high - pair.a_dual.low, 0)
    eta = _expansion(phi_left, generator, n_phi, stop)
    floor = 1 - generator.support[1]
    dual_floor = 1 - dual.support[1]
    last_dual = stop + generator.support[1] - dual.support[0] - 1
    constraints = lift(dual_left.atoms, pair.a_dual, dual_floor)
    constraints += lift(_unit_atoms(range(n_dual, last_dual + 1), r), pair.a_dual, dual_floor)
    products = pairing.matrix(eta.rows, constraints, scale=1)
    space = linalg.row_basis(linalg.left_nullspace(products))
    interior_rows: List[sympy.Matrix] = []
    labels = [(k, i) for k in range(n_phi, stop + 1) for i in range(r)]
    for k in range(start, ceil_div(stop - pair.b.low, 2) + 1):
        coords = _fit_in(wavelet_atoms(pair.b, [k], floor), labels)
        if coords is None:
            continue
        interior_rows.append(
            sympy.Matrix.hstack(sympy.zeros(coords.rows, eta.boundary), coords)
        )
    interior = sympy.Matrix.vstack(*interior_rows) if interior_rows else sympy.zeros(0, len(eta.rows))
    try:
        weights = linalg.solve_left(space, interior)
    except SingularSystem as err:
        raise SingularCompletion("interior wavelets leave the admissible space") from err
    wanted = sympy.zeros(0, space.cols)
    if targets is not None:
        wanted = sympy.Matrix(targets)
        if wanted.cols > space.cols:
            raise SingularCompletion(
                f"targets have {wanted.cols} columns, the expansion only {space.cols}"
            )
        if wanted.cols < space.cols:
            wanted = wanted.row_join(sympy.zeros(wanted.rows, space.cols - wanted.cols))
        try:
            linalg.solve_left(space, 2 * wanted)
        except SingularSystem as err:
            raise SingularCompletion("requested boundary wavelets are not admissible") from err
    missing = space.rows - interior.rows - wanted.rows
    if missing < 0:
        raise SingularCompletion(
            f"{wanted.rows} targets for {space.rows - interior.rows} boundary wavelets"
        )
    if missing:
        _LOGGER.warning(
            "%d boundary wavelets without targets, choosing the shortest supported completion",
            missing,
        )
    fixed = sympy.Matrix.vstack(interior, 2 * wanted)
    result = []
    for rows in completion_candidates(space, fixed, missing):
        chosen = sympy.Matrix.vstack(2 * wanted, rows)
        completion = linalg.solve_left(space, chosen) if chosen.rows else sympy.zeros(0, space.rows)
        square = sympy.Matrix.vstack(weights, completion)
        if square.rows != space.rows or linalg.rank(square) < space.rows:
            raise SingularCompletion(
                f"[U; V] is {square.rows} x {space.rows} of rank {linalg.rank(square)}"
            )
        coefficients = (completion * space).applyfunc(sympy.expand)
        left, taps = eta.split(coefficients, r)
        atoms = eta.combine(coefficients)
        result.append(
            BoundaryFunction(
                ElementRole.WAVELET,
                Family.PRIMAL,
                n_phi,
                left,
                taps,
                tuple(atoms),
                1,
                support_end(atoms, generator, 1),
            )
        )
    _LOGGER.debug(
        "psi^L: n_psi = %d, m_phi = %d, admissible dimension %d, %d functions, %d choices",
        start, stop, space.rows, result[0].size, len(result),
    )
    return result


def construct_psiL(
    pair: BiorthPair,
    generator: RefinableVector,
    dual: RefinableVector,
    phi_left: BoundaryFunction,
    dual_left: BoundaryFunction,
    pairing: HalfLinePairing,
    targets: Optional[sympy.Matrix] = None,
    start: Optional[int] = None,
) -> BoundaryFunction:
    """Build psi^L orthogonal to the dual scaling space and completing the interior wavelets."""
    return psi_candidates(pair, generator, dual, phi_left, dual_left, pairing, targets, start)[0]


def construct_dual_psiL(
    pair: BiorthPair,
    generator: RefinableVector,
    dual: RefinableVector,
    phi_left: BoundaryFunction,
    psi_left: BoundaryFunction,
    dual_left: BoundaryFunction,
    pairing: HalfLinePairing,
    psi_start: int,
    start: Optional[int] = None,
) -> BoundaryFunction:
    """Build psi~^L biorthogonal to psi^L and orthogonal to all other primal elements."""
    dual_low = _wavelet_low(pair.b_dual, dual)
    minimum = max(-dual_low, ceil_div(dual_left.start - pair.b_dual.low, 2), psi_start)
    if start is None:
        start = minimum
    elif start < minimum:
        raise WaveletSpecError(f"n_psi~ = {start} is below {minimum}")
    n_phi, n_dual = phi_left.start, dual_left.start
    r = generator.multiplicity
    stop = (
        max(2 * n_dual + pair.a.high, 2 * start + pair.b.high)
        + max(pair.a_dual.high - pair.a.low, 0)
        - 1
    )
    eta = _expansion(dual_left, dual, n_dual, stop)
    floor = 1 - generator.support[1]
    reach = sympy.Rational(stop + dual.support[1], 2)
    low, _ = generator.support
    phi_stop = int(sympy.ceiling(reach - low)) - 1
    psi_stop = int(sympy.ceiling(reach - sympy.Rational(pair.b.low + low, 2))) - 1
    targets = list(psi_left.atoms) + wavelet_atoms(pair.b, range(psi_start, start), floor)
    others = lift(phi_left.atoms, pair.a, floor)
    others += lift(_unit_atoms(range(n_phi, phi_stop + 1), r), pair.a, floor)
    others += list(psi_left.atoms)
    others += wavelet_atoms(pair.b, range(psi_start, psi_stop + 1), floor)
    if not targets:
        coefficients = sympy.zeros(0, len(eta.rows))
    else:
        products = pairing.matrix(others, eta.rows, scale=1).H
        offset = len(others) - len(psi_left.atoms) - len(range(psi_start, psi_stop + 1)) * r
        rhs = sympy.zeros(len(targets), len(others))
        for n in range(len(targets)):
            rhs[n, offset + n] = 1
        try:
            coefficients = linalg.solve_left(products, rhs)
        except SingularSystem as err:
            raise DualConstructionError(
                f"dual wavelets are not unique for n_psi~ = {start}: {err}"
            ) from err
    left, taps = eta.split(coefficients, r)
    atoms = eta.combine(coefficients)
    _LOGGER.debug("psi~^L: n_psi~ = %d, m_phi~ = %d, %d functions", start, stop, len(atoms))
    return BoundaryFunction(
        ElementRole.WAVELET,
        Family.DUAL,
        n_dual,
        left,
        taps,
        tuple(atoms),
        1,
        support_end(atoms, dual, 1),
    )


@attr.s(auto_attribs=True, frozen=True)
class EndpointOptions:
    """Choices for one endpoint, all optional."""

    exponents: Tuple[int, ...] = ()
    dual_exponents: Optional[Tuple[int, ...]] = None
    n_phi: Optional[int] = None
    n_phi_dual: Optional[int] = None
    n_psi: Optional[int] = None
    n_psi_dual: Optional[int] = None
    targets: Optional[sympy.ImmutableMatrix] = None

    @classmethod
    def from_raw(cls, raw: dict) -> "EndpointOptions":
        """Parse raw data."""
        targets = raw.get("psi_targets")
        if targets is not None:
            targets = sympy.ImmutableMatrix([[parse_rational(x) for x in row] for row in targets])
        dual_exponents = raw.get("dual_exponents")
        return cls(
            tuple(raw.get("exponents", ())),
            tuple(dual_exponents) if dual_exponents is not None else None,
            raw.get("n_phi"),
            raw.get("n_phi_dual"),
            raw.get("n_psi"),
            raw.get("n_psi_dual"),
            targets,
        )


@attr.s(frozen=True)
class BoundaryData:
    """All left boundary functions of a biorthogonal pair on [0, inf)."""

    pair: BiorthPair = attr.ib()
    generator: RefinableVector = attr.ib()
    dual: RefinableVector = attr.ib()
    table: GramTable = attr.ib(eq=False)
    phi: BoundaryFunction = attr.ib()
    phi_dual: BoundaryFunction = attr.ib()
    psi: BoundaryFunction = attr.ib()
    psi_dual: BoundaryFunction = attr.ib()
    psi_start: int = attr.ib()
    psi_dual_start: int = attr.ib()
    completions: Tuple["BoundaryData", ...] = attr.ib(default=(), eq=False, repr=False)

    @property
    def phi_start(self) -> int:
        """Return n_phi."""
        return self.phi.start

    @property
    def phi_dual_start(self) -> int:
        """Return n_phi~."""
        return self.phi_dual.start

    def pairing(self) -> HalfLinePairing:
        """Return the half-line inner products of the pair."""
        return HalfLinePairing(self.table)


def build_boundary(
    pair: BiorthPair,
    options: EndpointOptions,
    generator: Optional[RefinableVector] = None,
    dual: Optional[RefinableVector] = None,
) -> BoundaryData:
    """Run the scaling, dual scaling, wavelet and dual wavelet constructions.

    When several boundary wavelet completions tie on support, the result is
    the first one and carries all of them in completions.
    """
    generator = generator or RefinableVector.from_filter(pair.a)
    dual = dual or RefinableVector.from_filter(pair.a_dual)
    table = gram_integrals(generator, dual, 0)
    pairing = HalfLinePairing(table)
    exponents = options.exponents or tuple(range(generator.moments.sum_rule_order))
    phi = construct_phiL(generator, exponents, options.n_phi)
    phi_dual = construct_dual_phiL(
        generator, dual, phi, pairing, options.dual_exponents, options.n_phi_dual
    )
    psi_start = options.n_psi
    if psi_start is None:
        psi_start = default_wavelet_start(pair, generator, phi.start)
    dual_low = _wavelet_low(pair.b_dual, dual)
    psi_dual_start = options.n_psi_dual
    if psi_dual_start is None:
        psi_dual_start = max(
            -dual_low, ceil_div(phi_dual.start - pair.b_dual.low, 2), psi_start
        )
    _LOGGER.debug(
        "Boundary offsets n_phi=%d n_phi~=%d n_psi=%d n_psi~=%d",
        phi.start, phi_dual.start, psi_start, psi_dual_start,
    )
    choices = []
    for psi in psi_candidates(
        pair, generator, dual, phi, phi_dual, pairing, options.targets, psi_start
    ):
        psi_dual = construct_dual_psiL(
            pair, generator, dual, phi, psi, phi_dual, pairing, psi_start, options.n_psi_dual
        )
        choices.append(
            BoundaryData(
                pair, generator, dual, table, phi, phi_dual, psi, psi_dual, psi_start,
                psi_dual_start,
            )
        )
    if len(choices) > 1:
        _LOGGER.info("%d boundary wavelet completions tie on support", len(choices))
        return attr.evolve(choices[0], completions=tuple(choices))
    return choices[0]
