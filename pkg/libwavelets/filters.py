"""Finitely supported matrix-valued refinement filters."""

import logging
from math import comb, factorial
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import attr
import numpy as np
import sympy
from sympy.polys.polyerrors import DomainError, PolificationFailed

from .const import (
    DEFAULT_TOLERANCE,
    DETERMINANT_SAMPLES,
    DETERMINANT_TOLERANCE,
    PERFECT_RECONSTRUCTION_SAMPLES,
    SUM_RULE_CAP,
)
from .exceptions import (
    DegenerateGenerator,
    FilterDimensionMismatch,
    InvalidFilterError,
    SmoothnessOrderError,
)
from .utils import parse_rational, rational_to_raw, read_json

_LOGGER = logging.getLogger(__name__)

# Laurent variable, z = exp(-i xi).
Z = sympy.Symbol("z")

Taps = Dict[int, sympy.ImmutableMatrix]


def _exact(value) -> sympy.Expr:
    return sympy.sympify(value, rational=True)


def as_exact_matrix(value) -> sympy.ImmutableMatrix:
    """Convert a scalar, a (nested) list or a sympy matrix into an exact matrix."""
    if isinstance(value, sympy.MatrixBase):
        return sympy.ImmutableMatrix(value.applyfunc(_exact))
    if isinstance(value, (list, tuple)):
        rows = value if value and isinstance(value[0], (list, tuple)) else [value]
        return sympy.ImmutableMatrix([[_exact(x) for x in row] for row in rows])
    return sympy.ImmutableMatrix([[_exact(value)]])


def _convolve(left: Mapping, right: Mapping) -> Dict[int, sympy.Matrix]:
    result: Dict[int, sympy.Matrix] = {}
    for k1, t1 in left.items():
        for k2, t2 in right.items():
            product = t1 * t2
            result[k1 + k2] = result[k1 + k2] + product if k1 + k2 in result else product
    return result


def _drop_zero(taps: Mapping) -> Taps:
    expanded = {k: sympy.ImmutableMatrix(tap.applyfunc(sympy.expand)) for k, tap in taps.items()}
    return {k: tap for k, tap in sorted(expanded.items()) if not tap.is_zero_matrix}


@attr.s(frozen=True, repr=False)
class FilterBank:
    """Finitely supported filter {a(k)} of r x s rational matrices."""

    taps: Mapping[int, sympy.ImmutableMatrix] = attr.ib()
    rows: int = attr.ib()
    cols: int = attr.ib()

    def __attrs_post_init__(self):
        """Validate the stored taps."""
        if self.rows < 1 or self.cols < 1:
            raise InvalidFilterError("filter dimensions must be positive")
        if not self.taps:
            raise InvalidFilterError("a filter needs at least one nonzero tap")
        for k, tap in self.taps.items():
            if tap.shape != (self.rows, self.cols):
                raise FilterDimensionMismatch(
                    f"tap {k} has shape {tap.shape}, expected {(self.rows, self.cols)}"
                )
            if tap.is_zero_matrix:
                raise InvalidFilterError(f"tap {k} is zero")

    def __repr__(self) -> str:
        """Return a short description."""
        return f"FilterBank(support={self.support}, rows={self.rows}, cols={self.cols})"

    @classmethod
    def from_taps(cls, taps: Mapping[int, object]) -> "FilterBank":
        """Build a filter from a shift -> matrix mapping, dropping zero taps."""
        exact = {int(k): as_exact_matrix(v) for k, v in taps.items()}
        shapes = {tap.shape for tap in exact.values()}
        if len(shapes) > 1:
            raise FilterDimensionMismatch(f"taps of different shapes {sorted(shapes)}")
        exact = _drop_zero(exact)
        if not exact:
            raise InvalidFilterError("a filter needs at least one nonzero tap")
        rows, cols = next(iter(exact.values())).shape
        return cls(exact, rows, cols)

    @classmethod
    def from_scalar(cls, coefficients: Sequence, low: int) -> "FilterBank":
        """Build a scalar filter from consecutive coefficients starting at low."""
        return cls.from_taps({low + i: c for i, c in enumerate(coefficients)})

    @classmethod
    def from_raw(cls, raw: dict) -> "FilterBank":
        """Parse raw JSON data."""
        try:
            low, high = (int(x) for x in raw["support"])
            rows = int(raw.get("rows", 1))
            cols = int(raw.get("cols", rows))
            taps = {}
            for key, values in raw["taps"].items():
                k = int(key)
                if not low <= k <= high:
                    raise InvalidFilterError(f"tap {k} outside support [{low}, {high}]")
                if len(values) != rows * cols:
                    raise FilterDimensionMismatch(
                        f"tap {k} has {len(values)} entries, expected {rows * cols}"
                    )
                entries = [parse_rational(v) for v in values]
                taps[k] = sympy.ImmutableMatrix(rows, cols, entries)
        except (KeyError, TypeError, ValueError) as err:
            raise InvalidFilterError(f"malformed filter bank: {err}") from err
        bank = cls.from_taps(taps)
        if bank.support != (low, high):
            raise InvalidFilterError(
                f"declared support [{low}, {high}] but nonzero taps span {list(bank.support)}"
            )
        return bank

    def as_raw(self) -> dict:
        """Serialize to the JSON layout read by from_raw."""
        return {
            "support": list(self.support),
            "rows": self.rows,
            "cols": self.cols,
            "taps": {
                str(k): [rational_to_raw(x) for x in tap] for k, tap in self.taps.items()
            },
        }

    @property
    def low(self) -> int:
        """Return the first nonzero shift."""
        return min(self.taps)

    @property
    def high(self) -> int:
        """Return the last nonzero shift."""
        return max(self.taps)

    @property
    def support(self) -> Tuple[int, int]:
        """Return the filter support [l, h]."""
        return self.low, self.high

    @property
    def is_square(self) -> bool:
        """Whether taps are square matrices."""
        return self.rows == self.cols

    def tap(self, k: int) -> sympy.ImmutableMatrix:
        """Return a(k), the zero matrix outside the support."""
        if k in self.taps:
            return self.taps[k]
        return sympy.ImmutableMatrix.zeros(self.rows, self.cols)

    def items(self) -> Iterable[Tuple[int, sympy.ImmutableMatrix]]:
        """Iterate over (shift, tap) in increasing shift."""
        return sorted(self.taps.items())

    def symbol(self, xi) -> np.ndarray:
        """Evaluate the symbol sum_k a(k) e^{-ik xi} in floating point."""
        xi = np.asarray(xi, dtype=float)
        result = np.zeros(xi.shape + (self.rows, self.cols), dtype=complex)
        for k, tap in self.taps.items():
            result += np.multiply.outer(np.exp(-1j * k * xi), numeric_matrix(tap))
        return result

    def jet(self, order: int, modulated: bool = False) -> sympy.ImmutableMatrix:
        """Return the exact derivative of the symbol at 0 (or at pi if modulated)."""
        total = sympy.zeros(self.rows, self.cols)
        for k, tap in self.taps.items():
            factor = (-sympy.I * k) ** order
            if modulated and k % 2:
                factor = -factor
            total += factor * tap
        return sympy.ImmutableMatrix(total.applyfunc(sympy.expand))

    def laurent(self) -> sympy.Matrix:
        """Return the Laurent polynomial matrix sum_k a(k) z^k."""
        total = sympy.zeros(self.rows, self.cols)
        for k, tap in self.taps.items():
            total += tap * Z**k
        return total

    def convolve(self, other: "FilterBank") -> "FilterBank":
        """Return the filter whose symbol is the product of both symbols."""
        if self.cols != other.rows:
            raise FilterDimensionMismatch(f"cannot multiply {self} by {other}")
        return FilterBank.from_taps(_convolve(self.taps, other.taps))

    def __add__(self, other: "FilterBank") -> "FilterBank":
        """Return the filter whose symbol is the sum of both symbols."""
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise FilterDimensionMismatch(f"cannot add {self} and {other}")
        taps = dict(self.taps)
        for k, tap in other.taps.items():
            taps[k] = taps[k] + tap if k in taps else tap
        return FilterBank.from_taps(taps)

    def scale(self, factor) -> "FilterBank":
        """Return the filter multiplied by an exact scalar."""
        factor = _exact(factor)
        return FilterBank.from_taps({k: factor * tap for k, tap in self.taps.items()})

    def adjoint(self) -> "FilterBank":
        """Return the filter whose symbol is the conjugate transpose."""
        return FilterBank.from_taps({-k: tap.H for k, tap in self.taps.items()})

    def modulate(self) -> "FilterBank":
        """Return the filter whose symbol is shifted by pi."""
        return FilterBank.from_taps(
            {k: (-tap if k % 2 else tap) for k, tap in self.taps.items()}
        )

    def reflect(self) -> "FilterBank":
        """Return the filter k -> a(-k) of the reflected generator."""
        return FilterBank.from_taps({-k: tap for k, tap in self.taps.items()})


def numeric_matrix(matrix: sympy.MatrixBase) -> np.ndarray:
    """Convert an exact matrix to a complex numpy array."""
    return np.array([[complex(x) for x in row] for row in matrix.tolist()], dtype=complex)


def symbol_eval(bank: FilterBank, xi) -> np.ndarray:
    """Evaluate the symbol of a filter bank."""
    return bank.symbol(xi)


@attr.s(auto_attribs=True, frozen=True)
class BiorthPair:
    """Primal filters (a, b) with dual filters (a~, b~)."""

    a: FilterBank
    b: FilterBank
    a_dual: FilterBank
    b_dual: FilterBank

    def __attrs_post_init__(self):
        """Check all four filters are r x r for one r."""
        sizes = {(f.rows, f.cols) for f in (self.a, self.b, self.a_dual, self.b_dual)}
        if len(sizes) != 1 or not self.a.is_square:
            raise FilterDimensionMismatch(f"filters of a pair must share r, got {sorted(sizes)}")

    @property
    def multiplicity(self) -> int:
        """Return r."""
        return self.a.rows

    @classmethod
    def from_raw(cls, raw: dict) -> "BiorthPair":
        """Parse raw JSON data."""
        try:
            return cls(
                FilterBank.from_raw(raw["a"]),
                FilterBank.from_raw(raw["b"]),
                FilterBank.from_raw(raw["a_dual"]),
                FilterBank.from_raw(raw["b_dual"]),
            )
        except KeyError as err:
            raise InvalidFilterError(f"filter pair is missing {err}") from err

    @classmethod
    def verified(cls, a, b, a_dual, b_dual) -> "BiorthPair":
        """Build a pair and reject it unless it is a perfect reconstruction bank."""
        pair = cls(a, b, a_dual, b_dual)
        report = check_perfect_reconstruction(pair)
        if not report.passed:
            raise InvalidFilterError(
                f"not a biorthogonal filter bank, residual {report.residual:.3e}"
            )
        return pair

    def reflect(self) -> "BiorthPair":
        """Return the filters of the reflected generators."""
        return BiorthPair(
            self.a.reflect(), self.b.reflect(), self.a_dual.reflect(), self.b_dual.reflect()
        )

    def swap(self) -> "BiorthPair":
        """Exchange the roles of primal and dual filters."""
        return BiorthPair(self.a_dual, self.b_dual, self.a, self.b)


def load_filters(name: str) -> Dict[str, FilterBank]:
    """Load every filter bank of a fixture file."""
    raw = read_json(name)
    return {
        key: FilterBank.from_raw(value)
        for key, value in raw.items()
        if isinstance(value, dict) and "taps" in value
    }


def load_pair(name: str) -> BiorthPair:
    """Load a biorthogonal pair from a fixture file."""
    return BiorthPair.from_raw(read_json(name))


@attr.s(auto_attribs=True, frozen=True)
class EigenvalueReport:
    """Eigenvalue conditions on a(0)."""

    simple_one: bool
    nonresonant: bool
    j_max: int

    @property
    def passed(self) -> bool:
        """Whether both conditions hold."""
        return self.simple_one and self.nonresonant


def check_eigenvalue_conditions(a: FilterBank) -> EigenvalueReport:
    """Check 1 is a simple eigenvalue of a(0) and 2^j is no eigenvalue."""
    if not a.is_square:
        raise FilterDimensionMismatch(f"{a} is not square")
    a0 = a.jet(0)
    lam = sympy.Symbol("lam")
    char = sympy.Poly(a0.charpoly(lam).as_expr(), lam)
    simple_one = char.eval(1) == 0 and char.diff(lam).eval(1) != 0
    # Every eigenvalue is bounded by the maximum absolute row sum.
    bound = max(
        sum(abs(complex(x)) for x in a0.row(i)) for i in range(a0.rows)
    )
    j_max = 1
    while 2**j_max <= bound:
        j_max += 1
    nonresonant = all(char.eval(2**j) != 0 for j in range(1, j_max + 1))
    _LOGGER.debug(
        "Eigenvalue conditions for %s: simple=%s nonresonant=%s j_max=%d",
        a,
        simple_one,
        nonresonant,
        j_max,
    )
    return EigenvalueReport(simple_one, nonresonant, j_max)


@attr.s(auto_attribs=True, frozen=True)
class ReconstructionReport:
    """Perfect reconstruction check result."""

    passed: bool
    residual: float
    exact: Optional[bool]


def _block_identity_holds(dual: FilterBank, primal: FilterBank, diagonal: bool) -> bool:
    product = _convolve(dual.taps, primal.adjoint().taps)
    r = dual.rows
    for k, tap in product.items():
        if k % 2:
            continue
        expected = sympy.eye(r) if diagonal and k == 0 else sympy.zeros(r, primal.rows)
        if not (2 * tap - expected).applyfunc(sympy.expand).is_zero_matrix:
            return False
    if diagonal and 0 not in product:
        return False
    return True


def polyphase_matrix(low: FilterBank, high: FilterBank, xi) -> np.ndarray:
    """Return the 2r x 2r matrices [[a(xi), a(xi+pi)], [b(xi), b(xi+pi)]]."""
    xi = np.asarray(xi, dtype=float)
    top = np.concatenate([low.symbol(xi), low.symbol(xi + np.pi)], axis=-1)
    bottom = np.concatenate([high.symbol(xi), high.symbol(xi + np.pi)], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def check_perfect_reconstruction(
    pair: BiorthPair,
    samples: Optional[Sequence[float]] = None,
    tolerance: float = DEFAULT_TOLERANCE,
    exact: bool = True,
) -> ReconstructionReport:
    """Check the dual polyphase matrix inverts the primal one."""
    if samples is None:
        samples = 2 * np.pi * np.arange(PERFECT_RECONSTRUCTION_SAMPLES) / PERFECT_RECONSTRUCTION_SAMPLES
    primal = polyphase_matrix(pair.a, pair.b, samples)
    dual = polyphase_matrix(pair.a_dual, pair.b_dual, samples)
    product = dual @ np.conj(np.swapaxes(primal, -1, -2))
    residual = float(np.max(np.abs(product - np.eye(2 * pair.multiplicity))))
    exact_result = None
    if exact:
        exact_result = (
            _block_identity_holds(pair.a_dual, pair.a, True)
            and _block_identity_holds(pair.a_dual, pair.b, False)
            and _block_identity_holds(pair.b_dual, pair.a, False)
            and _block_identity_holds(pair.b_dual, pair.b, True)
        )
    passed = residual <= tolerance and exact_result is not False
    _LOGGER.debug("Perfect reconstruction residual %.3e, exact %s", residual, exact_result)
    return ReconstructionReport(passed, residual, exact_result)


@attr.s(auto_attribs=True, frozen=True)
class MomentData:
    """Moments of a refinable function and jets of its matching filter.

    moments[j] is the column vector of derivatives of phi-hat at 0 and
    matching_jets[j] the row vector of derivatives of upsilon-hat at 0.
    """

    moments: Tuple[sympy.ImmutableMatrix, ...]
    matching_jets: Tuple[sympy.ImmutableMatrix, ...]
    sum_rule_order: int

    @property
    def multiplicity(self) -> int:
        """Return r."""
        return self.moments[0].rows


def _unit_eigenvectors(a: FilterBank) -> Tuple[sympy.Matrix, sympy.Matrix]:
    a0 = sympy.Matrix(a.jet(0))
    identity = sympy.eye(a.rows)
    right = (a0 - identity).nullspace()
    left = (a0 - identity).T.nullspace()
    if len(right) != 1 or len(left) != 1:
        raise DegenerateGenerator("1 is not a simple eigenvalue of a(0)")
    phi0 = right[0]
    pivot = next(x for x in phi0 if x != 0)
    phi0 = (phi0 / pivot).applyfunc(sympy.simplify)
    u0 = left[0].T
    scale = (u0 * phi0)[0, 0]
    if scale == 0:
        raise DegenerateGenerator("left and right 1-eigenvectors are orthogonal")
    return phi0, (u0 / scale).applyfunc(sympy.simplify)


def _matching_jets(
    a: FilterBank, u0: sympy.Matrix, order: int
) -> Optional[List[sympy.Matrix]]:
    r = a.rows
    at_zero = [sympy.Matrix(a.jet(s)) for s in range(order)]
    at_pi = [sympy.Matrix(a.jet(s, modulated=True)) for s in range(order)]
    unknowns = [
        sympy.Matrix([[sympy.Symbol(f"u_{t}_{i}") for i in range(r)]])
        for t in range(1, order)
    ]
    jets = [u0] + unknowns
    equations = []
    for t in range(order):
        low = sum(
            (comb(t, s) * 2**s * jets[s] * at_zero[t - s] for s in range(t + 1)),
            sympy.zeros(1, r),
        ) - jets[t]
        high = sum(
            (comb(t, s) * 2**s * jets[s] * at_pi[t - s] for s in range(t + 1)),
            sympy.zeros(1, r),
        )
        equations.extend(sympy.expand(x) for x in list(low) + list(high))
    symbols = [x for row in unknowns for x in row]
    if not symbols:
        return [u0] if all(eq == 0 for eq in equations) else None
    solutions = sympy.linsolve(equations, symbols)
    if solutions == sympy.S.EmptySet:
        return None
    values = next(iter(solutions))
    free = set().union(*(sympy.sympify(v).free_symbols for v in values))
    values = [sympy.sympify(v).subs({x: 0 for x in free}) for v in values]
    lookup = dict(zip(symbols, values))
    return [u0] + [row.subs(lookup) for row in unknowns]


def _sum_rule_search(a: FilterBank, u0: sympy.Matrix) -> Tuple[int, List[sympy.Matrix]]:
    best: List[sympy.Matrix] = []
    order = 0
    for candidate in range(1, SUM_RULE_CAP + 1):
        jets = _matching_jets(a, u0, candidate)
        if jets is None:
            break
        order, best = candidate, jets
    return order, best


def refinable_moments(a: FilterBank, up_to: Optional[int] = None) -> MomentData:
    """Return phi-hat derivatives at 0 together with the matching filter jets."""
    report = check_eigenvalue_conditions(a)
    if not report.passed:
        raise DegenerateGenerator(f"eigenvalue conditions fail for {a}: {report}")
    phi0, u0 = _unit_eigenvectors(a)
    order, jets = _sum_rule_search(a, u0)
    if not jets:
        jets = [u0]
    if up_to is None:
        up_to = max(order + 2, 4)
    a0 = sympy.Matrix(a.jet(0))
    moments = [phi0]
    for j in range(1, up_to + 1):
        rhs = sum(
            (comb(j, s) * sympy.Matrix(a.jet(s)) * moments[j - s] for s in range(1, j + 1)),
            sympy.zeros(a.rows, 1),
        )
        moments.append(((2**j * sympy.eye(a.rows) - a0).LUsolve(rhs)).applyfunc(sympy.expand))
    _LOGGER.debug("Filter %s has sum rule order %d", a, order)
    return MomentData(
        tuple(sympy.ImmutableMatrix(m) for m in moments),
        tuple(sympy.ImmutableMatrix(j) for j in jets),
        order,
    )


def sum_rule_order(a: FilterBank) -> Tuple[int, MomentData]:
    """Return the sum rule order of a and the moment data found on the way."""
    data = refinable_moments(a)
    return data.sum_rule_order, data


def reproduction_coefficients(
    data: MomentData, polynomial: Union[int, Sequence], shift: int
) -> sympy.ImmutableMatrix:
    """Return c(k) with q = sum_k c(k) phi(. - k) for a polynomial q.

    polynomial is an exponent e (for x^e) or increasing-degree coefficients.
    """
    if isinstance(polynomial, int):
        coefficients = [0] * polynomial + [1]
    else:
        coefficients = list(polynomial)
    degree = len(coefficients) - 1
    while degree > 0 and coefficients[degree] == 0:
        degree -= 1
    if degree >= max(data.sum_rule_order, 1):
        raise SmoothnessOrderError(
            f"degree {degree} is not reproduced (sum rule order {data.sum_rule_order})"
        )
    k = sympy.Integer(shift)
    total = sympy.zeros(1, data.multiplicity)
    for j in range(min(degree + 1, len(data.matching_jets))):
        derivative = sum(
            _exact(c) * sympy.ff(e, j) * k ** (e - j)
            for e, c in enumerate(coefficients[: degree + 1])
            if e >= j
        )
        if derivative != 0:
            total += (-sympy.I) ** j / factorial(j) * derivative * data.matching_jets[j]
    return sympy.ImmutableMatrix(total.applyfunc(sympy.expand))


def vanishing_moment_order(b: FilterBank, moments: MomentData) -> int:
    """Return the number of vanishing moments of psi = 2 sum b(k) phi(2. - k)."""
    if b.cols != moments.multiplicity:
        raise FilterDimensionMismatch(
            f"{b} has {b.cols} columns but the moments have {moments.multiplicity} components"
        )
    for j in range(len(moments.moments)):
        value = sum(
            (
                comb(j, s) * sympy.Matrix(b.jet(s)) * moments.moments[j - s]
                for s in range(j + 1)
            ),
            sympy.zeros(b.rows, 1),
        )
        if not value.applyfunc(sympy.expand).is_zero_matrix:
            return j
    return len(moments.moments)


@attr.s(auto_attribs=True, frozen=True)
class GramSymbol:
    """Laurent taps of the bracket product of order-m derivatives."""

    bank: FilterBank
    order: int


def check_stable_pair(a: FilterBank, b: FilterBank) -> bool:
    """Check det [[a(xi), a(xi+pi)], [b(xi), b(xi+pi)]] has no zero on the circle.

    The exact root test decides when sympy can factor the determinant, sampling
    decides otherwise.
    """
    shift = -min(a.low, b.low, 0)
    top = (a.laurent() * Z**shift).row_join((a.laurent() * Z**shift).subs(Z, -Z))
    bottom = (b.laurent() * Z**shift).row_join((b.laurent() * Z**shift).subs(Z, -Z))
    det = sympy.expand(top.col_join(bottom).det())
    if det == 0:
        return False
    poly = sympy.Poly(det, Z)
    while poly.eval(0) == 0:
        poly = sympy.Poly(sympy.cancel(poly.as_expr() / Z), Z)
    certified = True
    try:
        coeffs = poly.all_coeffs()
        reciprocal = sympy.Poly.from_list([sympy.conjugate(c) for c in reversed(coeffs)], Z)
        common = sympy.gcd(poly, reciprocal)
        if common.degree() > 0:
            roots = np.roots([complex(c) for c in common.all_coeffs()])
            if np.any(np.abs(np.abs(roots) - 1.0) < 1e-8):
                return False
    except (PolificationFailed, DomainError, NotImplementedError):
        certified = False
        _LOGGER.warning("Falling back to sampling for the determinant of %s, %s", a, b)
    xi = 2 * np.pi * np.arange(DETERMINANT_SAMPLES) / DETERMINANT_SAMPLES
    values = np.abs(np.linalg.det(polyphase_matrix(a, b, xi)))
    sampled = bool(np.min(values) > DETERMINANT_TOLERANCE)
    _LOGGER.debug("Determinant check certified=%s sampled=%s", certified, sampled)
    if certified and not sampled:
        _LOGGER.warning("Determinant of %s, %s is small on the circle but never zero", a, b)
    return certified or sampled


def check_derivative_orthogonality(
    a: FilterBank, b: FilterBank, m: int, gram: GramSymbol
) -> bool:
    """Check (a, b) generate an m-th order derivative-orthogonal Riesz wavelet."""
    if gram.order != m:
        raise SmoothnessOrderError(f"gram symbol has order {gram.order}, requested {m}")
    if not (a.is_square and b.is_square and a.rows == b.rows == gram.bank.rows):
        raise FilterDimensionMismatch(f"{a}, {b} and the gram symbol differ in size")
    product = _convolve(_convolve(b.taps, gram.bank.taps), a.adjoint().taps)
    identity = all(
        sympy.Matrix(tap).applyfunc(sympy.expand).is_zero_matrix
        for k, tap in product.items()
        if k % 2 == 0
    )
    if not identity:
        _LOGGER.debug("Derivative-orthogonality identity fails at order %d", m)
        return False
    return check_stable_pair(a, b)


def derivative_orthogonal_exists(a: FilterBank, m: int) -> bool:
    """Whether some b makes (a, b) m-th order derivative-orthogonal."""
    order, _ = sum_rule_order(a)
    return order >= 2 * m
