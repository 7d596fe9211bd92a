"""Wavelet bases on [0, L] assembled from boundary and interior elements."""

import csv
import io
import json
import logging
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import attr
import numpy as np
import scipy.sparse
import sympy

from .. import linalg
from ..const import (
    DYADIC_LEVEL,
    FILTER_CDF22,
    FILTER_HERMITE_CUBIC,
    RIESZ_TRUNCATION_LEVEL,
    ElementRole,
    ElementSide,
    Family,
)
from ..exceptions import (
    BoundaryConstructionError,
    LevelTooCoarse,
    MissingIntegralBackend,
    NotPositiveDefinite,
    SingularSystem,
    UnknownElement,
    WaveletSpecError,
)
from ..filters import BiorthPair, FilterBank, load_pair
from ..piecewise import PiecewiseForm, linear_combination
from ..refinable import (
    GramTable,
    RefinableVector,
    eval_dyadic,
    gram_integrals,
    load_generators,
    riesz_bound_estimate,
)
from ..utils import rational_to_raw, read_json
from .boundary import BoundaryData, BoundaryFunction, EndpointOptions, build_boundary

_LOGGER = logging.getLogger(__name__)

Label = Tuple[int, int]
Atoms = Dict[Label, Fraction]


@attr.s(frozen=True)
class BasisSpec:
    """Filters, endpoint choices and levels of an interval basis."""

    name: str = attr.ib()
    filters: str = attr.ib()
    left: EndpointOptions = attr.ib(factory=EndpointOptions)
    right: EndpointOptions = attr.ib(factory=EndpointOptions)
    length: int = attr.ib(default=1)
    coarse: Optional[int] = attr.ib(default=None)
    finest: Optional[int] = attr.ib(default=None)

    @classmethod
    def from_raw(cls, raw: dict) -> "BasisSpec":
        """Parse and validate raw data."""
        if "filters" not in raw:
            raise WaveletSpecError("basis spec is missing 'filters'")
        length = raw.get("length", 1)
        if not isinstance(length, int) or length < 1:
            raise WaveletSpecError(f"'length' must be a positive integer, got {length!r}")
        coarse, finest = raw.get("coarse"), raw.get("finest")
        for key, value in (("coarse", coarse), ("finest", finest)):
            if value is not None and (not isinstance(value, int) or value < 0):
                raise WaveletSpecError(f"{key!r} must be a nonnegative integer, got {value!r}")
        if coarse is not None and finest is not None and finest < coarse:
            raise WaveletSpecError(f"'finest' = {finest} must not be below 'coarse' = {coarse}")
        return cls(
            raw.get("name", raw["filters"]),
            raw["filters"],
            EndpointOptions.from_raw(raw.get("left", {})),
            EndpointOptions.from_raw(raw.get("right", {})),
            length,
            coarse,
            finest,
        )

    @classmethod
    def from_fixture(cls, name: str) -> "BasisSpec":
        """Load a spec file."""
        return cls.from_raw(read_json(name))

    def pair(self) -> BiorthPair:
        """Return the filters."""
        return load_pair(self.filters)

    def generators(self) -> Tuple[RefinableVector, RefinableVector]:
        """Return the primal and dual generators."""
        return load_generators(self.filters)


@attr.s(frozen=True)
class EndpointData:
    """Boundary functions at both ends; the right end is built on the reflected pair."""

    left: BoundaryData = attr.ib()
    right: BoundaryData = attr.ib()


def build_endpoints(spec: BasisSpec) -> EndpointData:
    """Run the boundary constructions for both endpoints of a spec.

    Boundary wavelet completions that tie on support are ranked by the Riesz
    ratio of the normalized primal basis truncated at RIESZ_TRUNCATION_LEVEL.
    """
    pair = spec.pair()
    primal, dual = spec.generators()
    left = build_boundary(pair, spec.left, primal, dual)
    right = build_boundary(pair.reflect(), spec.right, primal.reflect(), dual.reflect())
    right = _steadiest(spec, right, lambda choice: EndpointData(left, choice))
    left = _steadiest(spec, left, lambda choice: EndpointData(choice, right))
    return EndpointData(left, right)


def _steadiest(spec: BasisSpec, data: BoundaryData, endpoints) -> BoundaryData:
    if len(data.completions) < 2:
        return data
    ratios = []
    for choice in data.completions:
        try:
            ratios.append(truncated_riesz_ratio(spec, endpoints(choice)))
        except NotPositiveDefinite:
            ratios.append(np.inf)
    best = int(np.argmin(ratios))
    if not np.isfinite(ratios[best]):
        raise BoundaryConstructionError("no boundary wavelet completion gives a Riesz basis")
    _LOGGER.info(
        "Picked completion %d of %d with Riesz ratio %.4g", best, len(ratios), ratios[best]
    )
    return attr.evolve(data.completions[best], completions=data.completions)


def truncated_riesz_ratio(
    spec: BasisSpec, endpoints: EndpointData, level: int = RIESZ_TRUNCATION_LEVEL
) -> float:
    """Return B / A of the L2 normalized primal basis B_{J0,level}."""
    bounds = minimal_levels(endpoints.left, endpoints.right, spec.length)
    basis = assemble_basis(
        spec, bounds.primal, max(level, bounds.primal), Family.PRIMAL, endpoints
    )
    top = basis.top_level
    coefficients = basis.coefficient_matrix(top)
    gram = coefficients @ atom_gram(gram_table(basis, 0), basis, top) @ coefficients.conj().T
    gram = gram.toarray()
    scales = 1 / np.sqrt(np.diag(gram).real)
    return riesz_bound_estimate(scales[:, None] * gram * scales[None, :]).ratio


@attr.s(frozen=True)
class LevelBounds:
    """Smallest coarse levels of the primal and the dual basis."""

    primal: int = attr.ib()
    dual: int = attr.ib()

    @dual.validator
    def _check(self, _, value):
        if not value >= self.primal >= 0:
            raise WaveletSpecError(f"levels must satisfy {value} >= {self.primal} >= 0")


def _ends(data: BoundaryData) -> List[sympy.Rational]:
    return [data.phi.end, data.psi.end, data.phi_dual.end, data.psi_dual.end]


def _reach(
    left_scaling: BoundaryFunction,
    left_wavelet: BoundaryFunction,
    right_scaling: BoundaryFunction,
    right_wavelet: BoundaryFunction,
) -> int:
    return max(
        left_scaling.last_shift + right_scaling.start,
        left_wavelet.last_shift + right_scaling.start,
        right_scaling.last_shift + left_scaling.start,
        right_wavelet.last_shift + left_scaling.start,
    )


def minimal_levels(left: BoundaryData, right: BoundaryData, length: int = 1) -> LevelBounds:
    """Return the smallest levels at which no element touches both endpoints."""
    ends = _ends(left) + _ends(right)
    primal_reach = _reach(left.phi, left.psi, right.phi, right.psi)
    dual_reach = _reach(left.phi_dual, left.psi_dual, right.phi_dual, right.psi_dual)
    cross = {
        (left.psi.end, right.phi_dual.end),
        (left.psi.end, right.psi_dual.end),
        (left.psi_dual.end, right.phi.end),
        (left.psi_dual.end, right.psi.end),
        (left.phi_dual.end, right.psi.end),
        (left.phi.end, right.psi_dual.end),
    }

    def fits(level: int, reach: int, pairs) -> bool:
        width = 2**level * length
        return (
            reach <= 2 * width
            and all(end <= width for end in ends)
            and all(a + b <= width for a, b in pairs)
        )

    primal = 0
    while not fits(primal, primal_reach, ()):
        primal += 1
    dual = primal
    while not fits(dual, dual_reach, cross):
        dual += 1
    _LOGGER.debug("Minimal levels J0 = %d, dual J0 = %d on [0, %d]", primal, dual, length)
    return LevelBounds(primal, dual)


@attr.s(frozen=True)
class Element:
    """One basis function sum c phi_i(2^atom_level x - k) chi[0, L]."""

    index: int = attr.ib()
    role: ElementRole = attr.ib()
    side: ElementSide = attr.ib()
    level: int = attr.ib()
    position: int = attr.ib()
    component: int = attr.ib()
    atom_level: int = attr.ib()
    atoms: Atoms = attr.ib(eq=False, repr=False)
    support: Tuple[Fraction, Fraction] = attr.ib()


def affine_scale(level: int, order: int = 0) -> float:
    """Return 2^(level (1/2 - order)), the Sobolev normalization of a level."""
    return 2.0 ** (level * (0.5 - order))


def _fraction_taps(bank: FilterBank) -> List[Tuple[int, int, int, Fraction]]:
    return [
        (m, i, l, linalg.to_fraction(tap[i, l]))
        for m, tap in bank.items()
        for i in range(tap.rows)
        for l in range(tap.cols)
        if tap[i, l] != 0
    ]


@attr.s(frozen=True)
class AtomSpace:
    """Atoms phi_i(2^level x - k) chi[0, L] that do not vanish on [0, L]."""

    generator: RefinableVector = attr.ib()
    length: int = attr.ib()

    def bounds(self, level: int) -> Tuple[int, int]:
        """Return the first and last shift of a level."""
        low, high = self.generator.support
        return 1 - high, 2**level * self.length - low - 1

    def size(self, level: int) -> int:
        """Return the number of atoms of a level."""
        first, last = self.bounds(level)
        return (last - first + 1) * self.generator.multiplicity

    def index(self, level: int, label: Label) -> int:
        """Return the position of an atom."""
        first, _ = self.bounds(level)
        return (label[0] - first) * self.generator.multiplicity + label[1]

    def clip(self, atoms: Mapping[Label, Fraction], level: int) -> Atoms:
        """Drop atoms vanishing on [0, L] and zero coefficients."""
        first, last = self.bounds(level)
        return {
            label: value
            for label, value in atoms.items()
            if first <= label[0] <= last and value != 0
        }

    def support(self, atoms: Mapping[Label, Fraction], level: int) -> Tuple[Fraction, Fraction]:
        """Return the support hull of a combination inside [0, L]."""
        if not atoms:
            return Fraction(0), Fraction(0)
        low, high = self.generator.support
        shifts = [k for k, _ in atoms]
        scale = 2**level
        lo = max(Fraction(0), Fraction(min(shifts) + low, scale))
        hi = min(Fraction(self.length), Fraction(max(shifts) + high, scale))
        return lo, hi

    def lift(self, atoms: Mapping[Label, Fraction], level: int, taps=None) -> Atoms:
        """Rewrite level atoms on level + 1 by the refinement relation."""
        taps = taps if taps is not None else _fraction_taps(self.generator.filter)
        result: Atoms = {}
        for (k, i), value in atoms.items():
            for m, row, col, tap in taps:
                if row == i:
                    label = (2 * k + m, col)
                    result[label] = result.get(label, 0) + 2 * value * tap
        return self.clip(result, level + 1)

    def matrix(self, atoms: Sequence[Mapping[Label, Fraction]], level: int) -> scipy.sparse.csr_matrix:
        """Return the rows as a float sparse matrix over the atoms of a level."""
        rows = [{self.index(level, label): value for label, value in row.items()} for row in atoms]
        return linalg.sparse_to_csr(rows, self.size(level))

    def lift_matrix(self, level: int) -> scipy.sparse.csr_matrix:
        """Return T with (level atoms) = T (level + 1 atoms)."""
        first, last = self.bounds(level)
        r = self.generator.multiplicity
        units = [{(k, i): Fraction(1)} for k in range(first, last + 1) for i in range(r)]
        taps = _fraction_taps(self.generator.filter)
        return self.matrix([self.lift(unit, level, taps) for unit in units], level + 1)


def _to_atoms(row: Mapping[Label, sympy.Expr]) -> Atoms:
    return {label: linalg.to_fraction(value) for label, value in row.items()}


def _reflect_atoms(atoms: Mapping[Label, Fraction], level: int, length: int) -> Atoms:
    top = 2**level * length
    return {(top - k, i): value for (k, i), value in atoms.items()}


@attr.s(frozen=True)
class _Parts:
    """Everything one family needs to enumerate its elements."""

    generator: RefinableVector = attr.ib()
    wavelet_filter: FilterBank = attr.ib()
    left_scaling: BoundaryFunction = attr.ib()
    left_wavelet: BoundaryFunction = attr.ib()
    right_scaling: BoundaryFunction = attr.ib()
    right_wavelet: BoundaryFunction = attr.ib()
    scaling_start: int = attr.ib()
    wavelet_start: int = attr.ib()
    right_scaling_start: int = attr.ib()
    right_wavelet_start: int = attr.ib()


def _family_parts(endpoints: EndpointData, family: Family) -> _Parts:
    left, right = endpoints.left, endpoints.right
    if family is Family.PRIMAL:
        return _Parts(
            left.generator, left.pair.b, left.phi, left.psi, right.phi, right.psi,
            left.phi_start, left.psi_start, right.phi_start, right.psi_start,
        )
    return _Parts(
        left.dual, left.pair.b_dual, left.phi_dual, left.psi_dual, right.phi_dual,
        right.psi_dual, left.phi_dual_start, left.psi_dual_start, right.phi_dual_start,
        right.psi_dual_start,
    )


_Draft = Tuple[ElementRole, ElementSide, int, int, int, int, Atoms]


def _finish(drafts: Sequence[_Draft], space: AtomSpace, first_index: int) -> List[Element]:
    """Clip, drop exact duplicates (first copy wins) and number the elements.

    Equal atoms at different atom levels are different functions.
    """
    seen = set()
    elements = []
    for role, side, level, position, component, atom_level, atoms in drafts:
        atoms = space.clip(atoms, atom_level)
        key = (atom_level, frozenset(atoms.items()))
        if key in seen:
            _LOGGER.debug("Dropping duplicate %s element %s at level %d", side.value, position, level)
            continue
        seen.add(key)
        elements.append(
            Element(
                first_index + len(elements), role, side, level, position, component,
                atom_level, atoms, space.support(atoms, atom_level),
            )
        )
    return elements


def _scaling_drafts(parts: _Parts, level: int, length: int) -> List[_Draft]:
    r = parts.generator.multiplicity
    drafts: List[_Draft] = []
    role = ElementRole.SCALING
    for n, row in enumerate(parts.left_scaling.atoms):
        drafts.append((role, ElementSide.LEFT, level, n, 0, level, _to_atoms(row)))
    for k in range(parts.scaling_start, 2**level * length - parts.right_scaling_start + 1):
        for i in range(r):
            drafts.append((role, ElementSide.INTERIOR, level, k, i, level, {(k, i): Fraction(1)}))
    for n, row in enumerate(parts.right_scaling.atoms):
        atoms = _reflect_atoms(_to_atoms(row), level, length)
        drafts.append((role, ElementSide.RIGHT, level, n, 0, level, atoms))
    return drafts


def _interior_wavelet(bank_taps, k: int, i: int) -> Atoms:
    atoms: Atoms = {}
    for m, row, col, tap in bank_taps:
        if row == i:
            label = (2 * k + m, col)
            atoms[label] = atoms.get(label, 0) + 2 * tap
    return atoms


def _wavelet_drafts(parts: _Parts, level: int, length: int) -> List[_Draft]:
    r = parts.wavelet_filter.rows
    taps = _fraction_taps(parts.wavelet_filter)
    drafts: List[_Draft] = []
    role = ElementRole.WAVELET
    for n, row in enumerate(parts.left_wavelet.atoms):
        drafts.append((role, ElementSide.LEFT, level, n, 0, level + 1, _to_atoms(row)))
    for k in range(parts.wavelet_start, 2**level * length - parts.right_wavelet_start + 1):
        for i in range(r):
            atoms = _interior_wavelet(taps, k, i)
            drafts.append((role, ElementSide.INTERIOR, level, k, i, level + 1, atoms))
    for n, row in enumerate(parts.right_wavelet.atoms):
        atoms = _reflect_atoms(_to_atoms(row), level + 1, length)
        drafts.append((role, ElementSide.RIGHT, level, n, 0, level + 1, atoms))
    return drafts


class _Coordinates:
    """Coordinates of atom combinations over a scaling set of one level."""

    def __init__(self, elements: Sequence[Element]):
        """Split the set into unit atoms and boundary blocks."""
        self.units: Dict[Label, int] = {}
        boundary = []
        for n, element in enumerate(elements):
            if element.side is ElementSide.INTERIOR:
                (label,) = element.atoms
                self.units[label] = n
            else:
                boundary.append(n)
        labels = sorted({label for n in boundary for label in elements[n].atoms})
        if set(labels) & set(self.units):
            raise BoundaryConstructionError("boundary elements overlap interior atoms")
        self.boundary = boundary
        self.labels = labels
        self.rows = [elements[n].atoms for n in boundary]
        if boundary:
            block = sympy.Matrix(
                [[sympy.Rational(row.get(label, 0)) for label in labels] for row in self.rows]
            )
            _, pivots = linalg.rref(block)
            if len(pivots) < len(boundary):
                raise BoundaryConstructionError("boundary elements are linearly dependent")
            inverse = block[:, list(pivots)].inv()
            self.pivots = [labels[p] for p in pivots]
            self.inverse = [
                [linalg.to_fraction(inverse[a, b]) for b in range(inverse.cols)]
                for a in range(inverse.rows)
            ]
        else:
            self.pivots, self.inverse = [], []

    def solve(self, atoms: Mapping[Label, Fraction]) -> Dict[int, Fraction]:
        """Return x with atoms = sum_n x[n] element_n, verified exactly."""
        result: Dict[int, Fraction] = {}
        residual: Atoms = {}
        for label, value in atoms.items():
            n = self.units.get(label)
            if n is None:
                residual[label] = value
            else:
                result[n] = value
        if not residual:
            return result
        picked = [residual.get(label, Fraction(0)) for label in self.pivots]
        weights = [
            sum((picked[a] * self.inverse[a][b] for a in range(len(picked))), Fraction(0))
            for b in range(len(self.boundary))
        ]
        for label in set(residual) | set(self.labels):
            total = sum(
                (w * row.get(label, 0) for w, row in zip(weights, self.rows)), Fraction(0)
            )
            if total != residual.get(label, 0):
                raise SingularSystem(f"atom {label} is not spanned by the scaling functions")
        for n, weight in zip(self.boundary, weights):
            if weight != 0:
                result[n] = weight
        return result


@attr.s(frozen=True)
class Refinement:
    """Rows of [P; Q] over the scaling set of the next level."""

    level: int = attr.ib()
    scaling: Tuple[Dict[int, Fraction], ...] = attr.ib(eq=False)
    wavelet: Tuple[Dict[int, Fraction], ...] = attr.ib(eq=False)
    width: int = attr.ib()

    @property
    def rows(self) -> List[Dict[int, Fraction]]:
        """Return the rows of P followed by those of Q."""
        return list(self.scaling) + list(self.wavelet)

    def exact(self) -> sympy.Matrix:
        """Return [P; Q] as a rational matrix."""
        matrix = sympy.zeros(len(self.rows), self.width)
        for a, row in enumerate(self.rows):
            for b, value in row.items():
                matrix[a, b] = sympy.Rational(value.numerator, value.denominator)
        return matrix

    def numeric(self) -> scipy.sparse.csr_matrix:
        """Return [P; Q] in double precision."""
        return linalg.sparse_to_csr(self.rows, self.width)

    def as_raw(self) -> dict:
        """Serialize as JSON arrays of rationals."""
        dense = self.exact()
        size = len(self.scaling)
        return {
            "level": self.level,
            "P": [[rational_to_raw(x) for x in dense.row(a)] for a in range(size)],
            "Q": [[rational_to_raw(x) for x in dense.row(a)] for a in range(size, dense.rows)],
        }


@attr.s(frozen=True)
class IntervalBasis:
    """B_{J,N} = Phi_J and Psi_j for J <= j < N on [0, L]."""

    name: str = attr.ib()
    generator: RefinableVector = attr.ib(repr=False)
    family: Family = attr.ib()
    length: int = attr.ib()
    coarse: int = attr.ib()
    finest: int = attr.ib()
    elements: Tuple[Element, ...] = attr.ib(repr=False)
    parts: Optional[_Parts] = attr.ib(default=None, eq=False, repr=False)
    endpoints: Optional[EndpointData] = attr.ib(default=None, eq=False, repr=False)
    _cache: dict = attr.ib(init=False, factory=dict, eq=False, repr=False)

    @property
    def size(self) -> int:
        """Return the number of elements."""
        return len(self.elements)

    def __len__(self) -> int:
        """Return the number of elements."""
        return len(self.elements)

    @property
    def space(self) -> AtomSpace:
        """Return the atoms of the generator on [0, L]."""
        return AtomSpace(self.generator, self.length)

    @property
    def top_level(self) -> int:
        """Return the finest atom level used by any element."""
        return max(element.atom_level for element in self.elements)

    def memo(self, key, build):
        """Return a cached derived value, building it on first use."""
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def element(self, index: int) -> Element:
        """Return an element by id."""
        if not 0 <= index < len(self.elements):
            raise UnknownElement(f"{self.name} has no element {index}")
        return self.elements[index]

    def indices(self, role: ElementRole, level: int) -> List[int]:
        """Return the ids of one level of scaling functions or wavelets."""
        return [e.index for e in self.elements if e.role is role and e.level == level]

    def _require_parts(self) -> _Parts:
        if self.parts is None:
            raise WaveletSpecError(f"{self.name} has no multiresolution structure")
        return self.parts

    def scaling_set(self, level: int) -> List[Element]:
        """Return Phi_level numbered from 0."""
        return self.memo(
            ("scaling", level),
            lambda: _finish(_scaling_drafts(self._require_parts(), level, self.length), self.space, 0),
        )

    def wavelet_set(self, level: int) -> List[Element]:
        """Return Psi_level numbered from 0."""
        return self.memo(
            ("wavelet", level),
            lambda: _finish(_wavelet_drafts(self._require_parts(), level, self.length), self.space, 0),
        )

    def refinement(self, level: int) -> Refinement:
        """Return [P_j; Q_j] with Phi_j = P_j Phi_j+1 and Psi_j = Q_j Phi_j+1."""
        return self.memo(("refinement", level), lambda: self._build_refinement(level))

    def _build_refinement(self, level: int) -> Refinement:
        space = self.space
        taps = _fraction_taps(self.generator.filter)
        target = self.scaling_set(level + 1)
        coordinates = _Coordinates(target)
        scaling = tuple(
            coordinates.solve(space.lift(e.atoms, level, taps)) for e in self.scaling_set(level)
        )
        wavelet = tuple(coordinates.solve(e.atoms) for e in self.wavelet_set(level))
        if len(scaling) + len(wavelet) != len(target):
            raise BoundaryConstructionError(
                f"level {level}: {len(scaling)} + {len(wavelet)} elements for "
                f"{len(target)} scaling functions of level {level + 1}"
            )
        _LOGGER.debug("Refinement matrices of level %d: %d x %d", level, len(target), len(target))
        return Refinement(level, scaling, wavelet, len(target))

    def dual_refinement(self, level: int) -> sympy.Matrix:
        """Return [P~; Q~] = 2 [P; Q]^-T exactly."""
        matrix = self.refinement(level).exact()
        if linalg.rank(matrix) < matrix.rows:
            raise BoundaryConstructionError(f"[P; Q] of level {level} is singular")
        return (2 * linalg.solve(matrix.T, sympy.eye(matrix.rows))).applyfunc(sympy.expand)

    def normalized_scales(self, order: int = 0) -> np.ndarray:
        """Return 2^(j (1/2 - order)) per element, j its level."""
        return np.array([affine_scale(e.level, order) for e in self.elements])

    def coefficient_matrix(self, level: Optional[int] = None) -> scipy.sparse.csr_matrix:
        """Return the elements as rows over the atoms of a common level."""
        level = self.top_level if level is None else level
        return self.memo(("coefficients", level), lambda: self._coefficients(level))

    def _coefficients(self, level: int) -> scipy.sparse.csr_matrix:
        space = self.space
        groups: Dict[int, List[Element]] = {}
        for element in self.elements:
            if element.atom_level > level:
                raise WaveletSpecError(f"element {element.index} is finer than level {level}")
            groups.setdefault(element.atom_level, []).append(element)
        blocks, order = [], []
        for start in sorted(groups):
            matrix = space.matrix([e.atoms for e in groups[start]], start)
            for step in range(start, level):
                lift = self.memo(("lift", step), lambda step=step: space.lift_matrix(step))
                matrix = matrix @ lift
            blocks.append(matrix)
            order.extend(e.index for e in groups[start])
        stacked = scipy.sparse.vstack(blocks).tocsr()
        return stacked[np.argsort(order)]

    def element_table(self) -> str:
        """Export id, role, side, level, position, component and support as CSV."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(
            ["id", "role", "side", "level", "position", "component", "support_lo", "support_hi"]
        )
        for e in self.elements:
            writer.writerow(
                [
                    e.index, e.role.value, e.side.value, e.level, e.position, e.component,
                    str(e.support[0]), str(e.support[1]),
                ]
            )
        return buffer.getvalue()

    def refinement_json(self) -> str:
        """Export every refinement matrix of the basis."""
        levels = [self.refinement(j).as_raw() for j in range(self.coarse, self.finest)]
        return json.dumps({"basis": self.name, "family": self.family.value, "levels": levels})


def atom_gram(
    table: GramTable, basis: IntervalBasis, level: int, other: Optional[IntervalBasis] = None
) -> scipy.sparse.csr_matrix:
    """Return [<atom^(m), atom'^(m)>] on [0, L] over the atoms of one level.

    Rows follow the atoms of basis, columns those of other (default basis).
    """
    other = basis if other is None else other
    r = table.multiplicity
    first, _ = basis.space.bounds(level)
    size = basis.space.size(level)
    other_first, _ = other.space.bounds(level)
    other_size = other.space.size(level)
    cells = 2**level * basis.length
    shifts = np.arange(cells)
    cell = table.numeric_cell()
    if not np.any(cell.imag):
        cell = cell.real
    factor = 2.0 ** (level * (2 * table.order - 1))
    rows, cols, data = [], [], []
    for a, j in enumerate(table.primal_shifts):
        for b, k in enumerate(table.dual_shifts):
            for i in range(r):
                for l in range(r):
                    value = cell[a * r + i, b * r + l]
                    if value == 0:
                        continue
                    row = (j + shifts - first) * r + i
                    col = (k + shifts - other_first) * r + l
                    mask = (row >= 0) & (row < size) & (col >= 0) & (col < other_size)
                    rows.append(row[mask])
                    cols.append(col[mask])
                    data.append(np.full(int(mask.sum()), factor * value))
    if not rows:
        return scipy.sparse.csr_matrix((size, other_size))
    return scipy.sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, other_size),
    ).tocsr()


def gram_table(
    basis: IntervalBasis, order: int, other: Optional[IntervalBasis] = None
) -> GramTable:
    """Return the memoized generator Gram integrals of one derivative order."""
    other = basis if other is None else other
    if other.generator is basis.generator:
        return basis.memo(("table", order), lambda: gram_integrals(basis.generator, basis.generator, order))
    return basis.memo(
        ("table", order, other.family),
        lambda: gram_integrals(basis.generator, other.generator, order),
    )


def assemble_basis(
    spec: BasisSpec,
    coarse: Optional[int] = None,
    finest: Optional[int] = None,
    family: Family = Family.PRIMAL,
    endpoints: Optional[EndpointData] = None,
) -> IntervalBasis:
    """Build B_{J,N} of a spec, the dual one for family DUAL."""
    endpoints = endpoints or build_endpoints(spec)
    bounds = minimal_levels(endpoints.left, endpoints.right, spec.length)
    coarse = coarse if coarse is not None else spec.coarse
    finest = finest if finest is not None else spec.finest
    minimum = bounds.primal if family is Family.PRIMAL else bounds.dual
    if coarse is None:
        coarse = minimum
    if coarse < minimum:
        raise LevelTooCoarse(f"J = {coarse} is below the minimal {family.value} level {minimum}")
    if finest is None:
        finest = coarse + 1
    if finest < coarse:
        raise WaveletSpecError(f"N = {finest} must not be below J = {coarse}")
    parts = _family_parts(endpoints, family)
    basis = IntervalBasis(
        spec.name, parts.generator, family, spec.length, coarse, finest, (), parts, endpoints
    )
    elements: List[Element] = []
    for element in basis.scaling_set(coarse):
        elements.append(attr.evolve(element, index=len(elements)))
    for level in range(coarse, finest):
        for element in basis.wavelet_set(level):
            elements.append(attr.evolve(element, index=len(elements)))
    basis = attr.evolve(basis, elements=tuple(elements))
    _LOGGER.info(
        "Built %s %s basis B_{%d,%d} with %d elements",
        spec.name, family.value, coarse, finest, len(elements),
    )
    return basis


def fem_basis(finest: int, length: int = 1) -> IntervalBasis:
    """Return the hats phi(2^N x - k), k = 1..2^N L - 1."""
    generator, _ = load_generators(FILTER_CDF22)
    space = AtomSpace(generator, length)
    drafts = [
        (ElementRole.SCALING, ElementSide.INTERIOR, finest, k, 0, finest, {(k, 0): Fraction(1)})
        for k in range(1, 2**finest * length)
    ]
    elements = _finish(drafts, space, 0)
    return IntervalBasis("fem", generator, Family.PRIMAL, length, finest, finest, tuple(elements))


def hermite_biharmonic_basis(finest: int) -> IntervalBasis:
    """Return phi(2x - 1) and phi(2^(j+1) x - 2k - 1), k < 2^j, for j = 1..N."""
    generator, _ = load_generators(FILTER_HERMITE_CUBIC)
    space = AtomSpace(generator, 1)
    r = generator.multiplicity
    drafts = [
        (ElementRole.SCALING, ElementSide.INTERIOR, 1, 1, i, 1, {(1, i): Fraction(1)})
        for i in range(r)
    ]
    for level in range(1, finest + 1):
        for k in range(2**level):
            for i in range(r):
                atoms = {(2 * k + 1, i): Fraction(1)}
                drafts.append(
                    (ElementRole.WAVELET, ElementSide.INTERIOR, level, k, i, level + 1, atoms)
                )
    elements = _finish(drafts, space, 0)
    _LOGGER.debug("Hermite biharmonic basis at N = %d: %d elements", finest, len(elements))
    return IntervalBasis("hermite", generator, Family.PRIMAL, 1, 1, finest, tuple(elements))


def element_form(
    basis: IntervalBasis, element: Element, derivative: int = 0, ctx=None
) -> PiecewiseForm:
    """Return the closed form of an element or of one of its derivatives."""
    if basis.generator.piecewise is None:
        raise MissingIntegralBackend(f"{basis.name} has no closed-form generator")
    bases = basis.memo(("form", derivative), lambda: basis.generator.derivative_forms(derivative))
    level = element.atom_level
    factor = Fraction(2) ** (level * derivative)
    forms, weights = [], []
    for (k, i), value in sorted(element.atoms.items()):
        forms.append(bases[i].dilate(level, k))
        weights.append(value * factor)
    return linear_combination(forms, weights, ctx).restrict(0, basis.length)


def evaluate_element(basis: IntervalBasis, index: int, x, derivative: int = 0) -> np.ndarray:
    """Evaluate an element at points of [0, L]."""
    element = basis.element(index)
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > basis.length)):
        raise WaveletSpecError(f"points outside [0, {basis.length}]")
    if basis.generator.piecewise is not None:
        return element_form(basis, element, derivative).evaluate(x)
    if derivative:
        raise MissingIntegralBackend("derivatives need a closed-form generator")
    values = basis.memo("dyadic", lambda: eval_dyadic(basis.generator, DYADIC_LEVEL))
    grid = values.grid
    result = np.zeros(x.shape, dtype=values.values.dtype)
    scale = 2**element.atom_level
    for (k, i), coefficient in element.atoms.items():
        column = values.values[:, i]
        result = result + float(coefficient) * np.interp(
            scale * x - k, grid, column, left=0.0, right=0.0
        )
    return result
