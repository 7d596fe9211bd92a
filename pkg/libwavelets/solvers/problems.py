"""Model problems, computed solutions and error measures."""

import logging
from fractions import Fraction
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import attr
import mpmath
import numpy as np
import sympy

from ..assembly import ConditioningReport, GalerkinSystem
from ..const import GAUSS_ORDER, ProblemType
from ..exceptions import InvalidPartition, WaveletSpecError, ZeroNorm
from ..piecewise import PiecewiseForm, as_fraction, linear_combination
from ..utils import is_double, parse_expression, read_json, to_context

_LOGGER = logging.getLogger(__name__)

Interval = Tuple[Fraction, Fraction]


def _parse_partition(raw) -> Tuple[Interval, ...]:
    try:
        partition = tuple((as_fraction(lo), as_fraction(hi)) for lo, hi in raw)
    except (TypeError, ValueError, WaveletSpecError) as err:
        raise InvalidPartition(f"malformed partition: {err}") from err
    if not partition:
        raise InvalidPartition("partition is empty")
    if partition[0][0] != 0 or partition[-1][1] != 1:
        raise InvalidPartition(
            f"partition covers [{partition[0][0]}, {partition[-1][1]}] instead of [0, 1]"
        )
    for (lo, hi), following in zip(partition, partition[1:] + (None,)):
        if lo >= hi:
            raise InvalidPartition(f"empty piece [{lo}, {hi}]")
        if following is not None and following[0] != hi:
            raise InvalidPartition(f"pieces [{lo}, {hi}] and {list(map(str, following))} do not meet")
    return partition


def _check_source(raw: dict, length: int = 1) -> None:
    form = PiecewiseForm.from_raw(raw, mpmath.fp)
    support = form.support()
    if support is not None and (support[0] < 0 or support[1] > length):
        raise WaveletSpecError(f"source extends beyond [0, {length}]")


@attr.s(frozen=True)
class HelmholtzProblem:
    """-u'' - k^2 u = f on (0, 1), u(0) = 0, u'(1) - i k u(1) = g."""

    name: str = attr.ib()
    wave_number: sympy.Expr = attr.ib()
    raw_source: dict = attr.ib(eq=False, repr=False)
    partition: Tuple[Interval, ...] = attr.ib(default=((Fraction(0), Fraction(1)),))
    radiation: sympy.Expr = attr.ib(default=sympy.Integer(0))
    precision: Optional[int] = attr.ib(default=None)

    @wave_number.validator
    def _positive(self, _, value):
        if not value.is_real or not value > 0:
            raise WaveletSpecError(f"wave number must be positive, got {value}")

    @classmethod
    def from_raw(cls, raw: dict) -> "HelmholtzProblem":
        """Parse and validate a problem file."""
        if raw.get("type", ProblemType.HELMHOLTZ.value) != ProblemType.HELMHOLTZ.value:
            raise WaveletSpecError(f"not a Helmholtz problem: {raw.get('type')!r}")
        for key in ("wave_number", "source"):
            if key not in raw:
                raise WaveletSpecError(f"problem is missing {key!r}")
        _check_source(raw["source"])
        partition = _parse_partition(raw.get("partition", [[0, 1]]))
        precision = raw.get("precision")
        if precision is not None and (not isinstance(precision, int) or precision < 15):
            raise WaveletSpecError(f"'precision' must be an integer >= 15, got {precision!r}")
        return cls(
            raw.get("name", "helmholtz"),
            parse_expression(raw["wave_number"]),
            raw["source"],
            partition,
            parse_expression(raw.get("radiation", 0)),
            precision,
        )

    @classmethod
    def from_file(cls, name) -> "HelmholtzProblem":
        """Load a problem file."""
        return cls.from_raw(read_json(name))

    @property
    def pieces(self) -> int:
        """Return M, the number of partition pieces."""
        return len(self.partition)

    def source(self, ctx) -> PiecewiseForm:
        """Return f in a numeric context."""
        return PiecewiseForm.from_raw(self.raw_source, ctx)

    def k(self, ctx):
        """Return the wave number in a numeric context."""
        return to_context(self.wave_number, ctx)

    def datum(self, ctx):
        """Return g in a numeric context."""
        return to_context(self.radiation, ctx)


@attr.s(frozen=True)
class BiharmonicProblem:
    """u'''' = f on (0, 1) with u = u' = 0 at both ends."""

    name: str = attr.ib()
    raw_source: dict = attr.ib(eq=False, repr=False)
    raw_exact: Optional[dict] = attr.ib(default=None, eq=False, repr=False)

    @classmethod
    def from_raw(cls, raw: dict) -> "BiharmonicProblem":
        """Parse and validate a problem file."""
        if raw.get("type") != ProblemType.BIHARMONIC.value:
            raise WaveletSpecError(f"not a biharmonic problem: {raw.get('type')!r}")
        if "source" not in raw:
            raise WaveletSpecError("problem is missing 'source'")
        _check_source(raw["source"])
        if raw.get("exact") is not None:
            _check_source(raw["exact"])
        return cls(raw.get("name", "biharmonic"), raw["source"], raw.get("exact"))

    @classmethod
    def from_file(cls, name) -> "BiharmonicProblem":
        """Load a problem file."""
        return cls.from_raw(read_json(name))

    def source(self, ctx=mpmath.fp) -> PiecewiseForm:
        """Return f in a numeric context."""
        return PiecewiseForm.from_raw(self.raw_source, ctx)

    def exact(self, ctx=mpmath.fp) -> Optional[PiecewiseForm]:
        """Return the true solution when the file ships one."""
        if self.raw_exact is None:
            return None
        return PiecewiseForm.from_raw(self.raw_exact, ctx)


def load_problem(name) -> Union[HelmholtzProblem, BiharmonicProblem]:
    """Load a problem file of either type."""
    raw = read_json(name)
    if raw.get("type") == ProblemType.BIHARMONIC.value:
        return BiharmonicProblem.from_raw(raw)
    return HelmholtzProblem.from_raw(raw)


@attr.s(frozen=True)
class SolutionField:
    """sum_n c_n g_n for closed-form trial functions g_n."""

    forms: Tuple[PiecewiseForm, ...] = attr.ib(eq=False, repr=False)
    coefficients: Sequence = attr.ib(eq=False, repr=False)
    ctx: object = attr.ib(default=mpmath.fp, eq=False, repr=False)
    metadata: Dict[str, object] = attr.ib(factory=dict)

    @coefficients.validator
    def _same_length(self, _, value):
        if len(value) != len(self.forms):
            raise WaveletSpecError(f"{len(value)} coefficients for {len(self.forms)} functions")

    def as_form(self) -> PiecewiseForm:
        """Return the solution as one piecewise form."""
        return linear_combination(self.forms, list(self.coefficients), self.ctx)

    def evaluate(self, x) -> np.ndarray:
        """Evaluate in double precision."""
        x = np.asarray(x, dtype=float)
        values = np.zeros(x.shape, dtype=complex)
        for form, coefficient in zip(self.forms, self.coefficients):
            if coefficient != 0:
                values += complex(coefficient) * form.evaluate(x)
        return values

    def samples(self, count: int = 1025) -> Tuple[np.ndarray, np.ndarray]:
        """Return equispaced points of [0, 1] with the solution values."""
        x = np.linspace(0.0, 1.0, count)
        return x, self.evaluate(x)


@attr.s(frozen=True)
class SolveResult:
    """A computed solution with the system and its conditioning."""

    field: SolutionField = attr.ib()
    report: ConditioningReport = attr.ib()
    system: Optional[GalerkinSystem] = attr.ib(default=None, eq=False, repr=False)


def _max_frequency(form: PiecewiseForm) -> float:
    return max(
        (abs(complex(term.omega)) for piece in form.pieces for term in piece.terms), default=0.0
    )


def _quadrature_points(forms: Sequence[PiecewiseForm], frequency: float) -> list:
    """Breakpoints of all forms, refined so that no piece spans more than one radian."""
    points = {Fraction(0), Fraction(1)}
    for form in forms:
        points.update(form.breakpoints)
    ordered = sorted(points)
    if frequency <= 1:
        return ordered
    refined = []
    for lo, hi in zip(ordered, ordered[1:]):
        steps = max(1, int(np.ceil(float(hi - lo) * frequency)))
        refined.extend(lo + (hi - lo) * Fraction(s, steps) for s in range(steps))
    refined.append(ordered[-1])
    return refined


def _quadrature_norms(
    approximate: Callable, exact: Callable, points: Sequence, order: int
) -> Tuple[float, float]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.array([float(p) for p in points])
    lo, hi = edges[:-1, None], edges[1:, None]
    x = 0.5 * (hi - lo) * nodes[None, :] + 0.5 * (hi + lo)
    w = 0.5 * (hi - lo) * weights[None, :]
    target = exact(x.ravel()).reshape(x.shape)
    error = approximate(x.ravel()).reshape(x.shape) - target
    return float(np.sum(w * np.abs(error) ** 2)), float(np.sum(w * np.abs(target) ** 2))


def relative_L2_error(  # pylint: disable=invalid-name
    solution: SolutionField,
    exact: Union[PiecewiseForm, Callable],
    ctx=None,
    order: int = GAUSS_ORDER,
) -> float:
    """Return 100 ||u_N - u|| / ||u|| in percent.

    With an extended context and a closed-form u the difference is integrated
    exactly in that context. Otherwise a composite Gauss-Legendre rule runs on
    the breakpoints of both operands, refined to one radian per cell, so the
    error is never formed as a difference of squared norms.
    """
    if isinstance(exact, PiecewiseForm) and ctx is not None and not is_double(ctx):
        difference = solution.as_form().to_context(ctx) - exact.to_context(ctx)
        norm = exact.to_context(ctx).norm()
        if norm == 0:
            raise ZeroNorm("the reference solution vanishes")
        return float(100 * difference.norm() / norm)
    forms = list(solution.forms)
    frequency = max((_max_frequency(f) for f in forms), default=0.0)
    if isinstance(exact, PiecewiseForm):
        forms.append(exact)
        frequency = max(frequency, _max_frequency(exact))
        reference = exact.evaluate
    else:
        reference = exact
    points = _quadrature_points(forms, frequency)
    error, norm = _quadrature_norms(solution.evaluate, reference, points, order)
    if norm == 0:
        raise ZeroNorm("the reference solution vanishes")
    value = 100.0 * np.sqrt(error / norm)
    _LOGGER.debug("Relative L2 error %.6e %% over %d cells", value, len(points) - 1)
    return float(value)
