"""Piecewise polynomial-exponential functions with exact integration.

A PiecewiseForm is a finite list of disjoint pieces [lo, hi]; on each piece
the function is sum_terms p(x - lo) * exp(i * omega * (x - lo)). Polynomials
are stored in the local variable t = x - lo so that shifts, dilations and
products stay well conditioned on short pieces.

With ``ctx=None`` every coefficient is a ``fractions.Fraction`` and only
omega = 0 is allowed; integration is then exact. With an mpmath context
(``mpmath.fp`` or an ``MPContext``) coefficients are context numbers and
frequencies may be nonzero.
"""

from bisect import bisect_left
from fractions import Fraction
from math import factorial
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import attr
import numpy as np
import sympy

from .const import OSCILLATION_SERIES_LIMIT
from .exceptions import WaveletSpecError
from .utils import is_double, parse_expression, parse_rational, to_context

Poly = Tuple


def as_fraction(value) -> Fraction:
    """Convert an int, Fraction, sympy Rational or "p/q" string to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    rational = parse_rational(value) if not isinstance(value, sympy.Rational) else value
    return Fraction(int(rational.p), int(rational.q))


def _convert(value, ctx):
    """Bring an exact or foreign number into ctx (None keeps Fractions)."""
    if ctx is None:
        if isinstance(value, sympy.Basic):
            return as_fraction(value)
        return Fraction(value)
    if isinstance(value, Fraction):
        if is_double(ctx):
            return value.numerator / value.denominator
        return ctx.mpf(value.numerator) / value.denominator
    return to_context(value, ctx)


def _is_zero(value) -> bool:
    return value == 0


def _poly_trim(poly: Sequence) -> Poly:
    poly = list(poly)
    while poly and _is_zero(poly[-1]):
        poly.pop()
    return tuple(poly)


def _poly_add(left: Sequence, right: Sequence) -> Poly:
    size = max(len(left), len(right))
    return tuple(
        (left[n] if n < len(left) else 0) + (right[n] if n < len(right) else 0)
        for n in range(size)
    )


def _poly_mul(left: Sequence, right: Sequence) -> Poly:
    if not left or not right:
        return ()
    result = [0] * (len(left) + len(right) - 1)
    for i, x in enumerate(left):
        if _is_zero(x):
            continue
        for j, y in enumerate(right):
            result[i + j] += x * y
    return tuple(result)


def _poly_shift(poly: Sequence, delta) -> Poly:
    """Coefficients of p(t + delta)."""
    if _is_zero(delta) or len(poly) < 2:
        return tuple(poly)
    result = list(poly)
    # Repeated synthetic division (Taylor shift).
    size = len(result)
    for i in range(size - 1):
        for n in range(size - 2, i - 1, -1):
            result[n] += delta * result[n + 1]
    return tuple(result)


def _poly_dilate(poly: Sequence, factor) -> Poly:
    return tuple(c * factor**n for n, c in enumerate(poly))


def _poly_derivative(poly: Sequence) -> Poly:
    return tuple(n * c for n, c in enumerate(poly) if n > 0)


def _poly_value(poly: Sequence, t):
    total = 0
    for c in reversed(poly):
        total = total * t + c
    return total


@attr.s(frozen=True, slots=True)
class Term:
    """p(t) * exp(i * omega * t) in the local variable of a piece."""

    coeffs: Poly = attr.ib()
    omega: object = attr.ib(default=0)


@attr.s(frozen=True, slots=True)
class Piece:
    """One interval [lo, hi] with its terms."""

    lo: Fraction = attr.ib()
    hi: Fraction = attr.ib()
    terms: Tuple[Term, ...] = attr.ib()

    @property
    def width(self) -> Fraction:
        """Return hi - lo."""
        return self.hi - self.lo


def _merge_terms(terms: Iterable[Term]) -> Tuple[Term, ...]:
    merged: Dict[object, Poly] = {}
    for term in terms:
        key = term.omega
        merged[key] = _poly_add(merged[key], term.coeffs) if key in merged else term.coeffs
    result = []
    for omega, coeffs in merged.items():
        coeffs = _poly_trim(coeffs)
        if coeffs:
            result.append(Term(coeffs, omega))
    return tuple(result)


def _moment_integrals(degree: int, omega, width, ctx) -> List:
    """Return I_n = int_0^width t^n exp(i omega t) dt for n = 0..degree."""
    if _is_zero(omega):
        return [width ** (n + 1) / (n + 1) for n in range(degree + 1)]
    iw = ctx.mpc(0, omega) if not is_double(ctx) else 1j * omega
    if abs(omega * width) <= OSCILLATION_SERIES_LIMIT:
        eps = ctx.eps
        result = []
        for n in range(degree + 1):
            total = 0
            power = width ** (n + 1)
            s = 0
            while True:
                term = power / ((n + s + 1) * factorial(s))
                total += term
                if abs(term) <= eps * abs(total) or s > 200:
                    break
                s += 1
                power = power * iw * width
            result.append(total)
        return result
    phase = ctx.expj(omega * width)
    result = [(phase - 1) / iw]
    for n in range(1, degree + 1):
        result.append((width**n * phase - n * result[-1]) / iw)
    return result


def _integrate_piece(piece: Piece, ctx):
    if ctx is None:
        width = piece.width
    else:
        width = _convert(piece.width, ctx)
    total = 0
    for term in piece.terms:
        moments = _moment_integrals(len(term.coeffs) - 1, term.omega, width, ctx)
        total += sum(c * m for c, m in zip(term.coeffs, moments))
    return total


def _restrict_term(term: Term, delta, ctx) -> Term:
    coeffs = _poly_shift(term.coeffs, delta)
    if not _is_zero(term.omega) and not _is_zero(delta):
        phase = ctx.expj(term.omega * delta)
        coeffs = tuple(c * phase for c in coeffs)
    return Term(coeffs, term.omega)


def _restrict_piece(piece: Piece, lo: Fraction, hi: Fraction, ctx) -> Piece:
    if lo == piece.lo:
        return Piece(lo, hi, piece.terms)
    delta = _convert(lo - piece.lo, ctx)
    return Piece(lo, hi, tuple(_restrict_term(t, delta, ctx) for t in piece.terms))


@attr.s(frozen=True)
class PiecewiseForm:
    """Function given by polynomial-exponential terms on disjoint pieces."""

    pieces: Tuple[Piece, ...] = attr.ib()
    ctx: object = attr.ib(default=None, eq=False)

    def __attrs_post_init__(self):
        """Check pieces are sorted and disjoint."""
        previous = None
        for piece in self.pieces:
            if piece.lo >= piece.hi:
                raise WaveletSpecError(f"empty piece [{piece.lo}, {piece.hi}]")
            if previous is not None and piece.lo < previous:
                raise WaveletSpecError("pieces overlap or are not sorted")
            if self.ctx is None and any(not _is_zero(t.omega) for t in piece.terms):
                raise WaveletSpecError("exact forms cannot carry oscillating terms")
            previous = piece.hi

    @classmethod
    def zero(cls, ctx=None) -> "PiecewiseForm":
        """Return the zero function."""
        return cls((), ctx)

    @classmethod
    def polynomial(cls, lo, hi, coeffs: Sequence, ctx=None) -> "PiecewiseForm":
        """Return sum_n coeffs[n] x^n on [lo, hi]."""
        lo, hi = as_fraction(lo), as_fraction(hi)
        local = _poly_shift(tuple(_convert(c, ctx) for c in coeffs), _convert(lo, ctx))
        local = _poly_trim(local)
        terms = (Term(local, 0),) if local else ()
        return cls((Piece(lo, hi, terms),) if terms else (), ctx)

    @classmethod
    def exponential(cls, lo, hi, omega, coefficient, ctx) -> "PiecewiseForm":
        """Return coefficient * exp(i omega x) on [lo, hi]."""
        lo, hi = as_fraction(lo), as_fraction(hi)
        omega = _convert(omega, ctx)
        value = _convert(coefficient, ctx) * ctx.expj(omega * _convert(lo, ctx))
        return cls((Piece(lo, hi, (Term((value,), omega),)),), ctx)

    @classmethod
    def from_raw(cls, raw: dict, ctx=None) -> "PiecewiseForm":
        """Parse raw JSON; coefficients refer to the global variable x."""
        forms = []
        try:
            for piece in raw["pieces"]:
                lo, hi = (as_fraction(x) for x in piece["interval"])
                for term in piece["terms"]:
                    omega = parse_expression(term.get("omega", 0))
                    coeffs = [parse_expression(c) for c in term["coeffs"]]
                    if omega == 0:
                        if ctx is None and any(not c.is_Rational for c in coeffs):
                            raise WaveletSpecError(
                                "irrational coefficients need a numeric context"
                            )
                        forms.append(cls.polynomial(lo, hi, coeffs, ctx))
                    else:
                        if ctx is None:
                            raise WaveletSpecError("oscillating terms need a numeric context")
                        forms.append(_global_term(lo, hi, coeffs, omega, ctx))
        except (KeyError, TypeError) as err:
            raise WaveletSpecError(f"malformed piecewise form: {err}") from err
        return linear_combination(forms, [1] * len(forms), ctx)

    def as_raw(self) -> dict:
        """Serialize with coefficients in the global variable x."""
        pieces = []
        for piece in self.pieces:
            terms = []
            for term in piece.terms:
                if self.ctx is None:
                    coeffs = _poly_shift(term.coeffs, -piece.lo)
                    terms.append({"coeffs": [str(c) for c in coeffs], "omega": "0"})
                else:
                    lo = _convert(piece.lo, self.ctx)
                    coeffs = _poly_shift(term.coeffs, -lo)
                    if not _is_zero(term.omega):
                        phase = self.ctx.expj(-term.omega * lo)
                        coeffs = tuple(c * phase for c in coeffs)
                    terms.append(
                        {
                            "coeffs": [_number_to_raw(c) for c in coeffs],
                            "omega": _number_to_raw(term.omega),
                        }
                    )
            pieces.append({"interval": [str(piece.lo), str(piece.hi)], "terms": terms})
        return {"pieces": pieces}

    @property
    def is_exact(self) -> bool:
        """Whether coefficients are exact rationals."""
        return self.ctx is None

    @property
    def breakpoints(self) -> List[Fraction]:
        """Return the sorted piece endpoints."""
        points = set()
        for piece in self.pieces:
            points.update((piece.lo, piece.hi))
        return sorted(points)

    def support(self) -> Optional[Tuple[Fraction, Fraction]]:
        """Return the hull of the pieces, None for the zero function."""
        if not self.pieces:
            return None
        return self.pieces[0].lo, self.pieces[-1].hi

    def to_context(self, ctx) -> "PiecewiseForm":
        """Return the same function with coefficients in ctx."""
        if ctx is self.ctx:
            return self
        if ctx is None:
            raise WaveletSpecError("numeric forms cannot be made exact")
        pieces = tuple(
            Piece(
                p.lo,
                p.hi,
                tuple(
                    Term(
                        tuple(_convert(c, ctx) for c in t.coeffs),
                        0 if _is_zero(t.omega) else _convert(t.omega, ctx),
                    )
                    for t in p.terms
                ),
            )
            for p in self.pieces
        )
        return PiecewiseForm(pieces, ctx)

    def _common_ctx(self, other: "PiecewiseForm"):
        if self.ctx is None:
            return other.ctx
        if other.ctx is not None and other.ctx is not self.ctx:
            raise WaveletSpecError("forms live in different numeric contexts")
        return self.ctx

    def scale(self, factor) -> "PiecewiseForm":
        """Return factor * self."""
        ctx = self.ctx
        if ctx is None and not isinstance(factor, (int, Fraction, sympy.Rational)):
            raise WaveletSpecError("exact forms only scale by rationals")
        factor = _convert(factor, ctx)
        pieces = []
        for piece in self.pieces:
            terms = tuple(Term(tuple(c * factor for c in t.coeffs), t.omega) for t in piece.terms)
            pieces.append(Piece(piece.lo, piece.hi, _merge_terms(terms)))
        return PiecewiseForm(tuple(p for p in pieces if p.terms), ctx)

    def __neg__(self) -> "PiecewiseForm":
        """Return -self."""
        return self.scale(-1)

    def __add__(self, other: "PiecewiseForm") -> "PiecewiseForm":
        """Return self + other."""
        ctx = self._common_ctx(other)
        return linear_combination([self, other], [1, 1], ctx)

    def __sub__(self, other: "PiecewiseForm") -> "PiecewiseForm":
        """Return self - other."""
        ctx = self._common_ctx(other)
        return linear_combination([self, other], [1, -1], ctx)

    def __mul__(self, other) -> "PiecewiseForm":
        """Return the pointwise product with a form or a scalar."""
        if not isinstance(other, PiecewiseForm):
            return self.scale(other)
        ctx = self._common_ctx(other)
        left, right = self.to_context(ctx), other.to_context(ctx)
        pieces = []
        for lo, hi, first, second in _overlaps(left.pieces, right.pieces, ctx):
            terms = [
                Term(_poly_mul(s.coeffs, t.coeffs), s.omega + t.omega)
                for s in first.terms
                for t in second.terms
            ]
            merged = _merge_terms(terms)
            if merged:
                pieces.append(Piece(lo, hi, merged))
        return PiecewiseForm(tuple(pieces), ctx)

    __rmul__ = scale

    def conjugate(self) -> "PiecewiseForm":
        """Return the complex conjugate."""
        if self.ctx is None:
            return self
        conj = self.ctx.conj
        pieces = tuple(
            Piece(
                p.lo,
                p.hi,
                tuple(Term(tuple(conj(c) for c in t.coeffs), -t.omega) for t in p.terms),
            )
            for p in self.pieces
        )
        return PiecewiseForm(pieces, self.ctx)

    def derivative(self, order: int = 1) -> "PiecewiseForm":
        """Return the piecewise derivative (jumps are ignored)."""
        form = self
        for _ in range(order):
            pieces = []
            for piece in form.pieces:
                terms = []
                for term in piece.terms:
                    coeffs = _poly_derivative(term.coeffs)
                    if not _is_zero(term.omega):
                        iw = 1j * term.omega if is_double(form.ctx) else form.ctx.mpc(0, term.omega)
                        coeffs = _poly_add(coeffs, tuple(iw * c for c in term.coeffs))
                    terms.append(Term(coeffs, term.omega))
                merged = _merge_terms(terms)
                if merged:
                    pieces.append(Piece(piece.lo, piece.hi, merged))
            form = PiecewiseForm(tuple(pieces), form.ctx)
        return form

    def dilate(self, level: int, shift: int = 0) -> "PiecewiseForm":
        """Return x -> self(2^level x - shift)."""
        factor = Fraction(2) ** level
        scale = _convert(factor, self.ctx)
        pieces = tuple(
            Piece(
                (p.lo + shift) / factor,
                (p.hi + shift) / factor,
                tuple(
                    Term(
                        _poly_dilate(t.coeffs, scale),
                        0 if _is_zero(t.omega) else t.omega * scale,
                    )
                    for t in p.terms
                ),
            )
            for p in self.pieces
        )
        return PiecewiseForm(pieces, self.ctx)

    def reflect(self, center=0) -> "PiecewiseForm":
        """Return x -> self(center - x)."""
        center = as_fraction(center)
        pieces = []
        for piece in reversed(self.pieces):
            width = _convert(piece.width, self.ctx)
            terms = []
            for term in piece.terms:
                shifted = _poly_shift(term.coeffs, width)
                coeffs = tuple(-c if n % 2 else c for n, c in enumerate(shifted))
                if _is_zero(term.omega):
                    terms.append(Term(coeffs, 0))
                else:
                    phase = self.ctx.expj(term.omega * width)
                    terms.append(Term(tuple(c * phase for c in coeffs), -term.omega))
            pieces.append(Piece(center - piece.hi, center - piece.lo, tuple(terms)))
        return PiecewiseForm(tuple(pieces), self.ctx)

    def restrict(self, lo, hi) -> "PiecewiseForm":
        """Return self * chi[lo, hi]."""
        lo, hi = as_fraction(lo), as_fraction(hi)
        pieces = []
        for piece in self.pieces:
            start, stop = max(lo, piece.lo), min(hi, piece.hi)
            if start < stop:
                pieces.append(_restrict_piece(piece, start, stop, self.ctx))
        return PiecewiseForm(tuple(pieces), self.ctx)

    def refine(self, points: Iterable) -> "PiecewiseForm":
        """Split pieces at the given points without changing the function."""
        cuts = sorted({as_fraction(x) for x in points})
        pieces = []
        for piece in self.pieces:
            inner = [x for x in cuts if piece.lo < x < piece.hi]
            edges = [piece.lo] + inner + [piece.hi]
            for start, stop in zip(edges, edges[1:]):
                pieces.append(_restrict_piece(piece, start, stop, self.ctx))
        return PiecewiseForm(tuple(pieces), self.ctx)

    def integrate(self):
        """Return the integral over the real line."""
        total = Fraction(0) if self.ctx is None else 0
        for piece in self.pieces:
            total += _integrate_piece(piece, self.ctx)
        return total

    def inner(self, other: "PiecewiseForm"):
        """Return the L2 inner product int self * conj(other)."""
        ctx = self._common_ctx(other)
        left = self.to_context(ctx)
        right = other.to_context(ctx).conjugate()
        total = Fraction(0) if ctx is None else 0
        for lo, hi, first, second in _overlaps(left.pieces, right.pieces, ctx):
            width = hi - lo if ctx is None else _convert(hi - lo, ctx)
            for s in first.terms:
                for t in second.terms:
                    coeffs = _poly_mul(s.coeffs, t.coeffs)
                    moments = _moment_integrals(len(coeffs) - 1, s.omega + t.omega, width, ctx)
                    total += sum(c * m for c, m in zip(coeffs, moments))
        return total

    def norm(self):
        """Return the L2 norm."""
        value = self.inner(self)
        if self.ctx is None:
            return sympy.sqrt(sympy.Rational(value.numerator, value.denominator))
        return self.ctx.sqrt(self.ctx.re(value) if not is_double(self.ctx) else abs(value))

    def value_at(self, x, side: str = "left", derivative: int = 0):
        """Return the (one-sided) value of a derivative at a rational point."""
        x = as_fraction(x)
        zero = Fraction(0) if self.ctx is None else 0
        for piece in self.pieces:
            inside = piece.lo < x <= piece.hi if side == "left" else piece.lo <= x < piece.hi
            if not inside:
                continue
            if derivative:
                local = PiecewiseForm((piece,), self.ctx).derivative(derivative)
                if not local.pieces:
                    return zero
                piece = local.pieces[0]
            t = _convert(x - piece.lo, self.ctx)
            total = zero
            for term in piece.terms:
                value = _poly_value(term.coeffs, t)
                if not _is_zero(term.omega):
                    value *= self.ctx.expj(term.omega * t)
                total += value
            return total
        return zero

    def evaluate(self, x) -> np.ndarray:
        """Evaluate at an array of points in double precision."""
        x = np.asarray(x, dtype=float)
        values = np.zeros(x.shape, dtype=complex)
        for index, piece in enumerate(self.pieces):
            lo, hi = float(piece.lo), float(piece.hi)
            last = index == len(self.pieces) - 1 or self.pieces[index + 1].lo > piece.hi
            mask = (x >= lo) & ((x <= hi) if last else (x < hi))
            if not np.any(mask):
                continue
            t = x[mask] - lo
            for term in piece.terms:
                coeffs = np.array([complex(c) for c in term.coeffs])
                part = np.polynomial.polynomial.polyval(t, coeffs)
                if not _is_zero(term.omega):
                    part = part * np.exp(1j * float(term.omega) * t)
                values[mask] += part
        return values


def _number_to_raw(value):
    if isinstance(value, (int, Fraction)):
        return str(value)
    value = complex(value)
    return [repr(value.real), repr(value.imag)]


def _global_term(lo, hi, coeffs, omega, ctx) -> PiecewiseForm:
    """p(x) exp(i omega x) on [lo, hi] with global coefficients."""
    omega = _convert(omega, ctx)
    lo_value = _convert(lo, ctx)
    local = _poly_shift(tuple(_convert(c, ctx) for c in coeffs), lo_value)
    phase = ctx.expj(omega * lo_value)
    local = tuple(c * phase for c in local)
    return PiecewiseForm((Piece(lo, hi, (Term(local, omega),)),), ctx)


def _overlaps(left: Sequence[Piece], right: Sequence[Piece], ctx):
    """Yield (lo, hi, left piece, right piece) restricted to common intervals."""
    i = j = 0
    while i < len(left) and j < len(right):
        first, second = left[i], right[j]
        lo, hi = max(first.lo, second.lo), min(first.hi, second.hi)
        if lo < hi:
            yield lo, hi, _restrict_piece(first, lo, hi, ctx), _restrict_piece(second, lo, hi, ctx)
        if first.hi <= second.hi:
            i += 1
        else:
            j += 1


def linear_combination(
    forms: Sequence[PiecewiseForm], coefficients: Sequence, ctx=None
) -> PiecewiseForm:
    """Return sum_i coefficients[i] * forms[i] on the common refinement."""
    points = set()
    for form in forms:
        points.update(form.breakpoints)
    grid = sorted(points)
    bins: Dict[int, List[Term]] = {}
    for form, weight in zip(forms, coefficients):
        if _is_zero(weight):
            continue
        form = form.to_context(ctx)
        weight = _convert(weight, ctx)
        for piece in form.pieces:
            start = bisect_left(grid, piece.lo)
            stop = bisect_left(grid, piece.hi)
            for index in range(start, stop):
                sub = _restrict_piece(piece, grid[index], grid[index + 1], ctx)
                bins.setdefault(index, []).extend(
                    Term(tuple(c * weight for c in t.coeffs), t.omega) for t in sub.terms
                )
    pieces = []
    for index in sorted(bins):
        merged = _merge_terms(bins[index])
        if merged:
            pieces.append(Piece(grid[index], grid[index + 1], merged))
    return PiecewiseForm(tuple(pieces), ctx)


def gauss_legendre_inner(
    form: PiecewiseForm, function, order: int, points: Optional[Iterable] = None
) -> complex:
    """Return int form * conj(function) by composite Gauss-Legendre quadrature.

    The composite rule uses the pieces of form, split at the optional points
    where the integrand is not smooth.
    """
    nodes, weights = np.polynomial.legendre.leggauss(order)
    refined = form.refine(points) if points is not None else form
    total = 0j
    for piece in refined.pieces:
        lo, hi = float(piece.lo), float(piece.hi)
        x = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
        values = PiecewiseForm((piece,), refined.ctx).evaluate(x)
        total += 0.5 * (hi - lo) * np.sum(weights * values * np.conj(function(x)))
    return total
