"""Utility functions for interval wavelet library."""

import json
import os
import pathlib
import tempfile
from typing import Any, Optional, Union

import mpmath
import sympy

from .const import DOUBLE_DIGITS
from .exceptions import WaveletSpecError

FIXTURE_PATH = pathlib.Path(__file__).parent.absolute() / "fixtures"

Number = Union[int, float, complex, sympy.Expr]


def parse_rational(value: Any) -> sympy.Rational:
    """Parse an exact rational from [num, den], an int or a "p/q" string."""
    if isinstance(value, sympy.Rational):
        return value
    if isinstance(value, bool):
        raise WaveletSpecError(f"expected a rational, got {value!r}")
    if isinstance(value, int):
        return sympy.Integer(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        num, den = value
        if not isinstance(num, int) or not isinstance(den, int) or den == 0:
            raise WaveletSpecError(f"invalid rational pair {value!r}")
        return sympy.Rational(num, den)
    if isinstance(value, str):
        try:
            parsed = sympy.Rational(value.strip())
        except (TypeError, ValueError) as err:
            raise WaveletSpecError(f"invalid rational {value!r}") from err
        return parsed
    raise WaveletSpecError(f"expected a rational, got {value!r}")


def rational_to_raw(value: sympy.Rational) -> list:
    """Serialize a rational as [num, den]."""
    value = sympy.Rational(value)
    return [int(value.p), int(value.q)]


def parse_expression(value: Any) -> sympy.Expr:
    """Parse an exact constant such as "2*sqrt(2)*10**8"."""
    if isinstance(value, (int, list, tuple)):
        return parse_rational(value)
    if isinstance(value, sympy.Expr):
        return value
    if isinstance(value, str):
        try:
            expr = sympy.sympify(value, rational=True)
        except (sympy.SympifyError, TypeError) as err:
            raise WaveletSpecError(f"invalid constant {value!r}") from err
        if expr.free_symbols:
            raise WaveletSpecError(f"constant {value!r} contains symbols")
        return expr
    raise WaveletSpecError(f"expected a constant, got {value!r}")


def get_context(precision: Optional[int] = None):
    """Return the mpmath context for the requested number of digits."""
    if precision is None or precision <= DOUBLE_DIGITS:
        return mpmath.fp
    ctx = mpmath.MPContext()
    ctx.dps = precision
    return ctx


def is_double(ctx) -> bool:
    """Whether a context computes in machine precision."""
    return ctx is mpmath.fp


def context_digits(ctx) -> int:
    """Return the number of decimal digits of a context."""
    return DOUBLE_DIGITS if is_double(ctx) else int(ctx.dps)


def to_context(value: Number, ctx):
    """Convert an exact or machine number into a number of ctx."""
    if isinstance(value, sympy.Basic):
        digits = context_digits(ctx) + 10
        real, imag = (sympy.N(part, digits) for part in value.as_real_imag())
        if is_double(ctx):
            return complex(float(real), float(imag)) if imag else float(real)
        if imag:
            return ctx.mpc(ctx.mpf(str(real)), ctx.mpf(str(imag)))
        return ctx.mpf(str(real))
    if is_double(ctx):
        return value
    if isinstance(value, complex):
        return ctx.mpc(value.real, value.imag)
    return ctx.convert(value)


def resolve_path(name: Union[str, pathlib.Path]) -> pathlib.Path:
    """Resolve a path, falling back to the shipped fixtures."""
    path = pathlib.Path(name)
    if path.exists():
        return path
    shipped = FIXTURE_PATH / path.name
    if shipped.exists():
        return shipped
    raise WaveletSpecError(f"no such file: {name}")


def read_json(name: Union[str, pathlib.Path]) -> dict:
    """Load a JSON document from disk or from the shipped fixtures."""
    path = resolve_path(name)
    try:
        with open(path, encoding="utf-8") as file:
            return json.load(file)
    except json.JSONDecodeError as err:
        raise WaveletSpecError(
            f"{path.name}: line {err.lineno}, column {err.colno}: {err.msg}"
        ) from err


def write_atomic(path: Union[str, pathlib.Path], text: str) -> None:
    """Write a text file so readers never observe a partial file."""
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, temp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(handle, "w", encoding="utf-8", newline="") as file:
            file.write(text)
        os.replace(temp_name, path)
    except BaseException:
        os.unlink(temp_name)
        raise


def ceil_div(numerator: int, denominator: int) -> int:
    """Integer ceiling of numerator / denominator."""
    return -((-numerator) // denominator)
