"""Tests for utils."""

from fractions import Fraction
import json

import mpmath
import pytest
import sympy

from libwavelets.const import FILTER_CDF22
from libwavelets.exceptions import WaveletSpecError
from libwavelets.utils import (
    ceil_div,
    get_context,
    is_double,
    parse_expression,
    parse_rational,
    rational_to_raw,
    read_json,
    resolve_path,
    to_context,
    write_atomic,
)


@pytest.mark.parametrize(
    "raw,expected",
    [
        ([3, 4], sympy.Rational(3, 4)),
        (-2, sympy.Integer(-2)),
        ("5/16", sympy.Rational(5, 16)),
        (" -1/8 ", sympy.Rational(-1, 8)),
    ],
)
def test_parse_rational(raw, expected):
    """Test rationals are parsed from every accepted layout."""
    assert parse_rational(raw) == expected


@pytest.mark.parametrize("raw", [[1, 0], True, 0.25, "x/2", [1, 2, 3]])
def test_parse_rational_invalid(raw):
    """Test malformed rationals are rejected."""
    with pytest.raises(WaveletSpecError):
        parse_rational(raw)


def test_rational_to_raw():
    """Test rationals serialize as [num, den]."""
    assert rational_to_raw(sympy.Rational(-27, 64)) == [-27, 64]
    assert parse_rational(rational_to_raw(sympy.Rational(37, 128))) == sympy.Rational(37, 128)


def test_parse_expression():
    """Test exact constants."""
    assert parse_expression("2*sqrt(2)*10**8") == 2 * sympy.sqrt(2) * 10**8
    assert parse_expression("I/2") == sympy.I / 2
    with pytest.raises(WaveletSpecError):
        parse_expression("k**2")


def test_contexts():
    """Test precision selection and conversion."""
    assert is_double(get_context())
    assert is_double(get_context(15))
    ctx = get_context(40)
    assert not is_double(ctx)
    assert ctx.dps == 40
    value = to_context(sympy.sqrt(2), ctx)
    assert abs(value**2 - 2) < ctx.mpf(10) ** -38
    assert to_context(sympy.I * 3, mpmath.fp) == 3j


def test_ceil_div():
    """Test the integer ceiling."""
    assert ceil_div(5, 2) == 3
    assert ceil_div(-5, 2) == -2
    assert ceil_div(4, 2) == 2


def test_fixture_lookup():
    """Test shipped fixtures resolve by file name."""
    assert resolve_path(FILTER_CDF22).name == FILTER_CDF22
    assert "a" in read_json(FILTER_CDF22)
    with pytest.raises(WaveletSpecError):
        resolve_path("no_such_fixture.json")


def test_read_json_reports_position(tmp_path):
    """Test JSON errors name the line."""
    path = tmp_path / "broken.json"
    path.write_text('{\n  "a": [1, 2\n}\n')
    with pytest.raises(WaveletSpecError, match="line"):
        read_json(path)


def test_write_atomic(tmp_path):
    """Test atomic writes create parents and leave no temporary files."""
    path = tmp_path / "nested" / "out.json"
    write_atomic(path, json.dumps({"value": str(Fraction(1, 3))}))
    assert json.loads(path.read_text()) == {"value": "1/3"}
    assert [p.name for p in path.parent.iterdir()] == ["out.json"]
