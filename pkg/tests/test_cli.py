"""Tests for the command line tool."""

import csv
import json
import pathlib

import pytest

from libwavelets.assembly import VerificationReport
from libwavelets.cli import (
    COND_HEADER,
    FD_HEADER,
    RunConfig,
    build_parser,
    cond_row,
    main,
    parse_levels,
)
from libwavelets.const import BASIS_CDF22_DIRICHLET, ExitCode
from libwavelets.exceptions import WaveletSpecError
from libwavelets.interval.basis import BasisSpec, build_endpoints


def _rows(path: pathlib.Path) -> list:
    with open(path, encoding="utf-8", newline="") as file:
        return list(csv.reader(file))


@pytest.mark.parametrize("value,expected", [("2:4", (2, 4)), ("3", (3, 3)), ("0:0", (0, 0))])
def test_parse_levels(value, expected):
    """Test level ranges."""
    assert parse_levels(value) == expected


@pytest.mark.parametrize("value", ["a:b", "1:2:3", "", "2-4"])
def test_parse_levels_invalid(value):
    """Test malformed level ranges are rejected."""
    with pytest.raises(WaveletSpecError):
        parse_levels(value)


def test_run_config():
    """Test validation and defaults of a run."""
    config = RunConfig("table", "cond", (3, 5), out="results")
    assert list(config.level_range) == [3, 4, 5]
    assert config.out == pathlib.Path("results")
    with pytest.raises(WaveletSpecError):
        RunConfig("table", "cond", (5, 3))
    with pytest.raises(WaveletSpecError):
        RunConfig("table", "cond", (-1, 3))
    with pytest.raises(WaveletSpecError):
        RunConfig("solve", "helmholtz", (3, 3), precision=10)
    with pytest.raises(WaveletSpecError, match="needs --problem"):
        config.require_problem()


def test_from_args():
    """Test parsed arguments map onto a run."""
    args = build_parser().parse_args(
        ["solve", "helmholtz", "--problem", "indicator.json", "--levels", "3:4", "--no-enrich",
         "--precision", "40"]
    )
    config = RunConfig.from_args(args)
    assert (config.command, config.action) == ("solve", "helmholtz")
    assert config.levels == (3, 4)
    assert not config.enrich
    assert config.precondition
    assert config.precision == 40


def test_basis_build(tmp_path):
    """Test the element table, refinement and report are written."""
    code = main(["basis", "build", "--levels", "2:3", "--out", str(tmp_path)])
    assert code == ExitCode.OK
    table = _rows(tmp_path / "cdf22_dirichlet_elements.csv")
    assert table[0][:3] == ["id", "role", "side"]
    assert len(table) == 1 + 7
    refinement = json.loads((tmp_path / "cdf22_dirichlet_refinement.json").read_text())
    assert refinement["basis"] == "cdf22_dirichlet"
    report = json.loads((tmp_path / "cdf22_dirichlet_verification.json").read_text())
    assert report["size"] == 7
    assert report["levels"] == [2, 3]
    # the dual needs J >= 3
    assert report["biorthogonality_residual"] is None


def test_basis_verify(tmp_path, capsys):
    """Test a passing verification prints and writes the report."""
    code = main(["basis", "verify", "--levels", "3:4", "--out", str(tmp_path)])
    assert code == ExitCode.OK
    printed = json.loads(capsys.readouterr().out)
    assert printed["biorthogonality_residual"] < 1e-10
    assert (tmp_path / "cdf22_dirichlet_verification.json").exists()


def test_basis_verify_reference(tmp_path):
    """Test the reference bases verify without a dual."""
    assert main(["basis", "verify", "--spec", "fem", "--levels", "4", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "fem_verification.json").read_text())
    assert report["size"] == 15


def test_basis_verify_failure(tmp_path, monkeypatch):
    """Test a failed verification maps to the numerical exit code."""
    monkeypatch.setattr(VerificationReport, "passed", lambda self, tolerance=1e-10: False)
    code = main(["basis", "verify", "--levels", "3:3", "--out", str(tmp_path)])
    assert code == ExitCode.NUMERICAL


def test_cond_table(tmp_path):
    """Test one row per level."""
    assert main(["table", "cond", "--levels", "3:4", "--out", str(tmp_path)]) == ExitCode.OK
    rows = _rows(tmp_path / "cond.csv")
    assert rows[0] == COND_HEADER
    assert [row[:2] for row in rows[1:]] == [["3", "7"], ["4", "15"]]
    for row in rows[1:]:
        assert all(float(value) >= 1 for value in row[2:])


def test_baseline_fd(tmp_path):
    """Test the finite difference table."""
    code = main(
        ["baseline", "fd", "--problem", "indicator_desk.json", "--levels", "3:4",
         "--out", str(tmp_path)]
    )
    assert code == ExitCode.OK
    rows = _rows(tmp_path / "indicator_desk_fd.csv")
    assert rows[0] == FD_HEADER
    assert [row[0] for row in rows[1:]] == ["3", "4"]


def test_solve_biharmonic(tmp_path):
    """Test the solver table, samples and exported matrices."""
    code = main(
        ["solve", "biharmonic", "--problem", "biharmonic_sin.json", "--levels", "2:3",
         "--export-matrix", "--out", str(tmp_path)]
    )
    assert code == ExitCode.OK
    rows = _rows(tmp_path / "biharmonic_sin.csv")
    assert rows[1][:2] == ["2", "14"]
    assert rows[1][4] == ""
    assert rows[2][:2] == ["3", "30"]
    samples = _rows(tmp_path / "biharmonic_sin_samples.csv")
    assert samples[0] == ["x", "re", "im"]
    assert len(samples) == 1 + 1025
    assert (tmp_path / "biharmonic_sin_N3.mtx").exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["table", "cond", "--levels", "4:2"],
        ["table", "cond", "--levels", "x"],
        ["basis", "build", "--spec", "missing.json", "--levels", "2:3"],
        ["basis", "build", "--levels", "1:3"],
        ["solve", "helmholtz", "--levels", "3:3"],
        ["solve", "helmholtz", "--problem", "indicator.json", "--precision", "8"],
    ],
)
def test_validation_errors(argv, tmp_path):
    """Test invalid input maps to the validation exit code."""
    assert main(argv + ["--out", str(tmp_path)]) == ExitCode.VALIDATION


def test_solve_helmholtz_size(tmp_path):
    """Test the size column counts the special waves of the enriched system."""
    code = main(
        ["solve", "helmholtz", "--problem", "indicator_desk.json", "--levels", "3:3",
         "--out", str(tmp_path)]
    )
    assert code == ExitCode.OK
    rows = _rows(tmp_path / "indicator_desk_enriched.csv")
    assert rows[0][:3] == ["N", "size", "M"]
    assert rows[1][:3] == ["3", str(7 + 2 * 5), "5"]


# N: (FEM stiffness, wavelet mass, wavelet stiffness) condition numbers.
PUBLISHED_CONDITIONING = {
    11: (1.6999e6, 18.4336, 16.9644),
    12: (6.7929e6, 19.2825, 17.2715),
    13: (2.7198e7, 20.0209, 17.5118),
    14: (1.0879e8, 20.6658, 17.7025),
}


@pytest.fixture(scope="module")
def dirichlet():
    """Return the shipped spec with its boundary functions."""
    spec = BasisSpec.from_fixture(BASIS_CDF22_DIRICHLET)
    return spec, build_endpoints(spec)


@pytest.mark.slow
@pytest.mark.parametrize("level", sorted(PUBLISHED_CONDITIONING))
def test_published_conditioning(dirichlet, level: int):
    """Test hat and wavelet mass and stiffness condition numbers for N = 11..14."""
    row = cond_row(level, *dirichlet)
    assert row[:2] == [level, 2**level - 1]
    assert row[2] == pytest.approx(3.0, abs=5e-4)
    for value, published in zip(row[3:], PUBLISHED_CONDITIONING[level]):
        assert value == pytest.approx(published, rel=5e-3)
