"""Command line front end for bases, condition tables, solvers and baselines."""

import argparse
import csv
import io
import json
import logging
import math
import pathlib
import sys
from typing import List, Optional, Sequence, Tuple

import attr
import mpmath

from .assembly import (
    condition_number,
    export_matrix,
    mass_matrix,
    stiffness_matrix,
    verify_basis,
)
from .const import (
    BASIS_CDF22_DIRICHLET,
    BASIS_NAME_FEM,
    BASIS_NAME_HERMITE,
    DOUBLE_DIGITS,
    ExitCode,
    Family,
    NormalizationMode,
)
from .exceptions import LevelTooCoarse, NumericalError, WaveletException, WaveletSpecError
from .interval.basis import (
    BasisSpec,
    IntervalBasis,
    assemble_basis,
    build_endpoints,
    fem_basis,
    hermite_biharmonic_basis,
)
from .solvers import (
    BiharmonicProblem,
    HelmholtzProblem,
    SolveResult,
    fd_baseline,
    fem_baseline,
    relative_L2_error,
    solve_biharmonic,
    solve_helmholtz,
    transmission_solution,
)
from .utils import get_context, write_atomic

_LOGGER = logging.getLogger(__name__)

SAMPLE_COUNT = 1025

COND_HEADER = ["N", "size", "kappa_mass_fem", "kappa_stiff_fem", "kappa_mass_wavelet", "kappa_stiff_wavelet"]
HELMHOLTZ_HEADER = ["N", "size", "M", "kappa", "kappa_schur", "error_percent"]
BIHARMONIC_HEADER = ["N", "size", "kappa", "error_percent", "rate"]
FD_HEADER = ["N", "size", "kappa", "discrete_error_percent", "interpolation_error_percent"]
FEM_HEADER = ["N", "size", "kappa", "error_percent"]
SAMPLES_HEADER = ["x", "re", "im"]


def parse_levels(value: str) -> Tuple[int, int]:
    """Parse 'A:B' or 'A' into an inclusive level range."""
    parts = value.split(":")
    try:
        if len(parts) == 1:
            low = high = int(parts[0])
        elif len(parts) == 2:
            low, high = int(parts[0]), int(parts[1])
        else:
            raise ValueError(value)
    except ValueError as err:
        raise WaveletSpecError(f"levels must read A:B, got {value!r}") from err
    return low, high


@attr.s(frozen=True)
class RunConfig:
    """One command with its inputs and switches."""

    command: str = attr.ib()
    action: str = attr.ib()
    levels: Tuple[int, int] = attr.ib()
    spec: str = attr.ib(default=BASIS_CDF22_DIRICHLET)
    problem: Optional[str] = attr.ib(default=None)
    out: pathlib.Path = attr.ib(default=pathlib.Path("."), converter=pathlib.Path)
    precision: Optional[int] = attr.ib(default=None)
    enrich: bool = attr.ib(default=True)
    precondition: bool = attr.ib(default=True)
    moments: int = attr.ib(default=2)
    export_matrix: bool = attr.ib(default=False)

    @levels.validator
    def _nonempty(self, _, value):
        low, high = value
        if low < 0 or high < low:
            raise WaveletSpecError(f"empty level range {low}:{high}")

    @precision.validator
    def _digits(self, _, value):
        if value is not None and value < DOUBLE_DIGITS:
            raise WaveletSpecError(f"precision must be at least {DOUBLE_DIGITS} digits, got {value}")

    @property
    def level_range(self) -> range:
        """Return the requested levels in increasing order."""
        return range(self.levels[0], self.levels[1] + 1)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        """Build from parsed arguments."""
        return cls(
            args.command,
            args.action,
            parse_levels(args.levels),
            args.spec,
            args.problem,
            args.out,
            args.precision,
            args.enrich,
            args.precondition,
            args.moments,
            args.export_matrix,
        )

    def require_problem(self) -> str:
        """Return the problem file or fail."""
        if self.problem is None:
            raise WaveletSpecError(f"'{self.command} {self.action}' needs --problem")
        return self.problem


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _number(value) -> str:
    if value is None:
        return ""
    return f"{float(value):.6e}"


def _write(config: RunConfig, name: str, text: str) -> pathlib.Path:
    path = config.out / name
    write_atomic(path, text)
    _LOGGER.info("Wrote %s", path)
    return path


def _build_basis(config: RunConfig, family: Family = Family.PRIMAL) -> IntervalBasis:
    coarse, finest = config.levels
    if config.spec == BASIS_NAME_FEM:
        return fem_basis(finest)
    if config.spec == BASIS_NAME_HERMITE:
        return hermite_biharmonic_basis(finest)
    return assemble_basis(BasisSpec.from_fixture(config.spec), coarse, finest, family)


def _verify(config: RunConfig, basis: IntervalBasis):
    if config.spec == BASIS_NAME_HERMITE:
        return verify_basis(basis, moments=0, stiffness_order=2, derivatives=2)
    if config.spec == BASIS_NAME_FEM:
        return verify_basis(basis, moments=0)
    dual = None
    try:
        dual = assemble_basis(
            BasisSpec.from_fixture(config.spec), basis.coarse, basis.finest, Family.DUAL,
            basis.endpoints,
        )
    except LevelTooCoarse as err:
        _LOGGER.warning("Skipping the biorthogonality check: %s", err)
    return verify_basis(basis, dual, config.moments)


def cmd_basis_build(config: RunConfig) -> List[pathlib.Path]:
    """Write the element table, the refinement matrices and a verification report."""
    basis = _build_basis(config)
    written = [_write(config, f"{basis.name}_elements.csv", basis.element_table())]
    if basis.parts is not None:
        written.append(_write(config, f"{basis.name}_refinement.json", basis.refinement_json()))
    report = _verify(config, basis)
    written.append(
        _write(config, f"{basis.name}_verification.json", json.dumps(report.as_raw(), indent=2))
    )
    return written


def cmd_basis_verify(config: RunConfig) -> pathlib.Path:
    """Write only the verification report; fail when a residual is too large."""
    basis = _build_basis(config)
    report = _verify(config, basis)
    print(json.dumps(report.as_raw(), indent=2))
    path = _write(config, f"{basis.name}_verification.json", json.dumps(report.as_raw(), indent=2))
    if not report.passed():
        raise NumericalError(f"{basis.name} fails verification")
    return path


def cond_row(level: int, spec: BasisSpec, endpoints=None) -> list:
    """Return one row of mass and stiffness condition numbers for FEM_N and B_{2,N}."""
    fem = fem_basis(level)
    wavelet = assemble_basis(spec, None, level, Family.PRIMAL, endpoints)
    return [
        level,
        wavelet.size,
        condition_number(mass_matrix(fem, NormalizationMode.UNIT_L2).matrix),
        condition_number(stiffness_matrix(fem, 1, NormalizationMode.UNIT_DERIVATIVE).matrix),
        condition_number(mass_matrix(wavelet, NormalizationMode.UNIT_L2).matrix),
        condition_number(stiffness_matrix(wavelet, 1, NormalizationMode.UNIT_DERIVATIVE).matrix),
    ]


def cmd_cond_table(config: RunConfig) -> pathlib.Path:
    """Write condition numbers of mass and stiffness matrices for each level."""
    spec = BasisSpec.from_fixture(config.spec)
    endpoints = build_endpoints(spec)
    rows = []
    for level in config.level_range:
        row = cond_row(level, spec, endpoints)
        _LOGGER.info("N = %d: %s", level, row)
        rows.append(row[:2] + [_number(x) for x in row[2:]])
    return _write(config, "cond.csv", _csv(COND_HEADER, rows))


def _export(config: RunConfig, result: SolveResult, stem: str) -> None:
    if config.export_matrix and result.system is not None:
        path = config.out / f"{stem}.mtx"
        export_matrix(result.system.matrix, path, f"{stem} N = {result.field.metadata.get('N')}")
        _LOGGER.info("Wrote %s", path)


def _samples(config: RunConfig, result: SolveResult, stem: str) -> pathlib.Path:
    x, values = result.field.samples(SAMPLE_COUNT)
    rows = [[f"{a:.8f}", f"{v.real:.12e}", f"{v.imag:.12e}"] for a, v in zip(x, values)]
    return _write(config, f"{stem}_samples.csv", _csv(SAMPLES_HEADER, rows))


def _helmholtz_rows(config: RunConfig, problem: HelmholtzProblem) -> List[pathlib.Path]:
    ctx = get_context(config.precision or problem.precision)
    exact = transmission_solution(problem, ctx)
    rows, result = [], None
    for level in config.level_range:
        result = solve_helmholtz(
            problem, level, config.enrich, ctx, precondition=config.precondition
        )
        error = relative_L2_error(result.field, exact, ctx)
        meta = result.field.metadata
        rows.append(
            [level, meta["size"], meta["M"], _number(result.report.kappa),
             _number(result.report.kappa_schur), _number(error)]
        )
        _export(config, result, f"{problem.name}_N{level}")
    stem = f"{problem.name}_{'enriched' if config.enrich else 'wavelet'}"
    return [_write(config, f"{stem}.csv", _csv(HELMHOLTZ_HEADER, rows)), _samples(config, result, stem)]


def _biharmonic_rows(config: RunConfig, problem: BiharmonicProblem) -> List[pathlib.Path]:
    exact = problem.exact()
    rows, result, previous = [], None, None
    for level in config.level_range:
        result = solve_biharmonic(problem, level)
        error = relative_L2_error(result.field, exact) if exact is not None else None
        rate = None
        if error and previous:
            rate = math.log2(previous / error)
        rows.append(
            [level, result.field.metadata["size"], _number(result.report.kappa), _number(error),
             "" if rate is None else f"{rate:.3f}"]
        )
        previous = error
        _export(config, result, f"{problem.name}_N{level}")
    return [
        _write(config, f"{problem.name}.csv", _csv(BIHARMONIC_HEADER, rows)),
        _samples(config, result, problem.name),
    ]


def cmd_solve(config: RunConfig) -> List[pathlib.Path]:
    """Run a solver over the level range and write table rows plus solution samples."""
    name = config.require_problem()
    if config.action == "helmholtz":
        return _helmholtz_rows(config, HelmholtzProblem.from_file(name))
    return _biharmonic_rows(config, BiharmonicProblem.from_file(name))


def cmd_baseline(config: RunConfig) -> pathlib.Path:
    """Run the finite difference or hat element baseline over the level range."""
    problem = HelmholtzProblem.from_file(config.require_problem())
    exact = transmission_solution(problem, mpmath.fp)
    rows = []
    for level in config.level_range:
        if config.action == "fd":
            result = fd_baseline(problem, level, exact)
            rows.append(
                [level, result.size, _number(result.report.kappa),
                 _number(result.discrete_error), _number(result.interpolation_error)]
            )
        else:
            solved = fem_baseline(problem, level)
            rows.append(
                [level, solved.field.metadata["size"], _number(solved.report.kappa),
                 _number(relative_L2_error(solved.field, exact))]
            )
            _export(config, solved, f"{problem.name}_fem_N{level}")
    header = FD_HEADER if config.action == "fd" else FEM_HEADER
    return _write(config, f"{problem.name}_{config.action}.csv", _csv(header, rows))


COMMANDS = {
    ("basis", "build"): cmd_basis_build,
    ("basis", "verify"): cmd_basis_verify,
    ("table", "cond"): cmd_cond_table,
    ("solve", "helmholtz"): cmd_solve,
    ("solve", "biharmonic"): cmd_solve,
    ("baseline", "fd"): cmd_baseline,
    ("baseline", "fem"): cmd_baseline,
}


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser with every subcommand."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", default=BASIS_CDF22_DIRICHLET,
                        help="basis spec file, or 'fem' / 'hermite'")
    common.add_argument("--problem", help="problem file")
    common.add_argument("--levels", default="2:6", help="level range A:B")
    common.add_argument("--precision", type=int, help="decimal digits of the solver arithmetic")
    common.add_argument("--enrich", dest="enrich", action="store_true", default=True)
    common.add_argument("--no-enrich", dest="enrich", action="store_false")
    common.add_argument("--no-precondition", dest="precondition", action="store_false")
    common.add_argument("--moments", type=int, default=2, help="vanishing moments to verify")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--export-matrix", action="store_true",
                        help="write system matrices in Matrix Market format")
    common.add_argument("--verbose", "-v", action="store_true")

    parser = argparse.ArgumentParser(
        prog="libwavelets", description="Wavelet bases on [0, 1] and wavelet Galerkin solvers."
    )
    commands = parser.add_subparsers(dest="command", required=True)
    for command, actions in (
        ("basis", ("build", "verify")),
        ("table", ("cond",)),
        ("solve", ("helmholtz", "biharmonic")),
        ("baseline", ("fd", "fem")),
    ):
        sub = commands.add_parser(command).add_subparsers(dest="action", required=True)
        for action in actions:
            sub.add_parser(action, parents=[common])
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        config = RunConfig.from_args(args)
        COMMANDS[(config.command, config.action)](config)
    except NumericalError as err:
        _LOGGER.error("%s", err)
        return ExitCode.NUMERICAL
    except WaveletException as err:
        _LOGGER.error("%s", err)
        return ExitCode.VALIDATION
    return ExitCode.OK


if __name__ == "__main__":
    sys.exit(main())
