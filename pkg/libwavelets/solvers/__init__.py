"""Galerkin solvers for the Helmholtz and biharmonic model problems."""

from .baselines import DifferenceResult, fd_baseline, fem_baseline  # noqa: F401
from .biharmonic import solve_biharmonic  # noqa: F401
from .helmholtz import (  # noqa: F401
    ModifiedBasis,
    SpecialWave,
    build_special_waves,
    modify_right_boundary,
    solve_helmholtz,
    transmission_solution,
)
from .problems import (  # noqa: F401
    BiharmonicProblem,
    HelmholtzProblem,
    SolutionField,
    SolveResult,
    load_problem,
    relative_L2_error,
)
