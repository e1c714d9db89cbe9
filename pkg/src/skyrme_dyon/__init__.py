"""Spherically symmetric dyons of the minimally gauged Skyrme model.

Numerically constructs the radial profiles (a, f, g) solving the reduced
boundary-value problem on [0, R], by damped Newton with continuation in
the electric boundary value q and by a constrained gradient flow, and
computes/verifies the analytic properties of the solutions: topological
and electric charges, pointwise bounds, monotonicity, decay rates, tail
laws, and energy inequalities.
"""

from .errors import (
    DecayWindowError,
    InternalSolveError,
    NumericError,
    ParameterError,
    RegionError,
    SkyrmeDyonError,
    TestFunctionError,
)
from .grid import RadialGrid, build_grid, grid_from_nodes
from .inner import constraint_residual, solve_inner_g
from .model import (
    ActionBreakdown,
    FieldProfile,
    ModelParams,
    action_breakdown,
    admissible_q_max,
    density_e1,
    density_e2,
    e2_energy,
    residual_a,
    residual_f,
    residual_g,
    residuals,
    solution_properties_ok,
    validate_params,
)
from .observables import (
    ObservableReport,
    TailConstants,
    electric_charge,
    fit_decay_rate,
    gamma_theory,
    magnetic_charge,
    observables,
    skyrme_charge_closed,
    skyrme_charge_numeric,
    tail_constants,
)
from .solver import (
    LegRecord,
    SolveConfig,
    SolveReport,
    continuation_solve,
    flow_solve,
    initial_guess,
    newton_solve,
)
from .verify import RefinementReport, Tolerances, VerifyReport, refinement_study, run_suite

__version__ = "0.1.0"

__all__ = [
    "ActionBreakdown",
    "DecayWindowError",
    "FieldProfile",
    "InternalSolveError",
    "LegRecord",
    "ModelParams",
    "NumericError",
    "ObservableReport",
    "ParameterError",
    "RadialGrid",
    "RefinementReport",
    "RegionError",
    "SkyrmeDyonError",
    "SolveConfig",
    "SolveReport",
    "TailConstants",
    "TestFunctionError",
    "Tolerances",
    "VerifyReport",
    "action_breakdown",
    "admissible_q_max",
    "build_grid",
    "constraint_residual",
    "continuation_solve",
    "density_e1",
    "density_e2",
    "e2_energy",
    "electric_charge",
    "fit_decay_rate",
    "flow_solve",
    "gamma_theory",
    "grid_from_nodes",
    "initial_guess",
    "magnetic_charge",
    "newton_solve",
    "observables",
    "refinement_study",
    "residual_a",
    "residual_f",
    "residual_g",
    "residuals",
    "run_suite",
    "skyrme_charge_closed",
    "skyrme_charge_numeric",
    "solution_properties_ok",
    "solve_inner_g",
    "tail_constants",
    "validate_params",
]
