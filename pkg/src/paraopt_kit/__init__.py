"""Time-parallel optimal control of linear diffusion-type equations.

Inexact-Newton multiple shooting on the state/adjoint matching conditions,
with alpha-circulant diagonalization preconditioners for the inner linear
systems and an executable convergence-analysis layer.
"""

from paraopt_kit.problem import (
    ObjectiveKind,
    LinearControlProblem,
    TimeDecomposition,
    HattedScalings,
    make_heat_problem,
    make_advection_diffusion_problem,
    make_scalar_problem,
    hatted,
)
from paraopt_kit.propagators import (
    AffinePropagator,
    build_implicit_euler_propagator,
    build_exact_propagator,
    propagate,
    black_box_view,
)
from paraopt_kit.core import (
    PairedTrajectory,
    NewtonConfig,
    SolveLog,
    matching_residual,
    apply_A,
    apply_A_tilde,
    paraopt_solve,
)
from paraopt_kit.preconditioner import (
    PreconditionerPlan,
    build_plan,
    alpha_circulant_eigenvalues,
)
from paraopt_kit.numerics import GmresConfig, GmresReport, gmres
from paraopt_kit.analysis import (
    PhiPsi,
    SsigmaSpec,
    exact_rho,
    rho_bound_tracking,
    rho_bound_terminal,
    bound_grid_sweep,
)

__all__ = [
    "PhiPsi",
    "SsigmaSpec",
    "exact_rho",
    "rho_bound_tracking",
    "rho_bound_terminal",
    "bound_grid_sweep",
    "ObjectiveKind",
    "LinearControlProblem",
    "TimeDecomposition",
    "HattedScalings",
    "make_heat_problem",
    "make_advection_diffusion_problem",
    "make_scalar_problem",
    "hatted",
    "AffinePropagator",
    "build_implicit_euler_propagator",
    "build_exact_propagator",
    "propagate",
    "black_box_view",
    "PairedTrajectory",
    "NewtonConfig",
    "SolveLog",
    "matching_residual",
    "apply_A",
    "apply_A_tilde",
    "paraopt_solve",
    "PreconditionerPlan",
    "build_plan",
    "alpha_circulant_eigenvalues",
    "GmresConfig",
    "GmresReport",
    "gmres",
]
