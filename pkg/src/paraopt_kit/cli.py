"""Command-line front end: bound sweeps, single solves, and experiment suites.

Subcommands:
  bound       evaluate rho_star over a (sigma_hat, gamma_hat) grid -> CSV
  solve       run one ParaOpt solve -> solve_log.csv + summary.json
  experiment  regenerate the data behind one figure family -> CSVs + manifest

Exit codes: 0 success, 1 solver non-convergence, 2 configuration error.
All CSV files start with the version line `# paraopt-kit v1`, use LF endings,
and print floats at full precision (%.17g).
"""

from __future__ import annotations

import argparse
import dataclasses
import enum
import json
import os
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from paraopt_kit import analysis
from paraopt_kit.analysis import (
    PropagatorDescription,
    PropagatorKind,
    SsigmaSpec,
    bound_grid_sweep,
    coefficients_at,
    exact_rho,
    log_grid,
    rho_bound_tracking,
)
from paraopt_kit.core import NewtonConfig, SolveLog, paraopt_solve
from paraopt_kit.numerics import GmresConfig
from paraopt_kit.preconditioner import (
    InversionMethod,
    SmallSystemMethod,
    build_plan,
)
from paraopt_kit.problem import (
    LinearControlProblem,
    ObjectiveKind,
    TimeDecomposition,
    make_advection_diffusion_problem,
    make_decomposition,
    make_heat_problem,
    make_scalar_problem,
)
from paraopt_kit.propagators import (
    Discretization,
    build_exact_propagator,
    build_implicit_euler_propagator,
)

CSV_VERSION_LINE = "# paraopt-kit v1"


class ConfigError(Exception):
    """Raised for invalid run configurations (exit code 2)."""


@dataclass
class RunConfig:
    """Complete description of one solver run; JSON-serializable, with CLI
    flags overriding file-provided fields."""

    problem: str = "heat"              # scalar | heat | advection_diffusion
    objective: str = "tracking"        # tracking | terminal_cost
    sigma: float = 1.0                 # scalar problems only
    n: int = 8                         # grid problems: n*n unknowns
    gamma: float = 0.05
    T: float = 2.0
    L: int = 11
    J_fine: int = 10
    J_coarse: int = 1
    fine: str = "ie"                   # ie | exact
    coarse_variant: str = "ie_fotd"    # ie_fotd | ie_fdto
    outer_tol: float = 1e-6
    inner_tol: float = 1e-4
    max_outer: int = 100
    max_inner: int = 1000
    precond_enabled: bool = True
    precond_method: str = "general"    # general | triangular
    alpha_real: float = -1.0
    alpha_imag: float = 0.0
    small_system_method: str = "explicit_direct"
    output: str = "out"
    seed: int = 0

    def validate(self) -> None:
        if self.problem not in ("scalar", "heat", "advection_diffusion"):
            raise ConfigError(f"unknown problem kind '{self.problem}'")
        if self.objective not in ("tracking", "terminal_cost"):
            raise ConfigError(f"unknown objective '{self.objective}'")
        if self.fine not in ("ie", "exact"):
            raise ConfigError(f"unknown fine propagator '{self.fine}'")
        if self.coarse_variant not in ("ie_fotd", "ie_fdto"):
            raise ConfigError(f"unknown coarse variant '{self.coarse_variant}'")
        for name in ("outer_tol", "inner_tol"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ConfigError(f"{name} must be in (0, 1), got {v}")
        if self.precond_method not in ("general", "triangular"):
            raise ConfigError(f"unknown preconditioner method '{self.precond_method}'")
        if self.small_system_method not in ("explicit_direct",
                                            "black_box_iterative"):
            raise ConfigError(
                f"unknown small-system method '{self.small_system_method}'")
        if self.objective == "tracking" and self.coarse_variant == "ie_fdto":
            raise ConfigError("tracking has a single implicit-Euler coarse "
                              "variant; ie_fdto applies to terminal cost only")

    @property
    def alpha(self) -> complex:
        a = complex(self.alpha_real, self.alpha_imag)
        return a.real if a.imag == 0.0 else a

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        known = {f.name for f in dataclasses.fields(cls)}
        bad = set(data) - known
        if bad:
            raise ConfigError(f"unknown config fields: {sorted(bad)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _objective_kind(cfg: RunConfig) -> ObjectiveKind:
    return (ObjectiveKind.TRACKING if cfg.objective == "tracking"
            else ObjectiveKind.TERMINAL_COST)


def build_problem(cfg: RunConfig) -> LinearControlProblem:
    kind = _objective_kind(cfg)
    if cfg.problem == "scalar":
        return make_scalar_problem(cfg.sigma, cfg.gamma, cfg.T, kind)
    if cfg.problem == "heat":
        return make_heat_problem(cfg.n, cfg.gamma, cfg.T, kind)
    return make_advection_diffusion_problem(cfg.n, cfg.gamma, cfg.T, kind)


def build_propagators(cfg: RunConfig, problem: LinearControlProblem,
                      decomp: TimeDecomposition):
    variant = (Discretization.FOTD if cfg.coarse_variant == "ie_fotd"
               else Discretization.FDTO)
    try:
        if cfg.fine == "exact":
            fine = build_exact_propagator(problem, decomp.DT)
        else:
            fine = build_implicit_euler_propagator(problem, decomp.DT,
                                                   decomp.J_fine)
        coarse = build_implicit_euler_propagator(problem, decomp.DT,
                                                 decomp.J_coarse, variant)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return fine, coarse


def build_preconditioner(cfg: RunConfig, coarse, decomp: TimeDecomposition):
    if not cfg.precond_enabled:
        return None
    method = (InversionMethod.GENERAL if cfg.precond_method == "general"
              else InversionMethod.TRIANGULAR)
    small = (SmallSystemMethod.EXPLICIT_DIRECT
             if cfg.small_system_method == "explicit_direct"
             else SmallSystemMethod.BLACK_BOX_ITERATIVE)
    try:
        return build_plan(coarse, decomp, cfg.alpha, method, small)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def solve_case(cfg: RunConfig):
    """Run one configured solve; returns (trajectory, log, summary dict)."""
    cfg.validate()
    problem = build_problem(cfg)
    decomp = make_decomposition(problem, cfg.L, cfg.J_fine, cfg.J_coarse)
    fine, coarse = build_propagators(cfg, problem, decomp)
    plan = build_preconditioner(cfg, coarse, decomp)
    newton = NewtonConfig(
        outer_tolerance=cfg.outer_tol, max_outer=cfg.max_outer,
        inner=GmresConfig(rel_tolerance=cfg.inner_tol,
                          max_iterations=cfg.max_inner),
        preconditioner=plan)
    traj, log = paraopt_solve(problem, decomp, fine, coarse, newton)
    summary = {
        "converged": bool(log.converged),
        "aborted": bool(log.aborted),
        "outer_iterations": len(log.records) - 1,
        "total_inner_iterations": int(sum(r.inner_iters for r in log.records)),
        "final_residual": float(log.records[-1].residual),
        "L_hat": decomp.L_hat,
        "M": problem.M,
        "config": cfg.to_dict(),
    }
    return traj, log, summary


# ---------------------------------------------------------------------------
# artifact writing

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return "%.17g" % float(value)


def write_csv(path: str, header: Sequence[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(CSV_VERSION_LINE + "\n")
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def write_json(path: str, data: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")


def write_solve_artifacts(outdir: str, log: SolveLog, summary: dict) -> None:
    os.makedirs(outdir, exist_ok=True)
    write_csv(os.path.join(outdir, "solve_log.csv"),
              ["iteration", "residual", "inner_iters", "seconds"],
              log.csv_rows())
    write_json(os.path.join(outdir, "summary.json"), summary)


# ---------------------------------------------------------------------------
# bound subcommand

def _parse_grid(text: str) -> np.ndarray:
    try:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"grid must be 'lo:hi:count', got '{text}'")
    if count == 1:
        if lo != hi:
            raise ConfigError("a 1-point grid needs lo == hi")
        return np.array([lo])
    return log_grid(lo, hi, count)


def _description(kind: str, J: int, variant: str) -> PropagatorDescription:
    v = Discretization.FOTD if variant == "fotd" else Discretization.FDTO
    if kind == "exact":
        return PropagatorDescription(PropagatorKind.EXACT)
    return PropagatorDescription(PropagatorKind.IMPLICIT_EULER, J=J, variant=v)


def cmd_bound(args) -> int:
    objective = (ObjectiveKind.TRACKING if args.objective == "tracking"
                 else ObjectiveKind.TERMINAL_COST)
    fine = _description(args.fine, args.j_fine, args.fine_variant)
    coarse = _description("ie", args.j_coarse, args.coarse_variant)
    sh_grid = _parse_grid(args.sigma_grid)
    gh_grid = _parse_grid(args.gamma_grid)
    try:
        rows = bound_grid_sweep(objective, fine, coarse, sh_grid, gh_grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    os.makedirs(args.output, exist_ok=True)
    write_csv(os.path.join(args.output, "rho_star.csv"),
              ["sigma_hat", "gamma_hat", "rho_star"], rows)
    return 0


# ---------------------------------------------------------------------------
# solve subcommand

_SOLVE_FLAGS = [  # (flag, field, type)
    ("--problem", "problem", str), ("--objective", "objective", str),
    ("--sigma", "sigma", float), ("--n", "n", int),
    ("--gamma", "gamma", float), ("--T", "T", float),
    ("--L", "L", int), ("--j-fine", "J_fine", int),
    ("--j-coarse", "J_coarse", int), ("--fine", "fine", str),
    ("--coarse-variant", "coarse_variant", str),
    ("--outer-tol", "outer_tol", float), ("--inner-tol", "inner_tol", float),
    ("--max-outer", "max_outer", int), ("--max-inner", "max_inner", int),
    ("--precond-method", "precond_method", str),
    ("--alpha-real", "alpha_real", float), ("--alpha-imag", "alpha_imag", float),
    ("--small-system-method", "small_system_method", str),
    ("--output", "output", str), ("--seed", "seed", int),
]


def _merge_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    for _, field_name, _ in _SOLVE_FLAGS:
        value = getattr(args, field_name, None)
        if value is not None:
            setattr(cfg, field_name, value)
    if args.no_precond:
        cfg.precond_enabled = False
    elif args.precond:
        cfg.precond_enabled = True
    return cfg


def cmd_solve(args) -> int:
    cfg = _merge_config(args)
    _, log, summary = solve_case(cfg)
    write_solve_artifacts(cfg.output, log, summary)
    return 0 if log.converged else 1


# ---------------------------------------------------------------------------
# experiment subcommand

class ExperimentId(enum.Enum):
    ScalarTimestepSweep = "ScalarTimestepSweep"
    ScalarConvergenceAB = "ScalarConvergenceAB"
    ScalarWeakScaling = "ScalarWeakScaling"
    TcFotdVsFdto = "TcFotdVsFdto"
    GmresToleranceStudy = "GmresToleranceStudy"
    HeatIterationCounts = "HeatIterationCounts"
    HeatTotalIterations = "HeatTotalIterations"
    AdvectionIterationCounts = "AdvectionIterationCounts"
    BoundContours = "BoundContours"


def fit_geometric_rate(residuals: Sequence[float]) -> float:
    """Least-squares geometric contraction rate of a residual history,
    ignoring the stagnation tail near machine precision."""
    r = np.asarray(residuals, dtype=float)
    keep = r > max(1e-13 * r[0], 0.0)
    r = r[keep]
    if len(r) < 3:
        raise ValueError("need at least three residuals above the noise floor")
    k = np.arange(len(r))
    slope = np.polyfit(k, np.log(r), 1)[0]
    return float(np.exp(slope))


def _heat_run_config(problem: str, objective: str, L_hat: int,
                     precond: bool, inner_tol: float = 1e-4) -> RunConfig:
    L = L_hat + 1 if objective == "tracking" else L_hat
    return RunConfig(problem=problem, objective=objective, n=8, gamma=0.05,
                     T=2.0, L=L, J_fine=10, J_coarse=1, fine="ie",
                     outer_tol=1e-6, inner_tol=inner_tol, max_inner=2000,
                     precond_enabled=precond, precond_method="general",
                     alpha_real=-1.0)


def exp_bound_contours(outdir: str, grid_count: int = 50) -> list[str]:
    grid = log_grid(1e-4, 1e4, grid_count)
    exact = PropagatorDescription(PropagatorKind.EXACT)
    panels = [
        ("tracking_j1", ObjectiveKind.TRACKING, 1, Discretization.FOTD),
        ("tracking_j10", ObjectiveKind.TRACKING, 10, Discretization.FOTD),
        ("tc_fotd_j1", ObjectiveKind.TERMINAL_COST, 1, Discretization.FOTD),
        ("tc_fotd_j10", ObjectiveKind.TERMINAL_COST, 10, Discretization.FOTD),
        ("tc_fdto_j1", ObjectiveKind.TERMINAL_COST, 1, Discretization.FDTO),
        ("tc_fdto_j10", ObjectiveKind.TERMINAL_COST, 10, Discretization.FDTO),
    ]
    files = []
    for name, objective, J, variant in panels:
        coarse = PropagatorDescription(PropagatorKind.IMPLICIT_EULER, J=J,
                                       variant=variant)
        rows = bound_grid_sweep(objective, exact, coarse, grid, grid)
        fname = f"rho_star_{name}.csv"
        write_csv(os.path.join(outdir, fname),
                  ["sigma_hat", "gamma_hat", "rho_star"], rows)
        files.append(fname)
    return files


def exp_scalar_timestep_sweep(outdir: str) -> list[str]:
    # exact fine vs J-step implicit-Euler coarse at sigma=16, gamma=1, T=1
    sigma, gamma, T, L_hat = 16.0, 1.0, 1.0, 100
    DT = T / (L_hat + 1)
    rows = []
    for J in (1, 2, 4, 8, 16, 32):
        fine = analysis.phi_psi_tracking_exact(sigma, gamma, DT)
        coarse = analysis.phi_psi_tracking_ie(sigma, gamma, DT / J, J)
        rows.append((J, rho_bound_tracking(fine, coarse),
                     exact_rho(SsigmaSpec(L_hat, fine, coarse,
                                          ObjectiveKind.TRACKING))))
    write_csv(os.path.join(outdir, "timestep_sweep.csv"),
              ["J_coarse", "rho_star", "exact_rho"], rows)
    return ["timestep_sweep.csv"]


def scalar_case_config(sigma_hat: float, gamma_hat: float) -> RunConfig:
    """Scalar tracking case on T=50, L=50 with DT=1, exact fine and 10-step
    implicit-Euler coarse; gamma recovered from gamma_hat = DT/sqrt(gamma)."""
    return RunConfig(problem="scalar", objective="tracking", sigma=sigma_hat,
                     gamma=1.0 / gamma_hat ** 2, T=50.0, L=50, J_fine=10,
                     J_coarse=10, fine="exact", outer_tol=1e-12,
                     inner_tol=1e-10, max_outer=60, precond_enabled=False)


def exp_scalar_convergence_ab(outdir: str) -> list[str]:
    cases = {"A": (1e-6, 6.0), "B": (6e-4, 0.4)}
    hist_rows, rate_rows = [], []
    for name, (sh, gh) in cases.items():
        cfg = scalar_case_config(sh, gh)
        _, log, _ = solve_case(cfg)
        for rec in log.records:
            hist_rows.append((name, rec.iteration, rec.residual))
        fine = coefficients_at(ObjectiveKind.TRACKING,
                               PropagatorDescription(PropagatorKind.EXACT),
                               sh, gh)
        coarse = coefficients_at(
            ObjectiveKind.TRACKING,
            PropagatorDescription(PropagatorKind.IMPLICIT_EULER, J=10),
            sh, gh)
        rate_rows.append((name, rho_bound_tracking(fine, coarse),
                          fit_geometric_rate([r.residual for r in log.records])))
    write_csv(os.path.join(outdir, "residual_histories.csv"),
              ["case", "iteration", "residual"], hist_rows)
    write_csv(os.path.join(outdir, "rates.csv"),
              ["case", "rho_star", "fitted_rate"], rate_rows)
    return ["residual_histories.csv", "rates.csv"]


def exp_scalar_weak_scaling(outdir: str) -> list[str]:
    exact = PropagatorDescription(PropagatorKind.EXACT)
    ie1 = PropagatorDescription(PropagatorKind.IMPLICIT_EULER, J=1)
    rows = []
    for L_hat in (2, 5, 10, 20, 50, 100, 200):
        # fixed DT: hatted coordinates stay put as L_hat grows
        sh, gh = 1.0, 1.0
        fine = coefficients_at(ObjectiveKind.TRACKING, exact, sh, gh)
        coarse = coefficients_at(ObjectiveKind.TRACKING, ie1, sh, gh)
        rows.append(("fixed_DT", L_hat, rho_bound_tracking(fine, coarse),
                     exact_rho(SsigmaSpec(L_hat, fine, coarse,
                                          ObjectiveKind.TRACKING))))
        # fixed T: DT shrinks, so both hatted coordinates shrink with it
        DT = 1.0 / (L_hat + 1)
        fine = analysis.phi_psi_tracking_exact(1.0, 1.0, DT)
        coarse = analysis.phi_psi_tracking_ie(1.0, 1.0, DT, 1)
        rows.append(("fixed_T", L_hat, rho_bound_tracking(fine, coarse),
                     exact_rho(SsigmaSpec(L_hat, fine, coarse,
                                          ObjectiveKind.TRACKING))))
    write_csv(os.path.join(outdir, "weak_scaling.csv"),
              ["regime", "L_hat", "rho_star", "exact_rho"], rows)
    return ["weak_scaling.csv"]


def exp_tc_fotd_vs_fdto(outdir: str, gamma: float = 1e-6) -> list[str]:
    grid = log_grid(1e-4, 1e4, 50)
    rows = []
    for sh in grid:
        fine = analysis.phi_psi_tc_exact(sh, gamma, 1.0)
        fdto = analysis.phi_psi_tc_ie(sh, gamma, 1.0, 1, Discretization.FDTO)
        fotd = analysis.phi_psi_tc_ie(sh, gamma, 1.0, 1, Discretization.FOTD)
        rows.append((sh, analysis.rho_bound_terminal(fine, fdto),
                     analysis.rho_bound_terminal(fine, fotd)))
    write_csv(os.path.join(outdir, "fotd_vs_fdto.csv"),
              ["sigma_hat", "rho_star_fdto", "rho_star_fotd"], rows)
    return ["fotd_vs_fdto.csv"]


def exp_gmres_tolerance_study(outdir: str) -> list[str]:
    rows = []
    for tol in (1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8):
        cfg = _heat_run_config("heat", "tracking", 10, True, inner_tol=tol)
        _, log, summary = solve_case(cfg)
        rows.append((tol, summary["outer_iterations"],
                     summary["total_inner_iterations"], log.converged))
    write_csv(os.path.join(outdir, "gmres_tolerance.csv"),
              ["inner_tolerance", "outer_iters", "total_inner", "converged"],
              rows)
    return ["gmres_tolerance.csv"]


def exp_iteration_counts(outdir: str, problem: str) -> list[str]:
    rows = []
    for L_hat in (10, 100):
        for precond in (True, False):
            cfg = _heat_run_config(problem, "tracking", L_hat, precond)
            _, log, _ = solve_case(cfg)
            for rec in log.records[1:]:
                rows.append((L_hat, precond, rec.iteration, rec.inner_iters,
                             rec.residual))
    fname = "iteration_counts.csv"
    write_csv(os.path.join(outdir, fname),
              ["L_hat", "preconditioned", "outer_iteration", "inner_iters",
               "residual"], rows)
    return [fname]


def exp_heat_total_iterations(outdir: str) -> list[str]:
    rows = []
    for L_hat in (10, 25, 50, 100):
        for precond in (True, False):
            cfg = _heat_run_config("heat", "tracking", L_hat, precond)
            _, _, summary = solve_case(cfg)
            rows.append((L_hat, precond, summary["outer_iterations"],
                         summary["total_inner_iterations"]))
    write_csv(os.path.join(outdir, "total_iterations.csv"),
              ["L_hat", "preconditioned", "outer_iters", "total_inner"], rows)
    return ["total_iterations.csv"]


_EXPERIMENTS = {
    ExperimentId.BoundContours: lambda out: exp_bound_contours(out),
    ExperimentId.ScalarTimestepSweep: lambda out: exp_scalar_timestep_sweep(out),
    ExperimentId.ScalarConvergenceAB: lambda out: exp_scalar_convergence_ab(out),
    ExperimentId.ScalarWeakScaling: lambda out: exp_scalar_weak_scaling(out),
    ExperimentId.TcFotdVsFdto: lambda out: exp_tc_fotd_vs_fdto(out),
    ExperimentId.GmresToleranceStudy: lambda out: exp_gmres_tolerance_study(out),
    ExperimentId.HeatIterationCounts:
        lambda out: exp_iteration_counts(out, "heat"),
    ExperimentId.HeatTotalIterations: lambda out: exp_heat_total_iterations(out),
    ExperimentId.AdvectionIterationCounts:
        lambda out: exp_iteration_counts(out, "advection_diffusion"),
}


def cmd_experiment(args) -> int:
    try:
        exp_id = ExperimentId(args.id)
    except ValueError:
        raise ConfigError(
            f"unknown experiment '{args.id}'; choose from "
            f"{[e.value for e in ExperimentId]}")
    outdir = args.output or exp_id.value
    os.makedirs(outdir, exist_ok=True)
    files = _EXPERIMENTS[exp_id](outdir)
    write_json(os.path.join(outdir, "manifest.json"), {
        "experiment": exp_id.value,
        "files": files,
        "csv_version": CSV_VERSION_LINE,
    })
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paraopt-kit",
        description="Time-parallel optimal control: solves, convergence "
                    "bounds, and experiment data generation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_bound = sub.add_parser("bound", help="rho_star grid sweep -> CSV")
    p_bound.add_argument("--objective", default="tracking",
                         choices=["tracking", "terminal_cost"])
    p_bound.add_argument("--fine", default="exact", choices=["exact", "ie"])
    p_bound.add_argument("--j-fine", type=int, default=10)
    p_bound.add_argument("--fine-variant", default="fotd",
                         choices=["fotd", "fdto"])
    p_bound.add_argument("--j-coarse", type=int, default=1)
    p_bound.add_argument("--coarse-variant", default="fotd",
                         choices=["fotd", "fdto"])
    p_bound.add_argument("--sigma-grid", default="1e-4:1e4:50",
                         help="lo:hi:count (log-spaced)")
    p_bound.add_argument("--gamma-grid", default="1e-4:1e4:50")
    p_bound.add_argument("--output", "-o", default="out")
    p_bound.set_defaults(func=cmd_bound)

    p_solve = sub.add_parser("solve", help="run one ParaOpt solve")
    p_solve.add_argument("--config", help="JSON RunConfig file")
    p_solve.add_argument("--precond", action="store_true", default=False)
    p_solve.add_argument("--no-precond", action="store_true", default=False)
    for flag, field_name, ftype in _SOLVE_FLAGS:
        p_solve.add_argument(flag, dest=field_name, type=ftype, default=None)
    p_solve.set_defaults(func=cmd_solve)

    p_exp = sub.add_parser("experiment", help="regenerate figure data")
    p_exp.add_argument("id", help="|".join(e.value for e in ExperimentId))
    p_exp.add_argument("--output", "-o", default=None)
    p_exp.set_defaults(func=cmd_experiment)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
