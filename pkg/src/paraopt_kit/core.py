"""ParaOpt outer loop: matching conditions, Jacobian actions, Newton-GMRES.

The stacked unknown is x = [y_1..y_Lhat, lam_1..lam_Lhat] (each block of
size M). For affine propagators the matching system is linear, f(x) = A x - b,
and each inexact-Newton step solves the coarse Jacobian system
A_tilde * delta = -f(x).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from paraopt_kit.numerics import GmresConfig, gmres
from paraopt_kit.problem import LinearControlProblem, ObjectiveKind, TimeDecomposition
from paraopt_kit.propagators import AffinePropagator, propagate


@dataclass
class PairedTrajectory:
    """Interval-boundary unknowns: y and rescaled-adjoint blocks 1..Lhat."""

    y: np.ndarray  # (L_hat, M)
    lam_hat: np.ndarray  # (L_hat, M)

    @classmethod
    def zeros(cls, L_hat: int, M: int) -> "PairedTrajectory":
        return cls(np.zeros((L_hat, M)), np.zeros((L_hat, M)))

    @classmethod
    def from_vector(cls, v: np.ndarray, L_hat: int, M: int) -> "PairedTrajectory":
        half = L_hat * M
        return cls(v[:half].reshape(L_hat, M).copy(),
                   v[half:].reshape(L_hat, M).copy())

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.y.ravel(), self.lam_hat.ravel()])


@dataclass
class NewtonConfig:
    outer_tolerance: float = 1e-6
    max_outer: int = 100
    inner: GmresConfig = field(default_factory=lambda: GmresConfig(rel_tolerance=1e-4))
    preconditioner: Optional[object] = None  # PreconditionerPlan or None

    def __post_init__(self):
        if self.outer_tolerance <= 0:
            raise ValueError("outer_tolerance must be positive")


@dataclass
class OuterRecord:
    iteration: int
    residual: float
    inner_iters: int
    seconds: float


@dataclass
class SolveLog:
    records: list[OuterRecord] = field(default_factory=list)
    converged: bool = False
    aborted: Optional[str] = None

    def csv_rows(self) -> list[tuple]:
        return [(r.iteration, r.residual, r.inner_iters, r.seconds)
                for r in self.records]


def matching_residual(fine: AffinePropagator, problem: LinearControlProblem,
                      decomp: TimeDecomposition, x: PairedTrajectory) -> np.ndarray:
    """Stacked continuity defects of state and adjoint at interval boundaries."""
    Lh, M = decomp.L_hat, problem.M
    if x.y.shape != (Lh, M):
        raise ValueError("trajectory shape does not match the decomposition")
    r = np.zeros(2 * Lh * M)
    zero = np.zeros(M)
    for l in range(1, Lh + 1):
        y_prev = problem.y_init if l == 1 else x.y[l - 2]
        p_val, _ = propagate(fine, l, y_prev, x.lam_hat[l - 1])
        r[(l - 1) * M:l * M] = x.y[l - 1] - p_val
    for l in range(1, Lh):
        _, q_val = propagate(fine, l + 1, x.y[l - 1], x.lam_hat[l])
        r[(Lh + l - 1) * M:(Lh + l) * M] = x.lam_hat[l - 1] - q_val
    if problem.objective is ObjectiveKind.TRACKING:
        # terminal adjoint is zero; last interval index is L = Lhat + 1
        _, q_val = propagate(fine, Lh + 1, x.y[Lh - 1], zero)
        r[-M:] = x.lam_hat[Lh - 1] - q_val
    else:
        r[-M:] = x.lam_hat[Lh - 1] - (x.y[Lh - 1] - problem.y_target)
    return r


def apply_jacobian(prop: AffinePropagator, objective: ObjectiveKind,
                   decomp: TimeDecomposition, v: np.ndarray) -> np.ndarray:
    """Matrix-free product with the matching-condition Jacobian built from
    the given propagator (offsets do not enter a Jacobian of an affine map)."""
    Lh = decomp.L_hat
    M = prop.M
    y = v[:Lh * M].reshape(Lh, M)
    lam = v[Lh * M:].reshape(Lh, M)
    out_y = np.empty_like(y)
    out_l = np.empty_like(lam)
    for l in range(Lh):
        out_y[l] = y[l] + lam[l] @ prop.Psi_P.T
        if l > 0:
            out_y[l] -= y[l - 1] @ prop.Phi_P.T
    for l in range(Lh - 1):
        out_l[l] = lam[l] - y[l] @ prop.Psi_Q.T - lam[l + 1] @ prop.Phi_Q.T
    if objective is ObjectiveKind.TRACKING:
        out_l[Lh - 1] = lam[Lh - 1] - y[Lh - 1] @ prop.Psi_Q.T
    else:
        out_l[Lh - 1] = lam[Lh - 1] - y[Lh - 1]
    return np.concatenate([out_y.ravel(), out_l.ravel()])


def apply_A(fine: AffinePropagator, decomp: TimeDecomposition,
            v: np.ndarray) -> np.ndarray:
    return apply_jacobian(fine, fine.objective, decomp, v)


def apply_A_tilde(coarse: AffinePropagator, decomp: TimeDecomposition,
                  v: np.ndarray) -> np.ndarray:
    return apply_jacobian(coarse, coarse.objective, decomp, v)


def assemble_jacobian(prop: AffinePropagator, objective: ObjectiveKind,
                      decomp: TimeDecomposition) -> np.ndarray:
    """Dense matching-condition Jacobian; oracle-sized problems only."""
    Lh, M = decomp.L_hat, prop.M
    n = 2 * Lh * M
    A = np.zeros((n, n))
    e = np.eye(n)
    for j in range(n):
        A[:, j] = apply_jacobian(prop, objective, decomp, e[:, j])
    return A


def assemble_system(fine: AffinePropagator, problem: LinearControlProblem,
                    decomp: TimeDecomposition) -> tuple[np.ndarray, np.ndarray]:
    """Dense (A, b) with matching_residual(x) = A x - b; oracle helper."""
    A = assemble_jacobian(fine, problem.objective, decomp)
    zero = PairedTrajectory.zeros(decomp.L_hat, problem.M)
    b = -matching_residual(fine, problem, decomp, zero)
    return A, b


def paraopt_solve(problem: LinearControlProblem, decomp: TimeDecomposition,
                  fine: AffinePropagator, coarse: AffinePropagator,
                  cfg: NewtonConfig,
                  ) -> tuple[PairedTrajectory, SolveLog]:
    """Inexact-Newton iteration on the matching conditions.

    Each outer step solves A_tilde * delta = -f(x) with GMRES (right
    preconditioning when a plan is configured) and stops once the residual
    norm drops below outer_tolerance relative to max(1, initial residual).
    """
    Lh, M = decomp.L_hat, problem.M
    x = PairedTrajectory.zeros(Lh, M)
    log = SolveLog()

    def op(v):
        return apply_A_tilde(coarse, decomp, v)

    precond = None
    if cfg.preconditioner is not None:
        plan = cfg.preconditioner
        precond = lambda v: plan.apply_inverse(v)

    r = matching_residual(fine, problem, decomp, x)
    r0 = np.linalg.norm(r)
    scale = max(1.0, r0)
    log.records.append(OuterRecord(0, r0, 0, 0.0))
    recent: list[float] = [r0]

    for k in range(1, cfg.max_outer + 1):
        if np.linalg.norm(r) <= cfg.outer_tolerance * scale:
            log.converged = True
            return x, log
        t0 = time.perf_counter()
        try:
            delta, rep = gmres(op, -r, precond=precond, cfg=cfg.inner)
        except FloatingPointError as exc:
            log.aborted = f"inner solver failure: {exc}"
            return x, log
        x = PairedTrajectory.from_vector(x.as_vector() + delta, Lh, M)
        r = matching_residual(fine, problem, decomp, x)
        rnorm = np.linalg.norm(r)
        log.records.append(OuterRecord(k, rnorm, rep.iterations,
                                       time.perf_counter() - t0))
        recent.append(rnorm)
        if len(recent) > 6:
            recent.pop(0)
        if not np.isfinite(rnorm):
            log.aborted = "residual became non-finite"
            return x, log
        if len(recent) == 6 and recent[-1] > 10.0 * recent[0]:
            log.aborted = "residual grew 10x over 5 iterations"
            return x, log

    log.converged = np.linalg.norm(r) <= cfg.outer_tolerance * scale
    return x, log
