import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paraopt_kit.core import assemble_jacobian
from paraopt_kit.preconditioner import (
    InversionMethod,
    SmallSystemMethod,
    alpha_circulant_eigenvalues,
    assemble_H_block,
    assemble_P_alpha,
    build_plan,
    solve_block_blackbox,
)
from paraopt_kit.problem import (
    LinearControlProblem,
    ObjectiveKind,
    make_decomposition,
    make_scalar_problem,
)
from paraopt_kit.propagators import black_box_view, build_implicit_euler_propagator

TR = ObjectiveKind.TRACKING
TC = ObjectiveKind.TERMINAL_COST


def tracking_setup(L=6, M=2, J_coarse=1):
    rng = np.random.default_rng(5)
    A = rng.standard_normal((M, M))
    K = A @ A.T + M * np.eye(M)
    p = LinearControlProblem(K=K, gamma=0.4, T=3.0,
                             y_init=rng.standard_normal(M), objective=TR,
                             y_d=lambda t: np.full(M, 1.0 + t))
    d = make_decomposition(p, L=L, J_fine=4, J_coarse=J_coarse)
    coarse = build_implicit_euler_propagator(p, d.DT, J_coarse)
    return p, d, coarse


def terminal_setup(L=5, M=2):
    rng = np.random.default_rng(6)
    A = rng.standard_normal((M, M))
    K = A @ A.T + M * np.eye(M)
    p = LinearControlProblem(K=K, gamma=0.4, T=2.5,
                             y_init=rng.standard_normal(M), objective=TC,
                             y_target=rng.standard_normal(M))
    d = make_decomposition(p, L=L, J_fine=4, J_coarse=1)
    coarse = build_implicit_euler_propagator(p, d.DT, 1)
    return p, d, coarse


class TestCirculantEigenvalues:
    @pytest.mark.parametrize("L_hat", [1, 2, 3, 7])
    @pytest.mark.parametrize("alpha", [-1.0, 0.01, 0.3 + 0.4j])
    def test_matches_dense_spectrum(self, L_hat, alpha):
        C = np.zeros((L_hat, L_hat), dtype=complex)
        for l in range(1, L_hat):
            C[l, l - 1] = -1.0
        C[0, L_hat - 1] = -alpha
        got = alpha_circulant_eigenvalues(L_hat, alpha)
        want = np.linalg.eigvals(C)
        # compare as multisets: conjugate pairs defeat lexicographic sorting
        dist = np.abs(got[:, None] - want[None, :])
        assert dist.min(axis=1).max() < 1e-10
        assert dist.min(axis=0).max() < 1e-10

    def test_zero_alpha_rejected(self):
        with pytest.raises(ValueError):
            alpha_circulant_eigenvalues(4, 0.0)


class TestBuildPlanValidation:
    def test_general_needs_unit_modulus(self):
        _, d, coarse = tracking_setup()
        with pytest.raises(ValueError):
            build_plan(coarse, d, 0.5, InversionMethod.GENERAL)

    def test_triangular_needs_no_Q_feedback(self):
        _, d, coarse = tracking_setup()
        with pytest.raises(ValueError):
            build_plan(coarse, d, 0.01, InversionMethod.TRIANGULAR)

    def test_triangular_accepts_terminal_cost(self):
        _, d, coarse = terminal_setup()
        plan = build_plan(coarse, d, 0.01, InversionMethod.TRIANGULAR)
        assert plan.L_hat == d.L_hat


class TestApplyInverse:
    @pytest.mark.parametrize("small", [SmallSystemMethod.EXPLICIT_DIRECT,
                                       SmallSystemMethod.BLACK_BOX_ITERATIVE])
    @pytest.mark.parametrize("J_coarse", [1, 2])
    def test_general_matches_dense_tracking(self, small, J_coarse):
        p, d, coarse = tracking_setup(J_coarse=J_coarse)
        plan = build_plan(coarse, d, -1.0, InversionMethod.GENERAL, small)
        P = assemble_P_alpha(coarse, d, -1.0)
        rng = np.random.default_rng(0)
        v = rng.standard_normal(2 * d.L_hat * p.M)
        x = plan.apply_inverse(v)
        assert np.linalg.norm(P @ x - v) <= 1e-10 * np.linalg.norm(v)

    def test_general_matches_dense_terminal(self):
        p, d, coarse = terminal_setup()
        plan = build_plan(coarse, d, -1.0, InversionMethod.GENERAL)
        P = assemble_P_alpha(coarse, d, -1.0)
        rng = np.random.default_rng(1)
        v = rng.standard_normal(2 * d.L_hat * p.M)
        x = plan.apply_inverse(v)
        assert np.linalg.norm(P @ x - v) <= 1e-10 * np.linalg.norm(v)

    @pytest.mark.parametrize("alpha", [0.01, 0.2, -0.05])
    def test_triangular_matches_dense(self, alpha):
        p, d, coarse = terminal_setup()
        plan = build_plan(coarse, d, alpha, InversionMethod.TRIANGULAR)
        P = assemble_P_alpha(coarse, d, alpha)
        rng = np.random.default_rng(2)
        v = rng.standard_normal(2 * d.L_hat * p.M)
        x = plan.apply_inverse(v)
        assert np.linalg.norm(P @ x - v) <= 1e-10 * np.linalg.norm(v)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 1000))
    def test_linearity(self, seed):
        p, d, coarse = tracking_setup()
        plan = build_plan(coarse, d, -1.0, InversionMethod.GENERAL)
        rng = np.random.default_rng(seed)
        u = rng.standard_normal(2 * d.L_hat * p.M)
        v = rng.standard_normal(2 * d.L_hat * p.M)
        a, b = rng.standard_normal(2)
        lhs = plan.apply_inverse(a * u + b * v)
        rhs = a * plan.apply_inverse(u) + b * plan.apply_inverse(v)
        np.testing.assert_allclose(lhs, rhs, atol=1e-11 * np.linalg.norm(rhs))

    def test_thread_count_does_not_change_results(self, monkeypatch):
        p, d, coarse = tracking_setup(L=9, M=3)
        rng = np.random.default_rng(3)
        v = rng.standard_normal(2 * d.L_hat * p.M)
        results = []
        for workers in ("1", "4"):
            monkeypatch.setenv("PARAOPT_THREADS", workers)
            plan = build_plan(coarse, d, -1.0, InversionMethod.GENERAL)
            results.append(plan.apply_inverse(v))
        assert np.array_equal(results[0], results[1])


class TestBlockSolvers:
    def test_blackbox_matches_direct(self):
        _, d, coarse = tracking_setup(J_coarse=2)
        d_l = -0.3 + 0.7j
        H = assemble_H_block(coarse, d_l)
        rng = np.random.default_rng(4)
        rhs = rng.standard_normal(2 * coarse.M) + 1j * rng.standard_normal(
            2 * coarse.M)
        view = black_box_view(coarse)
        got = solve_block_blackbox(view, d_l, rhs)
        np.testing.assert_allclose(H @ got, rhs, atol=1e-9)


class TestEigenvalueClustering:
    @pytest.mark.parametrize("setup,method,alpha", [
        (tracking_setup, InversionMethod.GENERAL, -1.0),
        (terminal_setup, InversionMethod.GENERAL, -1.0),
        (terminal_setup, InversionMethod.TRIANGULAR, 0.01),
    ])
    def test_at_most_2M_eigenvalues_leave_one(self, setup, method, alpha):
        p, d, coarse = setup()
        P = assemble_P_alpha(coarse, d, alpha)
        At = assemble_jacobian(coarse, p.objective, d)
        S = np.linalg.solve(P, At.astype(complex))
        ev = np.linalg.eigvals(S)
        assert np.sum(np.abs(ev - 1.0) > 1e-8) <= 2 * p.M
