import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paraopt_kit.problem import (
    LinearControlProblem,
    ObjectiveKind,
    make_scalar_problem,
)
from paraopt_kit.propagators import (
    Discretization,
    black_box_view,
    build_exact_propagator,
    build_implicit_euler_propagator,
    exact_phi_psi_terminal,
    exact_phi_psi_tracking,
    extract_phi_psi_scalar,
    propagate,
)

TR = ObjectiveKind.TRACKING
TC = ObjectiveKind.TERMINAL_COST


def small_tracking_problem():
    K = np.array([[2.0, -0.5], [-0.5, 1.0]])
    return LinearControlProblem(K=K, gamma=0.3, T=2.0,
                                y_init=np.array([1.0, -0.4]), objective=TR,
                                y_d=lambda t: np.array([np.sin(t), 1.0 + t]))


class TestImplicitEulerBuild:
    def test_tracking_fdto_rejected(self):
        p = small_tracking_problem()
        with pytest.raises(ValueError):
            build_implicit_euler_propagator(p, 0.5, 2, Discretization.FDTO)

    def test_DT_must_divide_horizon(self):
        p = small_tracking_problem()
        with pytest.raises(ValueError):
            build_implicit_euler_propagator(p, 0.7, 2)

    def test_tracking_shares_blocks(self):
        p = small_tracking_problem()
        prop = build_implicit_euler_propagator(p, 0.5, 3)
        np.testing.assert_allclose(prop.Phi_P, prop.Phi_Q.T, atol=1e-13)
        np.testing.assert_allclose(prop.Psi_P, prop.Psi_Q.T, atol=1e-13)

    def test_terminal_cost_has_no_Q_feedback(self):
        p = make_scalar_problem(2.0, 0.5, 2.0, TC)
        for variant in (Discretization.FOTD, Discretization.FDTO):
            prop = build_implicit_euler_propagator(p, 0.5, 3, variant)
            assert np.linalg.norm(prop.Psi_Q) == 0.0

    def test_eigen_coefficients_match_scalar_oracle(self):
        p = small_tracking_problem()
        DT, J = 0.5, 4
        prop = build_implicit_euler_propagator(p, DT, J)
        w, Q = np.linalg.eigh(p.K)
        for i, sigma in enumerate(w):
            phi, psi = extract_phi_psi_scalar(sigma, p.gamma, DT / J, J, TR)
            v = Q[:, i]
            assert v @ prop.Phi_P @ v == pytest.approx(phi, abs=1e-12)
            assert v @ prop.Psi_P @ v == pytest.approx(psi, abs=1e-12)


class TestExactBuild:
    def test_requires_symmetric_K(self):
        K = np.array([[1.0, 1.0], [0.0, 1.0]])
        p = LinearControlProblem(K=K, gamma=1.0, T=1.0, y_init=np.zeros(2),
                                 objective=TC, y_target=np.zeros(2))
        with pytest.raises(ValueError):
            build_exact_propagator(p, 0.5)

    @pytest.mark.parametrize("objective", [TR, TC])
    def test_implicit_euler_converges_first_order(self, objective):
        kwargs = {"y_d": lambda t: np.array([1.0])} if objective is TR else {}
        p = make_scalar_problem(1.0, 1.0, 1.0, objective, **kwargs)
        exact = build_exact_propagator(p, 1.0)
        errs = []
        for J in (64, 128):
            ie = build_implicit_euler_propagator(p, 1.0, J)
            errs.append(abs(ie.Phi_P[0, 0] - exact.Phi_P[0, 0])
                        + abs(ie.Psi_P[0, 0] - exact.Psi_P[0, 0]))
        assert errs[1] == pytest.approx(errs[0] / 2, rel=0.1)

    def test_terminal_closed_forms(self):
        sh, gh = 1.3, 0.8
        phi, psi = exact_phi_psi_terminal(sh, gh)
        assert phi == pytest.approx(np.exp(-sh))
        assert psi == pytest.approx(gh * np.sinh(sh) / sh * np.exp(-sh))

    def test_tracking_closed_form_against_matrix_exponential(self):
        import scipy.linalg
        sh, gh = 0.9, 0.6
        # the state/adjoint pair evolves by the 2x2 generator
        # [[-sh, -gh], [-gh, sh]] over a unit hatted interval
        E = scipy.linalg.expm(np.array([[-sh, -gh], [-gh, sh]]))
        # boundary-value rearrangement of the flow map gives (phi, psi)
        phi_ref = E[0, 0] - E[0, 1] * E[1, 0] / E[1, 1]
        psi_ref = -E[0, 1] / E[1, 1]
        phi, psi = exact_phi_psi_tracking(sh, gh)
        assert phi == pytest.approx(phi_ref, abs=1e-12)
        assert psi == pytest.approx(psi_ref, abs=1e-12)


class TestPropagate:
    def test_affine_in_boundary_data(self):
        p = small_tracking_problem()
        prop = build_implicit_euler_propagator(p, 0.5, 3)
        rng = np.random.default_rng(0)
        y0, lam = rng.standard_normal(2), rng.standard_normal(2)
        yJ, lam0 = propagate(prop, 2, y0, lam)
        yJ0, lam00 = propagate(prop, 2, np.zeros(2), np.zeros(2))
        np.testing.assert_allclose(
            yJ - yJ0, prop.Phi_P @ y0 - prop.Psi_P @ lam, atol=1e-13)
        np.testing.assert_allclose(
            lam0 - lam00, prop.Psi_Q @ y0 + prop.Phi_Q @ lam, atol=1e-13)

    def test_black_box_view_matches_propagate(self):
        p = small_tracking_problem()
        prop = build_implicit_euler_propagator(p, 0.5, 2)
        view = black_box_view(prop)
        y0 = np.array([0.3, -1.2])
        lam = np.array([0.5, 0.1])
        yJ, lam0 = propagate(prop, 1, y0, lam)
        np.testing.assert_allclose(view.P(y0, lam), yJ)
        np.testing.assert_allclose(view.Q(y0, lam), lam0)


class TestScalarOracle:
    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_structure_assertions_hold_on_random_draws(self, seed):
        rng = np.random.default_rng(seed)
        sigma = rng.uniform(0.0, 20.0)
        gamma = 10.0 ** rng.uniform(-3, 2)
        tau = 10.0 ** rng.uniform(-2, 0.5)
        J = int(rng.integers(1, 9))
        for obj, variant in [(TR, Discretization.FOTD),
                             (TC, Discretization.FOTD),
                             (TC, Discretization.FDTO)]:
            phi, psi = extract_phi_psi_scalar(sigma, gamma, tau, J, obj, variant)
            assert 0.0 < phi <= 1.0
            assert psi >= 0.0
