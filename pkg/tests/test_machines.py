import numpy as np
import pytest

from nyskm.data import gram
from nyskm.linalg import InvalidInputError, solve_regularized
from nyskm.machines import (
    SolverConfig,
    TrainedModel,
    decision_scores,
    gsa_krr_woodbury,
    krr_dual_objective,
    lla_to_gsa_alpha,
    ncr_krr_analytic,
    predict,
    solve_ridge_linear,
    solve_svm_linear,
    svm_dual_objective,
    train,
    train_both,
)
from nyskm.nystrom import build
from nyskm.sampling import sample_uniform
from nyskm.synth import make_gaussian_blobs


def ridge_objective(G, y, w, lambda0):
    n = y.shape[0]
    r = G.T @ w - y
    return (r @ r + lambda0 * w @ w) / n


class TestRidgeLinear:
    def test_identity_features(self):
        y = np.array([1.0, -2.0, 3.0])
        w = solve_ridge_linear(np.eye(3), y, 0.5)
        np.testing.assert_allclose(w, y / 1.5, atol=1e-12)

    def test_zero_targets(self):
        rng = np.random.default_rng(0)
        G = rng.standard_normal((4, 10))
        np.testing.assert_allclose(
            solve_ridge_linear(G, np.zeros(10), 1.0), np.zeros(4), atol=1e-12
        )

    def test_local_optimality_probe(self):
        rng = np.random.default_rng(1)
        G = rng.standard_normal((5, 40))
        y = rng.standard_normal(40)
        w = solve_ridge_linear(G, y, 0.7)
        base = ridge_objective(G, y, w, 0.7)
        for _ in range(100):
            delta = rng.standard_normal(5)
            delta *= 1e-3 / np.linalg.norm(delta)
            assert ridge_objective(G, y, w + delta, 0.7) >= base - 1e-12


def projected_gradient_svm(G, y, C, iters=200000, lr=None):
    """Brute-force reference solver for the hinge dual (oracle only)."""
    s, n = G.shape
    Gy = G * y
    Q = Gy.T @ Gy
    if lr is None:
        lr = 1.0 / (np.linalg.eigvalsh(Q).max() + 1e-12)
    alpha = np.zeros(n)
    for _ in range(iters):
        grad = Q @ alpha - 1.0
        new = np.clip(alpha - lr * grad, 0.0, C)
        if np.max(np.abs(new - alpha)) < 1e-12:
            alpha = new
            break
        alpha = new
    return alpha


class TestSvmLinear:
    def test_separable_two_points(self):
        G = np.array([[1.0, -1.0], [0.0, 0.0]])
        y = np.array([1.0, -1.0])
        w = solve_svm_linear(G, y, C=100.0, max_iter=2000, tol=1e-10)
        assert np.sign(w @ G[:, 0]) == 1.0
        assert np.sign(w @ G[:, 1]) == -1.0
        assert w @ G[:, 0] >= 1.0 - 1e-6

    def test_small_c_saturates_duals(self):
        rng = np.random.default_rng(2)
        G = rng.standard_normal((3, 8))
        y = np.ones(8)
        C = 1e-4
        w = solve_svm_linear(G, y, C=C, max_iter=1000, tol=1e-12)
        # all duals pinned at C, so w = C * sum g_i
        np.testing.assert_allclose(w, C * G.sum(axis=1), rtol=1e-6)

    def test_matches_projected_gradient_reference(self):
        rng = np.random.default_rng(3)
        G = rng.standard_normal((4, 30))
        y = np.sign(rng.standard_normal(30))
        y[y == 0] = 1.0
        C = 1.0
        w = solve_svm_linear(G, y, C=C, max_iter=5000, tol=1e-10)
        alpha_ref = projected_gradient_svm(G, y, C)
        obj_ref = svm_dual_objective(G, y, alpha_ref)
        w_ref = G @ (alpha_ref * y)
        # compare primal objectives through the dual value of each w
        assert np.linalg.norm(w - w_ref) <= 1e-3 * max(1.0, np.linalg.norm(w_ref))
        obj_cd = obj_ref - 0.5 * np.linalg.norm(w - w_ref) ** 2
        assert abs(obj_cd - obj_ref) <= 1e-4 * max(1.0, abs(obj_ref))

    def test_non_binary_labels_rejected(self):
        with pytest.raises(InvalidInputError):
            solve_svm_linear(np.eye(2), np.array([1.0, 2.0]), 1.0)


class TestTrain:
    def test_exact_case_matches_full_kernel_krr(self, blobs, kernel, blobs_gram):
        solver = SolverConfig(loss="squared", reg_lambda0=1.0)
        lm = sample_uniform(blobs, blobs.n, seed=0)
        model = train(blobs, kernel, lm, solver, "lla")
        test = make_gaussian_blobs(20, d=5, num_classes=3, seed=99)
        scores = decision_scores(model, test.X)
        # direct full-kernel ridge: alpha = (K + l0 I)^{-1} y per class
        k_rows = gram(blobs.X, test.X, kernel)
        for k in range(3):
            y = np.where(blobs.labels == k, 1.0, -1.0)
            alpha = solve_regularized(blobs_gram, y, 1.0)
            np.testing.assert_allclose(scores[:, k], alpha @ k_rows, atol=1e-6)

    def test_ncr_equals_lla_for_krr(self, blobs, kernel):
        solver = SolverConfig(loss="squared", reg_lambda0=2.0)
        lm = sample_uniform(blobs, 15, seed=1)
        model = train(blobs, kernel, lm, solver, "lla")
        test = make_gaussian_blobs(25, d=5, num_classes=3, seed=98)
        scores = decision_scores(model, test.X)
        k_test = gram(lm.points, test.X, kernel)
        for k in range(3):
            y = np.where(blobs.labels == k, 1.0, -1.0)
            beta = ncr_krr_analytic(
                model.nystrom.K_mn, model.nystrom.K_mm, y, 2.0
            )
            np.testing.assert_allclose(scores[:, k], beta @ k_test, atol=1e-6)

    def test_shared_weights_bitwise_equal(self, blobs, kernel):
        solver = SolverConfig(loss="squared", reg_lambda0=1.0)
        lm = sample_uniform(blobs, 10, seed=2)
        lla, gsa = train_both(blobs, kernel, lm, solver)
        assert lla.W is gsa.W or np.array_equal(lla.W, gsa.W)

    def test_training_deterministic(self, blobs, kernel):
        solver = SolverConfig(loss="hinge", svm_C=1.0, max_iter=200, seed=7)
        lm = sample_uniform(blobs, 10, seed=3)
        a = train(blobs, kernel, lm, solver, "gsa")
        b = train(blobs, kernel, lm, solver, "gsa")
        np.testing.assert_array_equal(a.W, b.W)
        np.testing.assert_array_equal(a.Alpha, b.Alpha)

    def test_smoke_hinge_larger_instance(self, kernel):
        ds = make_gaussian_blobs(500, d=6, num_classes=3, seed=5)
        solver = SolverConfig(loss="hinge", svm_C=1.0, max_iter=50)
        lm = sample_uniform(ds, 50, seed=0)
        lla, gsa = train_both(ds, kernel, lm, solver)
        _, pred = predict(lla, ds.X)
        assert np.mean(pred == ds.labels) > 0.8
        assert np.all(np.isfinite(gsa.Alpha))


class TestPredict:
    def test_exact_case_gsa_equals_lla(self, blobs, kernel):
        solver = SolverConfig(loss="squared", reg_lambda0=1.0)
        lm = sample_uniform(blobs, blobs.n, seed=0)
        lla, gsa = train_both(blobs, kernel, lm, solver)
        z = blobs.X[:10]
        s_lla = decision_scores(lla, z)
        s_gsa = decision_scores(gsa, z)
        np.testing.assert_allclose(s_lla, s_gsa, atol=1e-6)

    def test_vanishing_kernel_row_gives_zero_score(self, blobs, kernel):
        solver = SolverConfig(loss="squared", reg_lambda0=1.0)
        lm = sample_uniform(blobs, 8, seed=4)
        model = train(blobs, kernel, lm, solver, "lla")
        far = np.full((1, blobs.d), 1e4)
        scores = decision_scores(model, far)
        np.testing.assert_allclose(scores, 0.0, atol=1e-10)

    def test_gsa_score_matches_alpha_definition(self, blobs, kernel, blobs_gram):
        solver = SolverConfig(loss="squared", reg_lambda0=1.0)
        lm = sample_uniform(blobs, 12, seed=5)
        _, gsa = train_both(blobs, kernel, lm, solver)
        z = make_gaussian_blobs(5, d=5, seed=97).X
        scores = decision_scores(gsa, z)
        k_rows = gram(blobs.X, z, kernel)
        for k in range(gsa.num_classes):
            alpha = lla_to_gsa_alpha(gsa.nystrom.G, gsa.W[:, k])
            np.testing.assert_allclose(scores[:, k], alpha @ k_rows, atol=1e-8)

    def test_tie_breaks_to_lowest_class(self, blobs, kernel):
        solver = SolverConfig(loss="squared", reg_lambda0=1.0)
        lm = sample_uniform(blobs, 8, seed=6)
        model = train(blobs, kernel, lm, solver, "lla")
        far = np.full((1, blobs.d), 1e4)  # all scores exactly 0
        _, pred = predict(model, far)
        assert pred[0] == 0


class TestAlphaConversion:
    def test_identity_features(self):
        w = np.array([1.0, 2.0])
        np.testing.assert_allclose(lla_to_gsa_alpha(np.eye(2), w), w, atol=1e-12)

    def test_zero_weights(self):
        rng = np.random.default_rng(6)
        G = rng.standard_normal((3, 7))
        np.testing.assert_allclose(
            lla_to_gsa_alpha(G, np.zeros(3)), np.zeros(7), atol=1e-12
        )

    def test_objective_matches_woodbury_optimum(self, blobs, kernel):
        solver = SolverConfig(loss="squared", reg_lambda0=1.0)
        lm = sample_uniform(blobs, 10, seed=7)
        model = train(blobs, kernel, lm, solver, "lla")
        G = model.nystrom.G
        y = np.where(blobs.labels == 0, 1.0, -1.0)
        alpha_hat = lla_to_gsa_alpha(G, model.W[:, 0])
        alpha_wb = gsa_krr_woodbury(G, y, 1.0)
        o1 = krr_dual_objective(G, y, alpha_hat, 1.0)
        o2 = krr_dual_objective(G, y, alpha_wb, 1.0)
        assert abs(o1 - o2) <= 1e-8 * max(1.0, abs(o2))


class TestNcrAnalytic:
    def test_scalar_formula(self):
        rng = np.random.default_rng(8)
        k_row = rng.standard_normal((1, 6))
        y = rng.standard_normal(6)
        beta = ncr_krr_analytic(k_row, np.array([[1.0]]), y, 0.5)
        expected = (k_row @ y) / (k_row @ k_row.T + 0.5)
        np.testing.assert_allclose(beta, expected.ravel(), atol=1e-10)

    def test_zero_targets(self):
        rng = np.random.default_rng(9)
        K_mn = rng.standard_normal((3, 8))
        K_mm = np.eye(3)
        np.testing.assert_allclose(
            ncr_krr_analytic(K_mn, K_mm, np.zeros(8), 1.0), np.zeros(3), atol=1e-12
        )


class TestWoodbury:
    def test_zero_features(self):
        y = np.array([1.0, 2.0, 3.0])
        np.testing.assert_allclose(
            gsa_krr_woodbury(np.zeros((2, 3)), y, 2.0), y / 2.0, atol=1e-12
        )

    def test_square_invertible_matches_direct(self):
        rng = np.random.default_rng(10)
        G = rng.standard_normal((6, 6)) + 3 * np.eye(6)
        y = rng.standard_normal(6)
        alpha = gsa_krr_woodbury(G, y, 0.5)
        direct = np.linalg.solve(G.T @ G + 0.5 * np.eye(6), y)
        assert np.linalg.norm(alpha - direct) <= 1e-8

    def test_residual_on_larger_instance(self):
        rng = np.random.default_rng(11)
        G = rng.standard_normal((10, 200))
        y = rng.standard_normal(200)
        alpha = gsa_krr_woodbury(G, y, 1.0)
        res = G.T @ (G @ alpha) + alpha - y
        assert np.linalg.norm(res) <= 1e-9 * max(1.0, np.linalg.norm(y))
