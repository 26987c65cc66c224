import numpy as np
import pytest

from examweight import solvers
from examweight.solvers import SolverConfig, _huber_objective_and_grad


def concomitant_objective(s, a, w, c, sigma, eps, alpha):
    r = a - c - s @ np.atleast_1d(w)
    z = r / sigma
    h = np.where(np.abs(z) <= eps, z * z, 2 * eps * np.abs(z) - eps * eps)
    return len(a) * sigma + sigma * h.sum() + alpha * np.dot(w, w)


def grid_minimize(s, a, eps, w_range, c_range, sigma_range, rounds=4, pts=21):
    """Independent oracle: iterative grid refinement over (w, c, sigma)."""
    best = None
    for _ in range(rounds):
        ws = np.linspace(*w_range, pts)
        cs = np.linspace(*c_range, pts)
        sigmas = np.linspace(*sigma_range, pts)
        for w in ws:
            for c in cs:
                for sig in sigmas:
                    f = concomitant_objective(s, a, np.array([w]), c, sig, eps, 0.0)
                    if best is None or f < best[0]:
                        best = (f, w, c, sig)
        _, w0, c0, sig0 = best
        dw = (w_range[1] - w_range[0]) / 10
        dc = (c_range[1] - c_range[0]) / 10
        ds = (sigma_range[1] - sigma_range[0]) / 10
        w_range = (w0 - dw, w0 + dw)
        c_range = (c0 - dc, c0 + dc)
        sigma_range = (max(sig0 - ds, 1e-6), sig0 + ds)
    return best


class TestFitHuber:
    def test_exact_fit_recovers_truth(self):
        rng = np.random.default_rng(0)
        s = rng.random((12, 3))
        w_true = np.array([5.0, -2.0, 3.0])
        a = s @ w_true + 4.0
        cfg = SolverConfig(huber_regularization=0.0)
        sol = solvers.fit_huber(s, a, cfg)
        np.testing.assert_allclose(solvers.predict(sol, s), a, atol=1e-6)
        np.testing.assert_allclose(sol.question_weights, w_true, atol=1e-5)
        assert sol.intercept == pytest.approx(4.0, abs=1e-5)
        # concomitant scale collapses to its lower bound on exact-fit data
        assert sol.sigma < 1e-3 * np.max(np.abs(a))

    def test_zero_target(self):
        sol = solvers.fit_huber(np.eye(3), np.zeros(3))
        np.testing.assert_array_equal(sol.question_weights, 0.0)
        assert sol.intercept == 0.0

    @pytest.mark.parametrize("seed", range(8))
    def test_huge_epsilon_degenerates_to_intercept_solver(self, seed):
        rng = np.random.default_rng(seed)
        n, m = 25, 4
        s = rng.random((n, m))
        a = s @ (rng.standard_normal(m) * 5) + 3 + rng.standard_normal(n)
        cfg = SolverConfig(huber_epsilon=1e6, huber_regularization=0.0)
        h = solvers.fit_huber(s, a, cfg)
        lin = solvers.fit_linear_intercept(s, a)
        scale = max(1.0, np.max(np.abs(lin.question_weights)))
        assert np.max(np.abs(h.question_weights - lin.question_weights)) < 1e-6 * scale
        assert abs(h.intercept - lin.intercept) < 1e-6 * max(1.0, abs(lin.intercept))

    def test_outlier_fixture_more_robust_than_ols(self):
        x = np.arange(1.0, 9.0).reshape(-1, 1)
        a = x.ravel().copy()
        a[-1] = 100.0
        cfg = SolverConfig(huber_epsilon=1.35, huber_regularization=0.0)
        hub = solvers.fit_huber(x, a, cfg)
        ols = solvers.fit_linear_intercept(x, a)
        assert abs(hub.question_weights[0] - 1.0) < 0.05
        assert abs(ols.question_weights[0] - 1.0) > 1.0

    def test_outlier_fixture_matches_grid_oracle(self):
        x = np.array([[1.0], [2.0], [3.0], [4.0]])
        a = np.array([1.0, 2.0, 3.0, 100.0])
        eps = 1.35
        cfg = SolverConfig(huber_epsilon=eps, huber_regularization=0.0)
        sol = solvers.fit_huber(x, a, cfg)
        f_sol = concomitant_objective(
            x, a, sol.question_weights, sol.intercept, sol.sigma, eps, 0.0
        )
        f_grid, w_g, c_g, _ = grid_minimize(
            x, a, eps, w_range=(-5, 35), c_range=(-40, 40), sigma_range=(0.01, 60)
        )
        assert f_sol <= f_grid + 1e-6 * abs(f_grid)
        assert sol.question_weights[0] == pytest.approx(w_g, abs=0.05)

    def test_objective_monotone_descent(self):
        rng = np.random.default_rng(9)
        s = rng.random((10, 6))
        a = rng.random(10) * 100
        sol = solvers.fit_huber(s, a)
        hist = np.array(sol.objective_history)
        assert len(hist) >= 2
        assert np.all(np.diff(hist) <= 1e-12)

    def test_iteration_cap_returns_best_iterate(self):
        rng = np.random.default_rng(10)
        s = rng.random((10, 6))
        a = rng.random(10) * 100
        cfg = SolverConfig(huber_max_iterations=3)
        sol = solvers.fit_huber(s, a, cfg)
        assert not sol.converged
        assert sol.gradient_norm is not None

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        n, m = 7, 4
        s = rng.random((n, m))
        a = rng.random(n)
        theta = rng.standard_normal(m + 2) * 0.5
        f0, g = _huber_objective_and_grad(theta, s, a, 1.8, 0.3, n, m)
        step = 1e-7
        for i in range(m + 2):
            d = np.zeros(m + 2)
            d[i] = step
            fp, _ = _huber_objective_and_grad(theta + d, s, a, 1.8, 0.3, n, m)
            fm, _ = _huber_objective_and_grad(theta - d, s, a, 1.8, 0.3, n, m)
            assert (fp - fm) / (2 * step) == pytest.approx(g[i], rel=1e-4, abs=1e-6)
