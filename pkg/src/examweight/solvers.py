"""Question-weight fitting schemes.

Four fitted solvers (closed-form least squares on an augmented bias column,
centered regression with intercept, Huber regression with a jointly optimized
concomitant scale, and non-negative least squares via the Lawson-Hanson
active-set method) plus the two constant baselines (uniform and actual
points), all producing a WeightSolution.

Design matrices hold fractional question scores (rows = students, columns =
questions); weights therefore carry units of points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import ConvergenceError

OLS_CLOSED_FORM = "ols_closed_form"
LINEAR_INTERCEPT = "linear_intercept"
HUBER = "huber"
NNLS = "nnls"
UNIFORM = "uniform"
ACTUAL = "actual"

FITTED_SOLVER_IDS = (OLS_CLOSED_FORM, LINEAR_INTERCEPT, HUBER, NNLS)
BASELINE_SOLVER_IDS = (UNIFORM, ACTUAL)

# Lower bound on the concomitant scale, in units of the normalized target
# (max|a| = 1).  When the scale collapses (near-interpolable data, or more
# than ~half the residuals in the absolute-loss regime) the objective tends
# to an unsmoothed L1 limit; the floor fixes the residual smoothing width so
# the problem stays well-posed and twice differentiable.
_SIGMA_FLOOR = 1e-4


@dataclass(frozen=True)
class SolverConfig:
    """Tuning knobs shared by the fitted solvers."""

    huber_epsilon: float = 1.8
    huber_regularization: float = 0.1
    huber_tolerance: float = 1e-8
    huber_max_iterations: int = 500
    nnls_tolerance: float = 1e-11
    nnls_max_iterations: int | None = None  # default 3 * n_questions
    rank_cutoff: float | None = None  # default: linalg conventional cutoff

    def __post_init__(self):
        if not self.huber_epsilon > 1.0:
            raise ValueError("huber_epsilon must exceed 1")
        if self.huber_regularization < 0:
            raise ValueError("huber_regularization must be nonnegative")
        for name in ("huber_tolerance", "nnls_tolerance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.rank_cutoff is not None and not self.rank_cutoff > 0:
            raise ValueError("rank_cutoff must be positive")


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True, eq=False)
class WeightSolution:
    """Fitted per-question weights plus intercept and solver diagnostics."""

    question_weights: np.ndarray
    intercept: float
    solver_id: str
    converged: bool = True
    iterations: int = 0
    sigma: float | None = None  # huber concomitant scale (target units)
    gradient_norm: float | None = None  # huber final gradient norm
    objective_history: tuple[float, ...] = field(default=(), repr=False)


def _check_design(s, a) -> tuple[np.ndarray, np.ndarray]:
    s = linalg.as_matrix(s)
    a = linalg.as_vector(a)
    if s.shape[0] != len(a):
        raise ValueError(
            f"dimension mismatch: {s.shape[0]} score rows vs {len(a)} targets"
        )
    return s, a


def fit_ols_closed_form(s, a, cfg: SolverConfig = DEFAULT_CONFIG) -> WeightSolution:
    """Least squares on the design augmented with an unscaled all-ones column.

    The minimum-norm solution of the augmented system; the bias column's
    coordinate becomes the intercept, so a question everyone answered
    correctly receives exactly the intercept's weight.
    """
    s, a = _check_design(s, a)
    n, m = s.shape
    aug = np.hstack([s, np.ones((n, 1))])
    x = linalg.solve_min_norm(aug, a, cfg.rank_cutoff)
    return WeightSolution(
        question_weights=x[:m], intercept=float(x[m]), solver_id=OLS_CLOSED_FORM
    )


def fit_linear_intercept(s, a, cfg: SolverConfig = DEFAULT_CONFIG) -> WeightSolution:
    """Centered least squares: columns and target are de-meaned before the
    minimum-norm solve, and the intercept is recovered from the means.

    Training residuals have exactly zero mean; a constant column (e.g. a
    question everyone answered) centers to zero and gets weight 0.
    """
    s, a = _check_design(s, a)
    col_means = s.mean(axis=0)
    w = linalg.solve_min_norm(s - col_means, a - a.mean(), cfg.rank_cutoff)
    intercept = float(a.mean() - col_means @ w)
    return WeightSolution(
        question_weights=w, intercept=intercept, solver_id=LINEAR_INTERCEPT
    )


def _huber_objective_and_grad(theta, s, a, eps, alpha, n, m):
    """Objective sum_i [sigma + H_eps(r_i/sigma) * sigma] + alpha * ||w||^2
    with sigma = floor + exp(u); theta = (w, c, u).
    """
    w, c, u = theta[:m], theta[m], theta[m + 1]
    if u > 30.0:  # absurd scale for a normalized target; reject in line search
        return np.inf, np.zeros(m + 2)
    sigma = _SIGMA_FLOOR + np.exp(u)
    r = a - c - s @ w
    z = r / sigma
    absz = np.abs(z)
    quad = absz <= eps
    h = np.where(quad, z * z, 2.0 * eps * absz - eps * eps)
    f = n * sigma + sigma * h.sum() + alpha * (w @ w)
    # dH/dz clipped to the linear regime; d(term)/d(sigma) = 1 - min(z^2, eps^2)
    hprime = np.where(quad, 2.0 * z, 2.0 * eps * np.sign(z))
    grad = np.empty(m + 2)
    grad[:m] = -(s.T @ hprime) + 2.0 * alpha * w
    grad[m] = -hprime.sum()
    grad[m + 1] = (n - np.minimum(z * z, eps * eps).sum()) * np.exp(u)
    return f, grad


def fit_huber(s, a, cfg: SolverConfig = DEFAULT_CONFIG) -> WeightSolution:
    """Huber regression with a jointly optimized concomitant scale.

    Minimizes sum_i [sigma + H_eps(r_i/sigma) * sigma] + alpha * ||w||^2 over
    (weights, intercept, sigma > 0) by BFGS with Armijo backtracking, which
    makes the recorded objective values monotonically nonincreasing.  The
    target is normalized by max|a| internally (with alpha rescaled so the
    objective is unchanged), keeping the iteration scale-equivariant; the
    convergence test is on the normalized objective's gradient norm.

    Hitting the iteration cap is not fatal: the best iterate is returned with
    converged=False and its gradient norm in the diagnostics.
    """
    s, a = _check_design(s, a)
    n, m = s.shape
    eps = cfg.huber_epsilon

    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        return WeightSolution(
            question_weights=np.zeros(m),
            intercept=0.0,
            solver_id=HUBER,
            sigma=_SIGMA_FLOOR,
            gradient_norm=0.0,
            objective_history=(0.0,),
        )
    at = a / scale
    # On the normalized problem the original objective becomes
    # scale * (huber part + alpha*scale*||w_t||^2), so alpha picks up a factor.
    alpha = cfg.huber_regularization * scale

    theta = np.zeros(m + 2)
    theta[m] = at.mean()
    sigma0 = float(np.std(at - theta[m]))
    theta[m + 1] = np.log(max(sigma0, 1e-3))

    f, g = _huber_objective_and_grad(theta, s, at, eps, alpha, n, m)
    history = [f]
    hinv = np.eye(m + 2)
    converged = False
    it = 0
    for it in range(1, cfg.huber_max_iterations + 1):
        gnorm = np.linalg.norm(g)
        if gnorm < cfg.huber_tolerance:
            converged = True
            break
        d = -hinv @ g
        slope = g @ d
        if slope >= 0:  # lost curvature; restart from steepest descent
            hinv = np.eye(m + 2)
            d = -g
            slope = -(g @ g)
        t = 1.0
        f_new, g_new, theta_new = f, g, theta
        for _ in range(60):
            cand = theta + t * d
            f_cand, g_cand = _huber_objective_and_grad(cand, s, at, eps, alpha, n, m)
            if f_cand <= f + 1e-4 * t * slope:
                f_new, g_new, theta_new = f_cand, g_cand, cand
                break
            t *= 0.5
        else:
            break  # no decrease to machine precision; stop at best iterate
        step = theta_new - theta
        yvec = g_new - g
        sy = step @ yvec
        if sy > 1e-12 * np.linalg.norm(step) * np.linalg.norm(yvec):
            rho = 1.0 / sy
            v = np.eye(m + 2) - rho * np.outer(step, yvec)
            hinv = v @ hinv @ v.T + rho * np.outer(step, step)
        theta, f, g = theta_new, f_new, g_new
        history.append(f)
    else:
        it = cfg.huber_max_iterations

    if not converged:
        converged = np.linalg.norm(g) < cfg.huber_tolerance

    w, c, u = theta[:m], theta[m], theta[m + 1]
    return WeightSolution(
        question_weights=w * scale,
        intercept=float(c * scale),
        solver_id=HUBER,
        converged=converged,
        iterations=it,
        sigma=float((_SIGMA_FLOOR + np.exp(u)) * scale),
        gradient_norm=float(np.linalg.norm(g)),
        objective_history=tuple(history),
    )


def fit_nnls(s, a, cfg: SolverConfig = DEFAULT_CONFIG) -> WeightSolution:
    """Lawson-Hanson active-set solution of min ||S w - a|| s.t. w >= 0.

    No bias column is added (a nonnegative intercept would distort weights);
    the intercept is fixed at 0.  Candidate selection ties are broken toward
    the smallest column index for determinism.
    """
    s, a = _check_design(s, a)
    n, m = s.shape
    max_iter = cfg.nnls_max_iterations or 3 * m
    tol = cfg.nnls_tolerance

    x = np.zeros(m)
    passive = np.zeros(m, dtype=bool)
    iterations = 0
    while True:
        grad = s.T @ (a - s @ x)  # negative objective gradient
        inactive = ~passive
        if not inactive.any():
            break
        wmax = grad[inactive].max()
        if wmax <= tol:
            break
        candidates = np.flatnonzero(inactive & (grad >= wmax - tol))
        passive[candidates[0]] = True
        while True:
            iterations += 1
            if iterations > max_iter:
                raise ConvergenceError(
                    f"NNLS exceeded iteration cap of {max_iter}"
                )
            z = np.zeros(m)
            z[passive] = linalg.solve_min_norm(s[:, passive], a, cfg.rank_cutoff)
            if z[passive].min() > 0.0:
                x = z
                break
            blocking = passive & (z <= 0.0)
            denom = x[blocking] - z[blocking]
            movable = denom > 0.0
            # denom == 0 means x and z agree at the bound; any step keeps it there
            alpha = (x[blocking][movable] / denom[movable]).min() if movable.any() else 1.0
            x = x + alpha * (z - x)
            passive &= x > tol
            x[~passive] = 0.0

    x[x < 0] = 0.0
    return WeightSolution(
        question_weights=x,
        intercept=0.0,
        solver_id=NNLS,
        iterations=iterations,
    )


def baseline_uniform(n_questions: int, total_points: float = 100.0) -> WeightSolution:
    """Every question worth total_points / n_questions; intercept 0."""
    if n_questions < 1:
        raise ValueError("need at least one question")
    if not total_points > 0:
        raise ValueError("total_points must be positive")
    return WeightSolution(
        question_weights=np.full(n_questions, total_points / n_questions),
        intercept=0.0,
        solver_id=UNIFORM,
    )


def baseline_actual(points) -> WeightSolution:
    """Weights equal the declared per-question maximum points; intercept 0."""
    points = linalg.as_vector(points)
    if not np.all(points > 0):
        raise ValueError("all question points must be positive")
    return WeightSolution(
        question_weights=points.copy(), intercept=0.0, solver_id=ACTUAL
    )


def predict(sol: WeightSolution, s) -> np.ndarray:
    """Weighted exam score per student: intercept + S @ weights."""
    s = linalg.as_matrix(s)
    if s.shape[1] != len(sol.question_weights):
        raise ValueError(
            f"dimension mismatch: {s.shape[1]} score columns vs "
            f"{len(sol.question_weights)} weights"
        )
    return sol.intercept + s @ sol.question_weights


FITTERS = {
    OLS_CLOSED_FORM: fit_ols_closed_form,
    LINEAR_INTERCEPT: fit_linear_intercept,
    HUBER: fit_huber,
    NNLS: fit_nnls,
}
