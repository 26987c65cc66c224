"""Dense linear algebra kernel: one-sided Jacobi SVD, Moore-Penrose
pseudoinverse, and minimum-norm least-squares solving.

All routines are pure functions on float64 numpy arrays.  The Jacobi sweep
order is a fixed cyclic schedule, so results are bit-reproducible across runs.
Intended scale is desk-size problems (up to a few hundred rows/columns).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

MAX_SWEEPS = 60

# A column pair counts as orthogonal once |<ci,cj>| <= _ORTH_TOL * ||ci|| ||cj||.
_ORTH_TOL = 1e-15


def as_matrix(a) -> np.ndarray:
    """Validate and convert to a finite, nonempty 2-D float64 array."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if m.size == 0:
        raise ValueError("matrix must be nonempty")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def as_vector(y) -> np.ndarray:
    """Validate and convert to a finite 1-D float64 array."""
    v = np.asarray(y, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got ndim={v.ndim}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


def default_rank_cutoff(rows: int, cols: int) -> float:
    """Conventional relative cutoff for treating singular values as zero."""
    return max(rows, cols) * np.finfo(float).eps


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD: ``a = u @ diag(singular_values) @ v.T``.

    u is n-by-r and v is p-by-r with orthonormal columns; singular values are
    nonincreasing and nonnegative, r = min(n, p).
    """

    u: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray


def _complete_orthonormal(u: np.ndarray, missing: list[int]) -> None:
    """Fill the given U columns with unit vectors orthogonal to the rest.

    Deterministic: each slot takes the identity basis vector whose residual
    after two rounds of Gram-Schmidt is largest (ties to the lowest index).
    The best residual norm is at least 1/sqrt(n) whenever a slot remains.
    """
    n = u.shape[0]
    filled = [k for k in range(u.shape[1]) if k not in set(missing)]
    for k in missing:
        best_norm = 0.0
        best = None
        for t in range(n):
            cand = np.zeros(n)
            cand[t] = 1.0
            for _ in range(2):
                for j in filled:
                    cand -= (u[:, j] @ cand) * u[:, j]
            norm = np.linalg.norm(cand)
            if norm > best_norm:
                best_norm = norm
                best = cand / norm
        if best is None:  # pragma: no cover - cannot happen with r <= n
            raise RuntimeError("failed to complete orthonormal basis")
        u[:, k] = best
        filled.append(k)


def svd(a) -> SvdResult:
    """Thin SVD via cyclic one-sided Jacobi rotations.

    Raises ConvergenceError if column pairs are still non-orthogonal after
    MAX_SWEEPS sweeps.
    """
    a = as_matrix(a)
    n, p = a.shape
    if n < p:
        flipped = svd(a.T)
        return SvdResult(u=flipped.v, singular_values=flipped.singular_values, v=flipped.u)

    m = a.copy()
    v = np.eye(p)
    for _ in range(MAX_SWEEPS):
        rotated = False
        for i in range(p - 1):
            for j in range(i + 1, p):
                aii = m[:, i] @ m[:, i]
                ajj = m[:, j] @ m[:, j]
                aij = m[:, i] @ m[:, j]
                denom = np.sqrt(aii * ajj)
                if denom == 0.0 or abs(aij) <= _ORTH_TOL * denom:
                    continue
                rotated = True
                tau = (ajj - aii) / (2.0 * aij)
                t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                if tau == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                ci, cj = m[:, i].copy(), m[:, j].copy()
                m[:, i] = c * ci - s * cj
                m[:, j] = s * ci + c * cj
                vi, vj = v[:, i].copy(), v[:, j].copy()
                v[:, i] = c * vi - s * vj
                v[:, j] = s * vi + c * vj
        if not rotated:
            break
    else:
        raise ConvergenceError(
            f"Jacobi SVD did not converge within {MAX_SWEEPS} sweeps"
        )

    norms = np.linalg.norm(m, axis=0)
    order = np.argsort(-norms, kind="stable")
    sigma = norms[order]
    u = np.zeros((n, p))
    missing = []
    tiny = (sigma[0] * 1e-13) if sigma[0] > 0 else 0.0
    for k, col in enumerate(order):
        if norms[col] > tiny and norms[col] > 0.0:
            u[:, k] = m[:, col] / norms[col]
        else:
            missing.append(k)
    if missing:
        _complete_orthonormal(u, missing)
    return SvdResult(u=u, singular_values=sigma, v=v[:, order])


def pinv(a, rank_cutoff: float | None = None) -> np.ndarray:
    """Moore-Penrose pseudoinverse via SVD.

    Reciprocals of singular values sigma_k <= rank_cutoff * sigma_max are
    zeroed; rank_cutoff defaults to max(rows, cols) * machine epsilon.
    """
    a = as_matrix(a)
    if rank_cutoff is None:
        rank_cutoff = default_rank_cutoff(*a.shape)
    if rank_cutoff <= 0:
        raise ValueError("rank_cutoff must be positive")
    res = svd(a)
    smax = res.singular_values[0]
    thresh = rank_cutoff * smax
    keep = res.singular_values > thresh
    sinv = np.zeros_like(res.singular_values)
    sinv[keep] = 1.0 / res.singular_values[keep]
    return (res.v * sinv) @ res.u.T


def solve_min_norm(a, y, rank_cutoff: float | None = None) -> np.ndarray:
    """Minimum-norm least-squares solution of ``a @ x ~= y``.

    Among all least-squares minimizers, returns the one with smallest
    Euclidean norm (the pseudoinverse solution).
    """
    a = as_matrix(a)
    y = as_vector(y)
    if len(y) != a.shape[0]:
        raise ValueError(
            f"dimension mismatch: matrix has {a.shape[0]} rows, vector has {len(y)}"
        )
    if rank_cutoff is None:
        rank_cutoff = default_rank_cutoff(*a.shape)
    res = svd(a)
    smax = res.singular_values[0]
    thresh = rank_cutoff * smax
    coeffs = res.u.T @ y
    keep = res.singular_values > thresh
    scaled = np.where(keep, coeffs / np.where(keep, res.singular_values, 1.0), 0.0)
    return res.v @ scaled
