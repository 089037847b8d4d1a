"""Dense linear-algebra kernels used by the proximal operators and oracles."""

from typing import Callable, NamedTuple

import numpy as np


class NumericalFailure(RuntimeError):
    """Raised when a dense factorization does not converge."""


class SvdResult(NamedTuple):
    u: np.ndarray
    sigma: np.ndarray
    vt: np.ndarray


def as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def as_vector(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("vector has non-finite entries")
    return x


def svd(a) -> SvdResult:
    """Thin SVD ``a = u @ diag(sigma) @ vt`` with nonincreasing ``sigma``.

    LAPACK's divide-and-conquer driver does the work; a convergence failure is
    re-raised as :class:`NumericalFailure`.
    """
    a = as_matrix(a)
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge for a {a.shape} matrix") from exc
    return SvdResult(u, s, vt)


def pinv(a, rel_tol: float = 1e-12) -> np.ndarray:
    """Moore-Penrose pseudo-inverse.

    Singular values at or below ``rel_tol * max(rows, cols) * sigma_max`` are
    treated as zero.
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    a = as_matrix(a)
    u, s, vt = svd(a)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((a.shape[1], a.shape[0]))
    cutoff = rel_tol * max(a.shape) * s[0]
    keep = s > cutoff
    return (vt[keep].T / s[keep]) @ u[:, keep].T


def numerical_rank(a, rel_tol: float = 1e-12) -> int:
    s = svd(a).sigma
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tol * max(np.shape(a)) * s[0]))


def null_space(a, rel_tol: float = 1e-12) -> np.ndarray:
    """Orthonormal basis (as columns) of the null space of ``a``."""
    a = as_matrix(a)
    _, s, vt = np.linalg.svd(a, full_matrices=True)
    rank = 0 if s.size == 0 or s[0] == 0.0 else int(np.sum(s > rel_tol * max(a.shape) * s[0]))
    return vt[rank:].T.copy()


def fd_gradient(f: Callable[[np.ndarray], float], x, h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    if h <= 0:
        raise ValueError("h must be positive")
    x = as_vector(x)
    g = np.empty_like(x)
    step = np.zeros_like(x)
    for i in range(x.size):
        step[i] = h
        fp = f(x + step)
        fm = f(x - step)
        step[i] = 0.0
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise ValueError(f"non-finite function value while differencing coordinate {i}")
        g[i] = (fp - fm) / (2.0 * h)
    return g
