"""Proximal operators for the non-smooth regularizers used by the scenarios.

Every operator ``op`` represents a convex ``g`` and evaluates

    prox(x, alpha) = argmin_u  g(u) + ||u - x||^2 / (2 alpha)

exactly.  Inputs are flat vectors unless the operator carries a matrix shape
(nuclear norm), in which case a matrix of that shape is also accepted and the
output keeps the input's shape.
"""

from __future__ import annotations

import math

import numpy as np

from .numerics import pinv, svd


def soft_threshold(x, t):
    """Entrywise shrinkage ``sign(x) * max(|x| - t, 0)``."""
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


class ProxOperator:
    """Base class.  Subclasses implement ``_prox``, ``value`` and ``residual``."""

    kind = "abstract"
    lipschitz = math.inf

    def prox(self, x, alpha):
        if not alpha > 0:
            raise ValueError("alpha must be positive")
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise ValueError("prox input has non-finite entries")
        return self._prox(x, alpha)

    def _prox(self, x, alpha):
        raise NotImplementedError

    def value(self, x):
        raise NotImplementedError

    def residual(self, x, alpha, y):
        """Violation of ``(x - y) / alpha in subdifferential of g at y``."""
        raise NotImplementedError


class Zero(ProxOperator):
    kind = "zero"
    lipschitz = 0.0

    def _prox(self, x, alpha):
        return x.copy()

    def value(self, x):
        return 0.0

    def residual(self, x, alpha, y):
        return float(np.linalg.norm(np.asarray(x) - np.asarray(y)) / alpha)


class L1Shrink(ProxOperator):
    """``g(u) = lam * ||u||_1``."""

    kind = "l1_shrink"

    def __init__(self, lam, size=None):
        if lam < 0:
            raise ValueError("threshold must be nonnegative")
        self.lam = float(lam)
        self.size = size

    @property
    def lipschitz(self):
        if self.size is None:
            return math.inf if self.lam > 0 else 0.0
        return self.lam * math.sqrt(self.size)

    def _check(self, x):
        if self.size is not None and np.size(x) != self.size:
            raise ValueError(f"expected {self.size} entries, got {np.size(x)}")

    def _prox(self, x, alpha):
        self._check(x)
        return soft_threshold(x, alpha * self.lam)

    def value(self, x):
        return self.lam * float(np.sum(np.abs(x)))

    def residual(self, x, alpha, y):
        v = (np.asarray(x, float) - np.asarray(y, float)) / alpha
        y = np.asarray(y, float)
        nz = y != 0
        viol = np.where(nz, np.abs(v - self.lam * np.sign(y)), np.maximum(np.abs(v) - self.lam, 0.0))
        return float(np.linalg.norm(viol))


class NuclearSVT(ProxOperator):
    """``g(L) = lam * ||L||_*`` on ``shape``-sized matrices (singular value thresholding)."""

    kind = "nuclear_svt"

    def __init__(self, lam, shape):
        if lam < 0:
            raise ValueError("threshold must be nonnegative")
        self.lam = float(lam)
        self.shape = tuple(shape)

    @property
    def lipschitz(self):
        # ||L||_* <= sqrt(rank) ||L||_F
        return self.lam * math.sqrt(min(self.shape))

    def _as_mat(self, x):
        if x.shape == self.shape:
            return x
        if x.size != self.shape[0] * self.shape[1]:
            raise ValueError(f"cannot view {x.shape} as a {self.shape} matrix")
        return x.reshape(self.shape)

    def _prox(self, x, alpha):
        u, s, vt = svd(self._as_mat(x))
        out = (u * np.maximum(s - alpha * self.lam, 0.0)) @ vt
        return out.reshape(x.shape)

    def value(self, x):
        return self.lam * float(np.sum(svd(self._as_mat(np.asarray(x, float))).sigma))

    def residual(self, x, alpha, y):
        x = self._as_mat(np.asarray(x, float))
        y = self._as_mat(np.asarray(y, float))
        g = (x - y) / alpha
        u, s, vt = svd(y)
        tol = 1e-12 * max(1.0, s[0] if s.size else 0.0) * max(self.shape)
        r = int(np.sum(s > tol))
        u1, v1 = u[:, :r], vt[:r].T
        # subdifferential: lam * (u1 v1^T + W), u1^T W = 0, W v1 = 0, ||W||_2 <= 1
        res = np.linalg.norm(u1.T @ g - self.lam * v1.T) + np.linalg.norm(g @ v1 - self.lam * u1)
        pu = np.eye(self.shape[0]) - u1 @ u1.T
        pv = np.eye(self.shape[1]) - v1 @ v1.T
        rest = pu @ g @ pv
        if rest.size:
            res += max(np.linalg.norm(rest, 2) - self.lam, 0.0)
        return float(res)


class AffineProjection(ProxOperator):
    """Indicator of ``{p : A p = 0}``; the prox is ``(I - pinv(A) A) x`` for every alpha."""

    kind = "affine_projection"
    lipschitz = 0.0  # on its domain; see scenarios.formation

    def __init__(self, a, feas_tol=1e-8):
        self.a = np.asarray(a, dtype=float)
        self.feas_tol = feas_tol
        n = self.a.shape[1]
        self.projector = np.eye(n) - pinv(self.a) @ self.a

    def _prox(self, x, alpha):
        if x.shape != (self.a.shape[1],):
            raise ValueError(f"expected a vector of length {self.a.shape[1]}, got {x.shape}")
        return self.projector @ x

    def violation(self, x):
        return float(np.linalg.norm(self.a @ np.asarray(x, float)))

    def value(self, x):
        x = np.asarray(x, float)
        scale = np.linalg.norm(self.a) * (1.0 + np.linalg.norm(x))
        return 0.0 if self.violation(x) <= self.feas_tol * scale else math.inf

    def residual(self, x, alpha, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        # y feasible, and x - y must lie in range(A^T) (the normal space)
        feas = np.linalg.norm(y - self.projector @ y)
        normal = np.linalg.norm(self.projector @ (x - y))
        return float(feas + normal / alpha)


class Box(ProxOperator):
    """Indicator of ``lo <= u <= hi`` (coordinatewise clamp)."""

    kind = "box"
    lipschitz = 0.0

    def __init__(self, lo, hi):
        lo = np.asarray(lo, float)
        hi = np.asarray(hi, float)
        if np.any(lo > hi):
            raise ValueError("box bounds need lo <= hi")
        self.lo, self.hi = lo, hi

    def _prox(self, x, alpha):
        return np.clip(x, self.lo, self.hi)

    def value(self, x):
        x = np.asarray(x, float)
        return 0.0 if np.all(x >= self.lo) and np.all(x <= self.hi) else math.inf

    def residual(self, x, alpha, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        v = (x - y) / alpha
        lo = np.broadcast_to(self.lo, y.shape)
        hi = np.broadcast_to(self.hi, y.shape)
        infeas = np.maximum(lo - y, 0.0) + np.maximum(y - hi, 0.0)
        at_lo = y <= lo
        at_hi = y >= hi
        viol = np.where(at_lo & at_hi, 0.0,
                        np.where(at_lo, np.maximum(v, 0.0),
                                 np.where(at_hi, np.maximum(-v, 0.0), np.abs(v))))
        return float(np.linalg.norm(infeas) + np.linalg.norm(viol))


class SeparablePair(ProxOperator):
    """``g(a, b) = g1(a) + g2(b)`` on a flat vector split at ``split``."""

    kind = "separable_pair"

    def __init__(self, first, second, split):
        self.first, self.second, self.split = first, second, int(split)

    @property
    def lipschitz(self):
        return self.first.lipschitz + self.second.lipschitz

    def _parts(self, x):
        x = np.asarray(x, float)
        if x.ndim != 1 or x.size <= self.split:
            raise ValueError("separable pair expects a flat vector longer than the split point")
        return x[: self.split], x[self.split:]

    def _prox(self, x, alpha):
        a, b = self._parts(x)
        return np.concatenate([self.first.prox(a, alpha).ravel(), self.second.prox(b, alpha).ravel()])

    def value(self, x):
        a, b = self._parts(x)
        return self.first.value(a) + self.second.value(b)

    def residual(self, x, alpha, y):
        xa, xb = self._parts(x)
        ya, yb = self._parts(y)
        return self.first.residual(xa, alpha, ya) + self.second.residual(xb, alpha, yb)


def prox(op: ProxOperator, x, alpha):
    return op.prox(x, alpha)


def prox_check_optimality(op: ProxOperator, x, alpha, y=None) -> float:
    """Residual certifying ``(x - y)/alpha`` is a subgradient of ``g`` at ``y``.

    ``y`` defaults to ``op.prox(x, alpha)``; a valid prox output gives 0 up to
    rounding, any other candidate gives a positive value.
    """
    if y is None:
        y = op.prox(x, alpha)
    return op.residual(x, alpha, y)
