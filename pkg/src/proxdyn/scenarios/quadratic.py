"""Isotropic quadratic tracking toy ``f_k(x) = ||x - b_k||^2`` with exact constants."""

from __future__ import annotations

import math

import numpy as np

from ..numerics import as_vector
from ..problem import DynamicProblem, TheoreticalConstants
from ..prox_ops import L1Shrink, Zero, soft_threshold


def static_target(b):
    b = as_vector(b)
    return lambda k: b


def unit_step_target(n, direction=None):
    """``b_k = (k - 1) d`` with ``||d|| = 1``; consecutive optima are exactly one apart."""
    d = np.zeros(n)
    if direction is None:
        d[0] = 1.0
    else:
        d = as_vector(direction) / np.linalg.norm(direction)
    return lambda k: (k - 1) * d


def circle_target(n, radius=1.0, omega=0.1):
    def b(k):
        out = np.zeros(n)
        out[0] = radius * math.cos(omega * k)
        out[1] = radius * math.sin(omega * k)
        return out
    if n < 2:
        raise ValueError("circle target needs n >= 2")
    return b


class QuadraticToy(DynamicProblem):
    """``h_k(x) = ||x - b_k||^2 + l1 ||x||_1``.

    With ``N > 1`` the smooth part is split as the mean of
    ``f_k^i(x) = ||x - b_k - c_i||^2 + const`` where the offsets ``c_i`` sum to
    zero, so the components have the same minimizer only on average.
    """

    affine_gradient_drift = True

    def __init__(self, K, n, target_path, l1=0.0, N=1, spread=1.0, seed=0):
        if K < 1 or n < 1 or N < 1:
            raise ValueError("K, n and N must be positive")
        if l1 < 0:
            raise ValueError("l1 weight must be nonnegative")
        self.K, self.n, self.N = int(K), int(n), int(N)
        self.l1 = float(l1)
        self._path = target_path
        self._b = {}
        rng = np.random.default_rng(seed)
        c = spread * rng.standard_normal((self.N, self.n))
        self.offsets = c - c.mean(axis=0) if self.N > 1 else np.zeros((1, self.n))
        self._prox = L1Shrink(self.l1, self.n) if self.l1 > 0 else Zero()
        self.constants = TheoreticalConstants(mu=2.0, L=2.0, L_g=self._prox.lipschitz)

    def target(self, k):
        b = self._b.get(k)
        if b is None:
            b = as_vector(self._path(k))
            if b.shape != (self.n,) or not np.all(np.isfinite(b)):
                raise ValueError(f"target path returned an invalid vector at k={k}")
            self._b[k] = b
        return b

    def grad(self, k, x):
        return 2.0 * (x - self.target(k))

    def component_grad(self, k, i, x):
        if not 0 <= i < self.N:
            raise IndexError(f"component {i} outside 0..{self.N - 1}")
        return 2.0 * (x - self.target(k) - self.offsets[i])

    def eval_f(self, k, x):
        return float(np.sum((x - self.target(k)) ** 2))

    def prox_operator(self, k):
        return self._prox

    def closed_form_optimum(self, k):
        # prox of the l1 term commutes with the isotropic quadratic
        return soft_threshold(self.target(k), self.l1 / 2.0)


def quadratic_toy(K, n, target_path, l1=0.0, N=1, spread=1.0, seed=0) -> QuadraticToy:
    return QuadraticToy(K, n, target_path, l1=l1, N=N, spread=spread, seed=seed)
