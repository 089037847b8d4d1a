"""Robust subspace tracking on a synthetic low-rank plus sparse stream.

The decision variable stacks a background estimate ``L`` and a foreground
estimate ``S`` (both ``r x Lwin``, row-major) into one flat vector.  The data
window ``M_k`` is a rotating rank-``rank`` background, a sparse outlier
pattern that moves down one row per step, and small dense noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..problem import DynamicProblem, TheoreticalConstants
from ..prox_ops import L1Shrink, NuclearSVT, SeparablePair


@dataclass(frozen=True)
class SubspaceStreamSpec:
    r: int = 64
    Lwin: int = 16
    rank: int = 2
    drift_rate: float = 0.01
    sparsity: float = 0.05
    N: int = 8
    mu_L: float = 0.005
    mu_S: float = 2.0
    lam_L: float = 100.0
    lam_S: float = 0.034
    alpha_L: float = 0.2
    alpha_S: float = 0.2
    K: int = 200
    background_scale: float = 100.0
    outlier_magnitude: float = 100.0
    noise_std: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.r < 1 or self.Lwin < 1 or self.K < 1:
            raise ValueError("r, Lwin and K must be positive")
        if self.N < 1 or self.r % self.N:
            raise ValueError(f"r={self.r} must be divisible by the block count N={self.N}")
        if not 0 <= self.sparsity <= 1:
            raise ValueError("sparsity must lie in [0, 1]")
        if self.rank < 1 or 2 * self.rank > self.r:
            raise ValueError("need 1 <= rank and 2 rank <= r")
        if self.rank > min(self.r, self.Lwin):
            raise ValueError("rank exceeds the window dimensions")
        if self.mu_L < 0 or self.mu_S < 0 or self.lam_L < 0 or self.lam_S < 0:
            raise ValueError("weights must be nonnegative")


class SubspaceProblem(DynamicProblem):
    """``f_k(L, S) = ||M_k - L - S||_F^2 + mu_L ||L||_F^2 + mu_S ||S||_F^2``, ``g = lam_L ||L||_* + lam_S ||S||_1``.

    Component ``j`` replaces the residual by ``N`` times its restriction to
    row block ``j`` and keeps both ridge terms, so the components average to
    ``f_k`` exactly.
    """

    affine_gradient_drift = True

    def __init__(self, spec: SubspaceStreamSpec):
        self.spec = spec
        self.K = spec.K
        self.shape = (spec.r, spec.Lwin)
        self.half = spec.r * spec.Lwin
        self.n = 2 * self.half
        self.N = spec.N
        self.block = spec.r // spec.N
        H = np.array([[2 + 2 * spec.mu_L, 2.0], [2.0, 2 + 2 * spec.mu_S]])
        ev = np.linalg.eigvalsh(H)
        self._prox = SeparablePair(NuclearSVT(spec.lam_L, self.shape), L1Shrink(spec.lam_S, self.half), self.half)
        self.constants = TheoreticalConstants(mu=float(ev[0]), L=float(ev[1]), L_g=self._prox.lipschitz)
        self.oracle_cache_key = ("subspace", spec)

        rng = np.random.default_rng(spec.seed)
        q, _ = np.linalg.qr(rng.standard_normal((spec.r, 2 * spec.rank)))
        self._u0, self._w = q[:, : spec.rank], q[:, spec.rank:]
        self._v = rng.standard_normal((spec.Lwin, spec.rank)) * spec.background_scale * math.sqrt(spec.r / spec.rank)
        mask = rng.random(self.shape) < spec.sparsity
        signs = np.where(rng.random(self.shape) < 0.5, -1.0, 1.0)
        self._outliers = spec.outlier_magnitude * signs * mask
        self._m = {}

    # stream ----------------------------------------------------------------
    def background(self, k):
        th = self.spec.drift_rate * k
        u = self._u0 * math.cos(th) + self._w * math.sin(th)
        return u @ self._v.T

    def foreground(self, k):
        return np.roll(self._outliers, k, axis=0)

    def data(self, k):
        m = self._m.get(k)
        if m is None:
            noise = self.spec.noise_std * np.random.default_rng([self.spec.seed, k]).standard_normal(self.shape)
            m = self.background(k) + self.foreground(k) + noise
            self._m[k] = m
        return m

    def split(self, x):
        x = np.asarray(x, float)
        return x[: self.half].reshape(self.shape), x[self.half:].reshape(self.shape)

    def recovery_error(self, k, x):
        """``||L - L_k^true||_F / ||L_k^true||_F``."""
        L, _ = self.split(x)
        Lt = self.background(k)
        return float(np.linalg.norm(L - Lt) / np.linalg.norm(Lt))

    # oracles ----------------------------------------------------------------
    def grad(self, k, x):
        L, S = self.split(x)
        R = L + S - self.data(k)
        return np.concatenate([(2 * R + 2 * self.spec.mu_L * L).ravel(), (2 * R + 2 * self.spec.mu_S * S).ravel()])

    def component_grad(self, k, i, x):
        if not 0 <= i < self.N:
            raise IndexError(f"component {i} outside 0..{self.N - 1}")
        L, S = self.split(x)
        rows = slice(i * self.block, (i + 1) * self.block)
        R = np.zeros(self.shape)
        R[rows] = 2 * self.N * (L[rows] + S[rows] - self.data(k)[rows])
        return np.concatenate([(R + 2 * self.spec.mu_L * L).ravel(), (R + 2 * self.spec.mu_S * S).ravel()])

    def eval_f(self, k, x):
        L, S = self.split(x)
        R = L + S - self.data(k)
        return float(np.sum(R * R) + self.spec.mu_L * np.sum(L * L) + self.spec.mu_S * np.sum(S * S))

    def eval_component(self, k, i, x):
        L, S = self.split(x)
        rows = slice(i * self.block, (i + 1) * self.block)
        R = (L + S - self.data(k))[rows]
        return float(self.N * np.sum(R * R) + self.spec.mu_L * np.sum(L * L) + self.spec.mu_S * np.sum(S * S))

    def prox_operator(self, k):
        return self._prox

    def random_point(self, rng):
        return 10.0 * rng.standard_normal(self.n)


def subspace_problem(spec: SubspaceStreamSpec) -> SubspaceProblem:
    return SubspaceProblem(spec)
