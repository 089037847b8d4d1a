"""Time-indexed composite problems ``h_k = f_k + g_k`` and gradient-error models.

Time indices ``k`` are 1-based (``1 <= k <= K``); component indices ``i`` are
0-based (``0 <= i < N``).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .prox_ops import ProxOperator


@dataclass(frozen=True)
class TheoreticalConstants:
    """Constants entering the contraction, subgradient and regret bounds.

    mu, L  : strong convexity and smoothness of every ``f_k``
    L_g    : Lipschitz constant of every ``g_k``
    sigma  : bound on the per-step drift of the optimum
    gamma  : bound on the mean gradient-error norm
    M      : bound on the component gradients at the iterates
    """

    mu: float
    L: float
    L_g: float = 0.0
    sigma: float = 0.0
    gamma: float = 0.0
    M: float = 0.0

    def __post_init__(self):
        for name in ("mu", "L", "L_g", "sigma", "gamma", "M"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if self.mu > self.L:
            raise ValueError(f"mu={self.mu} exceeds L={self.L}")

    @property
    def condition(self) -> float:
        return self.mu / self.L

    @property
    def alpha_max(self) -> float:
        """Upper end of the step-size interval on which the contraction factor is < 1."""
        return 2.0 * self.mu / self.L ** 2

    def replace(self, **changes) -> "TheoreticalConstants":
        return dataclasses.replace(self, **changes)


class DynamicProblem:
    """Interface every solver consumes.

    Subclasses set ``K``, ``n``, ``N`` and ``constants`` and implement
    ``grad``, ``eval_f`` and ``prox_operator``; problems with a finite-sum
    structure also implement ``component_grad``.

    Two class attributes describe the protocol:

    ``scores_next_iterate``
        When true, the cost charged at step ``k`` is ``h_k(x_{k+1})``, the
        action committed after observing step ``k`` (formation control).
    ``affine_gradient_drift``
        When true, ``grad(k, x) - grad(k-1, x)`` does not depend on ``x``,
        so gradient variation can be evaluated exactly.
    """

    K: int
    n: int
    N: int = 1
    constants: TheoreticalConstants
    scores_next_iterate = False
    affine_gradient_drift = False

    # oracles -----------------------------------------------------------
    def grad(self, k: int, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def component_grad(self, k: int, i: int, x: np.ndarray) -> np.ndarray:
        if self.N == 1 and i == 0:
            return self.grad(k, x)
        raise NotImplementedError

    def eval_f(self, k: int, x: np.ndarray) -> float:
        raise NotImplementedError

    def prox_operator(self, k: int) -> ProxOperator:
        raise NotImplementedError

    def prox_g(self, k: int, x: np.ndarray, alpha: float) -> np.ndarray:
        return self.prox_operator(k).prox(x, alpha)

    def eval_g(self, k: int, x: np.ndarray) -> float:
        return self.prox_operator(k).value(x)

    def eval_h(self, k: int, x: np.ndarray) -> float:
        g = self.eval_g(k, x)
        if math.isinf(g):
            return math.inf
        return self.eval_f(k, x) + g

    # hooks ---------------------------------------------------------------
    def begin_step(self, k: int, x: np.ndarray) -> None:
        """Called by solvers with the current iterate before step ``k`` queries."""

    def closed_form_optimum(self, k: int) -> Optional[np.ndarray]:
        return None

    def random_point(self, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal(self.n)

    def check_k(self, k: int) -> None:
        if not 1 <= k <= self.K:
            raise IndexError(f"time index {k} outside 1..{self.K}")


@dataclass
class ErrorModel:
    """Additive gradient error ``e_k``.

    ``kind`` is ``"none"``, ``"gaussian"`` (i.i.d. zero-mean entries with the
    given variance) or ``"custom"`` (``func(k, x, rng) -> vector``).  Draws for
    step ``k`` come from a generator seeded by ``(seed, k)``, so a given
    ``(seed, k)`` always yields the same error regardless of call history.
    """

    kind: str = "none"
    variance: float = 0.0
    seed: int = 0
    func: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in ("none", "gaussian", "custom"):
            raise ValueError(f"unknown error model kind {self.kind!r}")
        if self.variance < 0:
            raise ValueError("variance must be nonnegative")
        if self.kind == "custom" and self.func is None:
            raise ValueError("custom error model needs func")

    def rng(self, k: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, k])

    def draw(self, k: int, x: np.ndarray) -> np.ndarray:
        if self.kind == "none":
            return np.zeros_like(x)
        if self.kind == "gaussian":
            return math.sqrt(self.variance) * self.rng(k).standard_normal(x.shape)
        return np.asarray(self.func(k, x, self.rng(k)), dtype=float)

    def with_seed(self, seed: int) -> "ErrorModel":
        return dataclasses.replace(self, seed=seed)


def noisy_grad(p: DynamicProblem, em: ErrorModel, k: int, x: np.ndarray):
    """Return ``(grad_tilde, e_k)`` with ``grad_tilde = grad(k, x) + e_k``."""
    p.check_k(k)
    e = em.draw(k, x)
    return p.grad(k, x) + e, e


@dataclass
class ConstantsReport:
    ok: bool
    mu_declared: float
    L_declared: float
    mu_observed: float
    L_observed: float
    trials: int
    witness: Optional[dict] = None

    def summary(self) -> str:
        lines = [
            f"declared mu={self.mu_declared:.6g} L={self.L_declared:.6g} (mu/L={self.mu_declared / self.L_declared:.6g})",
            f"observed min curvature ratio={self.mu_observed:.6g} max Lipschitz ratio={self.L_observed:.6g} over {self.trials} trials",
        ]
        if self.witness is not None:
            w = self.witness
            lines.append(f"VIOLATION ({w['inequality']}) at k={w['k']}: observed {w['observed']:.6g} vs declared {w['declared']:.6g}")
            lines.append(f"  x={np.array2string(w['x'], precision=6, threshold=8)}")
            lines.append(f"  y={np.array2string(w['y'], precision=6, threshold=8)}")
        return "\n".join(lines)


def validate_constants(p: DynamicProblem, trials: int = 100, seed: int = 0, rtol: float = 1e-9) -> ConstantsReport:
    """Sample random ``(k, x, y)`` and test the declared smoothness and strong convexity."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    mu, L = p.constants.mu, p.constants.L
    mu_obs, L_obs = math.inf, 0.0
    witness = None
    for _ in range(trials):
        k = int(rng.integers(1, p.K + 1))
        x = p.random_point(rng)
        y = p.random_point(rng)
        dx = x - y
        nx = float(np.linalg.norm(dx))
        if nx == 0.0:
            continue
        dg = p.grad(k, x) - p.grad(k, y)
        lip = float(np.linalg.norm(dg)) / nx
        curv = float(dg @ dx) / nx ** 2
        L_obs = max(L_obs, lip)
        mu_obs = min(mu_obs, curv)
        if witness is None:
            if lip > L * (1 + rtol):
                witness = dict(inequality="smoothness", k=k, x=x, y=y, observed=lip, declared=L)
            elif curv < mu * (1 - rtol):
                witness = dict(inequality="strong convexity", k=k, x=x, y=y, observed=curv, declared=mu)
    return ConstantsReport(witness is None, mu, L, mu_obs, L_obs, trials, witness)
