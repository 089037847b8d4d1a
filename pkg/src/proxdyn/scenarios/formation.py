"""Leader-following formation control.

The state stacks the planar positions of the leader and ``m`` followers,
``p = (p1x, p1y, p2x, p2y, ..., p_{m+1}x, p_{m+1}y)``.  Step ``k`` asks for
the pose ``p(k+1)``: the leader position is fitted to noisy scalar
measurements ``z_i = v_i^T p1(k+1) + noise`` while a ridge term keeps the pose
close to the previous action, and the pose must be similar to the current
reference shape (constraint ``A(k) p = 0``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..numerics import null_space
from ..problem import DynamicProblem, TheoreticalConstants
from ..prox_ops import AffineProjection


def regular_polygon(m):
    """``m + 1`` vertices of a unit regular polygon, first vertex at the origin."""
    ang = 2 * np.pi * np.arange(m + 1) / (m + 1)
    s = np.c_[np.cos(ang), np.sin(ang)]
    return s - s[0]


def star_polygon(m, inner=0.45):
    """Non-convex star: polygon vertices with radii alternating 1 and ``inner``."""
    ang = 2 * np.pi * np.arange(m + 1) / (m + 1)
    rad = np.where(np.arange(m + 1) % 2 == 0, 1.0, inner)
    s = np.c_[rad * np.cos(ang), rad * np.sin(ang)]
    return s - s[0]


def build_constraint_matrix(s) -> np.ndarray:
    """Similarity constraint for reference shape ``s`` ((m+1) x 2, leader first).

    For follower ``i >= 3`` the two rows encode
    ``||s2||^2 (p_i - p1) = [[a, -b], [b, a]] (p2 - p1)`` with ``a = s_i . s2``
    and ``b = s2 x s_i`` (vectors taken relative to ``s1``), which holds for
    every scaled, rotated and translated copy of the shape.
    """
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[1] != 2 or s.shape[0] < 3:
        raise ValueError("shape must be an (m+1) x 2 array with m >= 2")
    d = s - s[0]
    s2 = d[1]
    n2 = float(s2 @ s2)
    if n2 == 0.0:
        raise ValueError("second vertex coincides with the leader; the shape has no scale reference")
    m = s.shape[0] - 1
    A = np.zeros((2 * m - 2, 2 * m + 2))
    eye = np.eye(2)
    for row, i in enumerate(range(2, m + 1)):
        a = d[i] @ s2
        b = s2[0] * d[i, 1] - s2[1] * d[i, 0]
        Mi = np.array([[a, -b], [b, a]])
        blk = A[2 * row: 2 * row + 2]
        blk[:, 2 * i: 2 * i + 2] += n2 * eye
        blk[:, 0:2] += Mi - n2 * eye
        blk[:, 2:4] -= Mi
    return A


@dataclass
class FormationSpec:
    m: int = 10
    K: int = 500
    omega: float = 0.06
    lam: float = 3.0
    sigma_i_sq: float = 0.01
    base_shape_start: Optional[np.ndarray] = None
    base_shape_end: Optional[np.ndarray] = None
    regressors: Optional[np.ndarray] = None
    seed: int = 0
    leader_amplitude: tuple = (40.0, 30.0)
    scale: float = 5.0

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("need at least two followers")
        if not self.lam > 0:
            raise ValueError("lam must be positive (it is the only source of strong convexity)")
        if not self.sigma_i_sq > 0:
            raise ValueError("sigma_i_sq must be positive")
        if self.base_shape_start is None:
            self.base_shape_start = regular_polygon(self.m)
        if self.base_shape_end is None:
            self.base_shape_end = star_polygon(self.m)
        if self.regressors is None:
            n_x = (6 * self.m + 5) // 10
            self.regressors = np.array([[1.0, 0.0]] * n_x + [[0.0, 1.0]] * (self.m - n_x))
        for name in ("base_shape_start", "base_shape_end"):
            s = np.asarray(getattr(self, name), float)
            if s.shape != (self.m + 1, 2):
                raise ValueError(f"{name} must be {(self.m + 1, 2)}")
            if np.any(s[0] != 0):
                raise ValueError(f"{name} must have its first vertex at the origin")
            setattr(self, name, s)
        self.regressors = np.asarray(self.regressors, float).reshape(-1, 2)


class FormationProblem(DynamicProblem):
    """``f_k(p) = sum_i (z_i(k) - v_i^T p1)^2 / sigma_i^2 + lam ||p - a_k||^2``, ``g_k`` = indicator of ``A(k) p = 0``.

    ``a_k`` is the solver's current iterate, recorded by :meth:`begin_step`.
    Before any step has been taken the anchor falls back to the reference pose
    (see :meth:`reference_pose`).
    """

    scores_next_iterate = True
    affine_gradient_drift = True

    def __init__(self, spec: FormationSpec):
        self.spec = spec
        self.K = spec.K
        self.n = 2 * spec.m + 2
        self.N = 1
        self.weights = np.full(len(spec.regressors), 1.0 / spec.sigma_i_sq)
        V = spec.regressors
        self._meas_hess = 2.0 * (V.T * self.weights) @ V
        self.hessian = 2.0 * spec.lam * np.eye(self.n)
        self.hessian[:2, :2] += self._meas_hess
        ev = np.linalg.eigvalsh(self.hessian)
        self.constants = TheoreticalConstants(mu=float(ev[0]), L=float(ev[-1]), L_g=0.0)
        self._anchors = {}
        self._z = {}
        self._ops = {}
        self._null = {}

    # data --------------------------------------------------------------
    def shape(self, k):
        t = k / self.K
        s = (1 - t) * self.spec.base_shape_start + t * self.spec.base_shape_end
        return s - s[0]

    def leader(self, k):
        ax, ay = self.spec.leader_amplitude
        c = (1 - k / self.K) ** 2
        return c * np.array([ax * math.cos(self.spec.omega * k), ay * math.sin(self.spec.omega * k)])

    def measurements(self, k):
        z = self._z.get(k)
        if z is None:
            rng = np.random.default_rng([self.spec.seed, k])
            noise = math.sqrt(self.spec.sigma_i_sq) * rng.standard_normal(len(self.weights))
            z = self.spec.regressors @ self.leader(k + 1) + noise
            self._z[k] = z
        return z

    def constraint(self, k) -> AffineProjection:
        op = self._ops.get(k)
        if op is None:
            op = AffineProjection(build_constraint_matrix(self.shape(k)))
            self._ops[k] = op
        return op

    def reference_pose(self, k):
        return (self.spec.scale * self.shape(k) + self.leader(k)).ravel()

    def initial_point(self):
        return self.reference_pose(1)

    # anchor --------------------------------------------------------------
    def begin_step(self, k, x):
        self._anchors[k] = np.array(x, dtype=float)

    def set_anchor(self, k, a):
        self.begin_step(k, a)

    def anchor(self, k):
        a = self._anchors.get(k)
        return self.reference_pose(k) if a is None else a

    # oracles -------------------------------------------------------------
    def _linear(self, k):
        b = 2.0 * self.spec.lam * self.anchor(k)
        b[:2] += 2.0 * self.spec.regressors.T @ (self.weights * self.measurements(k))
        return b

    def grad(self, k, x):
        g = 2.0 * self.spec.lam * (x - self.anchor(k))
        r = self.spec.regressors @ x[:2] - self.measurements(k)
        g[:2] += 2.0 * self.spec.regressors.T @ (self.weights * r)
        return g

    def eval_f(self, k, x):
        r = self.measurements(k) - self.spec.regressors @ x[:2]
        return float(self.weights @ r ** 2 + self.spec.lam * np.sum((x - self.anchor(k)) ** 2))

    def prox_operator(self, k):
        return self.constraint(k)

    def closed_form_optimum(self, k):
        # null-space method: p = Z y with A Z = 0, then an unconstrained SPD solve
        Z = self._null.get(k)
        if Z is None:
            Z = null_space(self.constraint(k).a)
            self._null[k] = Z
        y = np.linalg.solve(Z.T @ self.hessian @ Z, Z.T @ self._linear(k))
        return Z @ y

    def constraint_residual(self, k, x):
        return self.constraint(k).violation(x)

    def random_point(self, rng):
        return 10.0 * rng.standard_normal(self.n)


def formation_problem(spec: FormationSpec) -> FormationProblem:
    return FormationProblem(spec)
