"""Dynamic-regret accounting and the closed-form bound constants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .problem import DynamicProblem, TheoreticalConstants


@dataclass
class RunReport:
    """Per-step arrays (index ``k-1``) and run-level scalars.

    ``h_x`` holds the charged cost (see ``DynamicProblem.scores_next_iterate``)
    and ``track_err`` the distance from the charged point to ``x_k*``.
    """

    h_x: np.ndarray
    h_star: np.ndarray
    inst_regret: np.ndarray
    cum_regret: np.ndarray
    track_err: np.ndarray
    e_norm: np.ndarray
    cum_E: np.ndarray
    cum_W: np.ndarray
    grad_evals: np.ndarray
    x1_gap: float
    alpha: float = math.nan
    rho: float = math.nan
    D_bound: float = math.nan
    tracking_bound: float = math.nan
    negative_regret_steps: list = field(default_factory=list)

    @property
    def K(self) -> int:
        return len(self.h_x)

    @property
    def regret(self) -> float:
        return float(self.cum_regret[-1])

    @property
    def W_K(self) -> float:
        return float(self.cum_W[-1])

    @property
    def E_K(self) -> float:
        return float(self.cum_E[-1])

    @property
    def total_grad_evals(self) -> int:
        return int(self.grad_evals.sum())

    def average_regret(self) -> np.ndarray:
        return self.cum_regret / np.arange(1, self.K + 1)

    def columns(self) -> dict:
        return {
            "k": np.arange(1, self.K + 1),
            "h_x": self.h_x,
            "h_star": self.h_star,
            "inst_regret": self.inst_regret,
            "cum_regret": self.cum_regret,
            "track_err": self.track_err,
            "e_norm": self.e_norm,
            "cum_E": self.cum_E,
            "cum_W": self.cum_W,
            "grad_evals": self.grad_evals,
        }


def regret(p: DynamicProblem, trace, optima, oracle_tol: float = 1e-10) -> RunReport:
    """Evaluate ``h_k`` at the charged points and at ``x_k*`` and accumulate.

    Steps whose instantaneous regret is below ``-10 * oracle_tol`` (scaled by
    ``1 + |h_k(x_k*)|``) are recorded in ``negative_regret_steps``; they mean
    the comparator is not optimal.
    """
    if len(trace) != len(optima):
        raise ValueError(f"trace has {len(trace)} steps but {len(optima)} optima were given")
    K = len(trace)
    h_x = np.empty(K)
    h_star = np.empty(K)
    track = np.empty(K)
    for j, (st, xs) in enumerate(zip(trace, optima)):
        played = st.x_next if p.scores_next_iterate else st.x
        h_x[j] = st.h_val
        h_star[j] = p.eval_h(st.k, xs)
        track[j] = np.linalg.norm(played - xs)
    inst = h_x - h_star
    neg = [int(trace[j].k) for j in np.flatnonzero(inst < -10 * oracle_tol * (1 + np.abs(h_star)))]
    e = np.array([st.e_norm for st in trace], dtype=float)
    moves = np.zeros(K)
    if K > 1:
        moves[1:] = [np.linalg.norm(b - a) for a, b in zip(optima[:-1], optima[1:])]
    return RunReport(
        h_x=h_x, h_star=h_star, inst_regret=inst, cum_regret=np.cumsum(inst),
        track_err=track, e_norm=e, cum_E=np.cumsum(e), cum_W=np.cumsum(moves),
        grad_evals=np.array([st.grad_evals for st in trace], dtype=np.int64),
        x1_gap=float(np.linalg.norm(trace[0].x - optima[0])) if K else 0.0,
        alpha=getattr(trace, "alpha", math.nan),
        negative_regret_steps=neg,
    )


def gradient_variation(p: DynamicProblem, probe_points: int = 16, extra_points=(), seed: int = 0):
    """Gradient variation ``V_K`` and its per-component versions ``V_K^i``.

    Returns ``(V_K, [V_K^i], exact)``.  When ``p.affine_gradient_drift`` holds
    the differences do not depend on ``x`` and the values are exact; otherwise
    the inner maximum is taken over ``probe_points`` random points plus
    ``extra_points`` and the result is only a lower bound (``exact=False``).
    """
    if probe_points < 1:
        raise ValueError("probe_points must be >= 1")
    exact = bool(p.affine_gradient_drift)
    if exact:
        pts = [np.zeros(p.n)]
    else:
        rng = np.random.default_rng(seed)
        pts = [p.random_point(rng) for _ in range(probe_points)] + [np.asarray(x, float) for x in extra_points]

    def variation(gfun):
        total = 0.0
        for k in range(2, p.K + 1):
            total += max(float(np.sum((gfun(k, x) - gfun(k - 1, x)) ** 2)) for x in pts)
        return total

    V = variation(p.grad)
    per = []
    if p.N > 1:
        per = [variation(lambda k, x, i=i: p.component_grad(k, i, x)) for i in range(p.N)]
    return V, per, exact


def bound_constants(tc: TheoreticalConstants, alpha: float, x1_gap: float):
    """Return ``(rho, D, tracking_bound)``.

    ``rho^2 = 1 - alpha (2 mu - alpha L^2)``,
    ``D = (1+rho)/alpha (x1_gap + (alpha gamma + sigma)/(1-rho)) + 2 gamma + 2 L_g``,
    ``tracking_bound = (alpha gamma + sigma)/(1-rho)``.
    """
    if not 0 < alpha < tc.alpha_max:
        raise ValueError(f"alpha={alpha} outside (0, 2 mu / L^2) = (0, {tc.alpha_max:.6g}); rho would be >= 1")
    rho = math.sqrt(max(0.0, 1.0 - alpha * (2.0 * tc.mu - alpha * tc.L ** 2)))
    track = (alpha * tc.gamma + tc.sigma) / (1.0 - rho)
    D = (1.0 + rho) / alpha * (x1_gap + track) + 2.0 * tc.gamma + 2.0 * tc.L_g
    return rho, D, track


def measured_constants(tc: TheoreticalConstants, report: RunReport, sigma_hat: float) -> TheoreticalConstants:
    """Fill ``sigma`` and ``gamma`` from a run: largest optimum step and mean error norm."""
    gamma = report.E_K / report.K if report.K else 0.0
    return tc.replace(sigma=sigma_hat, gamma=gamma)


def attach_bounds(report: RunReport, tc: TheoreticalConstants, alpha: float) -> RunReport:
    report.alpha = alpha
    report.rho, report.D_bound, report.tracking_bound = bound_constants(tc, alpha, report.x1_gap)
    return report


def regret_bound_rhs(report: RunReport, tc: TheoreticalConstants, alpha: float) -> float:
    rho, D, _ = bound_constants(tc, alpha, report.x1_gap)
    return D / (1.0 - rho) * (report.x1_gap + report.W_K + alpha * report.E_K)


def regret_bound_check(report: RunReport, tc: TheoreticalConstants, alpha: float, atol: float = 1e-8):
    """Compare ``Reg_K`` with ``D/(1-rho) (||x_1 - x_1*|| + W_K + alpha E_K)``.

    Returns ``(ok, margin)`` where ``margin = rhs - Reg_K``; ``atol`` absorbs
    oracle error when both sides vanish.
    """
    margin = regret_bound_rhs(report, tc, alpha) - report.regret
    return bool(margin >= -atol), float(margin)
