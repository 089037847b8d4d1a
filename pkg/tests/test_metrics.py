import math

import numpy as np
import pytest

from proxdyn.metrics import bound_constants, gradient_variation, regret, regret_bound_check, attach_bounds
from proxdyn.oracle import compute_optima
from proxdyn.problem import DynamicProblem, ErrorModel, TheoreticalConstants
from proxdyn.prox_ops import Zero
from proxdyn.scenarios import SubspaceStreamSpec, quadratic_toy, static_target, subspace_problem, unit_step_target
from proxdyn.solvers import SolverConfig, StepTrace, Trace, run_ipogd


class Square(DynamicProblem):
    K, n = 1, 1
    constants = TheoreticalConstants(mu=2.0, L=2.0)

    def grad(self, k, x):
        return 2 * x

    def eval_f(self, k, x):
        return float(x @ x)

    def prox_operator(self, k):
        return Zero()


def test_single_step_regret():
    p = Square()
    tr = Trace(0.1, "ipogd")
    x = np.array([1.0])
    tr.append(StepTrace(1, x, 0.8 * x, 0.0, p.eval_h(1, x), 1))
    rep = regret(p, tr, [np.zeros(1)])
    assert rep.inst_regret[0] == 1.0 and rep.regret == 1.0


def test_regret_zero_on_optimum_and_length_check():
    b = np.array([1.0, 2.0])
    p = quadratic_toy(20, 2, static_target(b))
    tr = run_ipogd(p, ErrorModel(), SolverConfig(alpha=0.4), b)
    opt = compute_optima(p)
    rep = regret(p, tr, opt)
    assert rep.regret == 0.0 and rep.W_K == 0.0 and rep.E_K == 0.0
    tc = p.constants
    attach_bounds(rep, tc, 0.4)
    ok, margin = regret_bound_check(rep, tc, 0.4)
    assert ok and margin == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        regret(p, tr, opt[:-1])


def test_cumulative_arrays_monotone():
    p = quadratic_toy(50, 3, unit_step_target(3))
    tr = run_ipogd(p, ErrorModel("gaussian", 0.3, seed=1), SolverConfig(alpha=0.4), np.zeros(3))
    rep = regret(p, tr, compute_optima(p))
    for arr in (rep.cum_regret, rep.cum_E, rep.cum_W):
        assert np.all(np.diff(arr) >= 0)
    assert rep.W_K == pytest.approx(49.0)
    assert not rep.negative_regret_steps


def test_negative_regret_flagged():
    p = quadratic_toy(3, 1, static_target([1.0]))
    tr = run_ipogd(p, ErrorModel(), SolverConfig(alpha=0.4), np.ones(1))
    rep = regret(p, tr, [np.array([0.5])] * 3)
    assert rep.negative_regret_steps == [1, 2, 3]


def test_bound_constants_formulas():
    rho, D, track = bound_constants(TheoreticalConstants(mu=1.0, L=1.0), 0.5, 0.0)
    assert rho == pytest.approx(0.5) and D == 0.0 and track == 0.0
    rho, D, track = bound_constants(TheoreticalConstants(mu=1.0, L=1.0, L_g=3.0), 0.5, 0.0)
    assert D == pytest.approx(6.0)
    tc = TheoreticalConstants(mu=1.0, L=2.0, sigma=0.5, gamma=0.2)
    rho, D, track = bound_constants(tc, 0.3, 1.5)
    r = math.sqrt(1 - 0.3 * (2 - 0.3 * 4))
    t = (0.3 * 0.2 + 0.5) / (1 - r)
    assert (rho, track) == pytest.approx((r, t))
    assert D == pytest.approx((1 + r) / 0.3 * (1.5 + t) + 0.4)
    with pytest.raises(ValueError):
        bound_constants(tc, 0.5, 0.0)


def test_bound_constants_monotone():
    base = TheoreticalConstants(mu=1.0, L=2.0, sigma=0.3, gamma=0.3)
    rhos = [bound_constants(base.replace(mu=m), 0.2, 1.0)[0] for m in (0.5, 1.0, 1.5)]
    assert rhos[0] > rhos[1] > rhos[2]
    tr_g = [bound_constants(base.replace(gamma=g), 0.2, 1.0)[2] for g in (0.1, 0.2, 0.4)]
    tr_s = [bound_constants(base.replace(sigma=s), 0.2, 1.0)[2] for s in (0.1, 0.2, 0.4)]
    assert tr_g == sorted(tr_g) and tr_s == sorted(tr_s)


def test_gradient_variation_quadratic_exact():
    p = quadratic_toy(6, 2, lambda k: np.array([k ** 2, 0.0]))
    V, per, exact = gradient_variation(p)
    b = [k ** 2 for k in range(1, 7)]
    assert exact and per == []
    assert V == pytest.approx(4 * sum((b[i] - b[i - 1]) ** 2 for i in range(1, 6)))
    assert gradient_variation(quadratic_toy(6, 2, static_target([1.0, 1.0]), N=3))[:2] == (0.0, [0.0, 0.0, 0.0])


def test_gradient_variation_subspace_components_against_grid():
    p = subspace_problem(SubspaceStreamSpec(r=8, Lwin=4, rank=1, N=4, K=6))
    V, per, exact = gradient_variation(p)
    assert exact and len(per) == 4
    # brute force: maximise over a 3-D grid slice through the origin
    rng = np.random.default_rng(0)
    dirs = rng.standard_normal((3, p.n))
    grid = np.linspace(-5, 5, 5)
    pts = [a * dirs[0] + b * dirs[1] + c * dirs[2] for a in grid for b in grid for c in grid]
    for i in range(4):
        brute = sum(max(float(np.sum((p.component_grad(k, i, x) - p.component_grad(k - 1, i, x)) ** 2)) for x in pts)
                    for k in range(2, 7))
        assert per[i] == pytest.approx(brute, rel=0.05)


def test_gradient_variation_sampled_is_lower_bound():
    p = quadratic_toy(4, 2, lambda k: np.array([float(k), 0.0]))
    p.affine_gradient_drift = False
    V, _, exact = gradient_variation(p, probe_points=5)
    assert not exact and V == pytest.approx(12.0)
    with pytest.raises(ValueError):
        gradient_variation(p, probe_points=0)
