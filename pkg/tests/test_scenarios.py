import math

import numpy as np
import pytest

from proxdyn.numerics import fd_gradient, numerical_rank
from proxdyn.oracle import per_step_optimum
from proxdyn.problem import validate_constants
from proxdyn.scenarios import (FormationSpec, SubspaceStreamSpec, build_constraint_matrix, formation_problem,
                               quadratic_toy, regular_polygon, star_polygon, static_target, subspace_problem)
from proxdyn.solvers import ErrorModel, SolverConfig, run_ipogd


def similarity(s, scale, theta, t):
    R = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    return (scale * s @ R.T + t).ravel()


def test_constraint_hand_expansion():
    A = build_constraint_matrix(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    # p3x - p1x + p2y - p1y = 0  and  p3y - p1y - (p2x - p1x) = 0
    np.testing.assert_allclose(A, [[-1, -1, 0, 1, 1, 0], [1, -1, -1, 0, 0, 1]])


def test_constraint_orbit_decagon():
    s = regular_polygon(10)
    A = build_constraint_matrix(s)
    assert A.shape == (18, 22) and numerical_rank(A) == 18
    rng = np.random.default_rng(0)
    for _ in range(100):
        p = similarity(s, rng.uniform(0.1, 10), rng.uniform(0, 2 * np.pi), rng.uniform(-50, 50, 2))
        assert np.linalg.norm(A @ p) <= 1e-10 * (1 + np.linalg.norm(p))


def test_constraint_orbit_all_steps_sampled():
    prob = formation_problem(FormationSpec(K=500))
    rng = np.random.default_rng(1)
    for k in rng.choice(np.arange(1, 501), 20, replace=False):
        s = prob.shape(k)
        A = prob.constraint(k).a
        for _ in range(50):
            p = similarity(s, rng.uniform(0.1, 10), rng.uniform(0, 2 * np.pi), rng.uniform(-50, 50, 2))
            assert np.linalg.norm(A @ p) <= 1e-10 * (1 + np.linalg.norm(p))


def test_constraint_rejects_degenerate_shape():
    with pytest.raises(ValueError):
        build_constraint_matrix(np.zeros((4, 2)))


def test_star_is_nonconvex_and_rooted():
    s = star_polygon(10)
    assert np.all(s[0] == 0)
    c = s - s.mean(axis=0)
    r = np.hypot(*c.T)
    assert r.max() / r.min() > 1.5


def test_formation_constants_and_gradient():
    p = formation_problem(FormationSpec())
    assert p.constants.mu == pytest.approx(6.0)
    assert p.constants.L == pytest.approx(1206.0)
    assert validate_constants(p, trials=50).ok
    rng = np.random.default_rng(0)
    p.begin_step(3, rng.standard_normal(p.n))
    x = p.random_point(rng)
    g = p.grad(3, x)
    assert np.linalg.norm(g - fd_gradient(lambda z: p.eval_f(3, z), x, 1e-5)) <= 1e-5 * np.linalg.norm(g)


def test_formation_ridge_only_optimum_is_projection():
    p = formation_problem(FormationSpec(K=50, regressors=np.zeros((10, 2))))
    a = np.random.default_rng(2).standard_normal(p.n)
    p.begin_step(7, a)
    np.testing.assert_allclose(per_step_optimum(p, 7), p.constraint(7).projector @ a, atol=1e-10)


def test_formation_leader_block_tracks_measurements():
    p = formation_problem(FormationSpec(K=200, sigma_i_sq=1e-10))
    p.begin_step(20, p.reference_pose(20))
    x = per_step_optimum(p, 20)
    np.testing.assert_allclose(x[:2], p.leader(21), atol=1e-3)


def test_formation_run_keeps_constraint():
    p = formation_problem(FormationSpec(K=40))
    tr = run_ipogd(p, ErrorModel("gaussian", 0.3, seed=0), SolverConfig(alpha=0.2), p.initial_point())
    for st in tr:
        assert p.constraint_residual(st.k, st.x_next) <= 1e-8
        assert math.isfinite(st.h_val)


def test_subspace_components_average_to_full():
    p = subspace_problem(SubspaceStreamSpec(K=5))
    rng = np.random.default_rng(0)
    x = p.random_point(rng)
    avg = np.mean([p.component_grad(2, j, x) for j in range(p.N)], axis=0)
    np.testing.assert_allclose(avg, p.grad(2, x), atol=1e-10)
    fbar = np.mean([p.eval_component(2, j, x) for j in range(p.N)])
    assert fbar == pytest.approx(p.eval_f(2, x), rel=1e-12)


def test_subspace_constants_validated():
    p = subspace_problem(SubspaceStreamSpec(r=16, Lwin=8, N=4, K=10))
    H = np.array([[2.01, 2.0], [2.0, 6.0]])
    ev = np.linalg.eigvalsh(H)
    assert (p.constants.mu, p.constants.L) == pytest.approx(tuple(ev))
    assert ev[0] > 0
    assert validate_constants(p, trials=50).ok


def test_subspace_single_step_by_hand():
    spec = SubspaceStreamSpec(r=8, Lwin=4, rank=1, N=4, K=3)
    p = subspace_problem(spec)
    a = 0.04
    tr = run_ipogd(p, ErrorModel(), SolverConfig(alpha=a), np.zeros(p.n))
    M = p.data(1)
    u, s, vt = np.linalg.svd(2 * a * M, full_matrices=False)
    L1 = (u * np.maximum(s - a * spec.lam_L, 0)) @ vt
    S1 = np.sign(2 * a * M) * np.maximum(np.abs(2 * a * M) - a * spec.lam_S, 0)
    np.testing.assert_allclose(tr[0].x_next, np.r_[L1.ravel(), S1.ravel()], atol=1e-10)


def test_subspace_spec_checks():
    with pytest.raises(ValueError):
        SubspaceStreamSpec(r=10, N=3)
    with pytest.raises(ValueError):
        SubspaceStreamSpec(sparsity=1.5)


def test_quadratic_l1_optimum():
    p = quadratic_toy(3, 2, static_target([2.0, -0.3]), l1=0.5)
    np.testing.assert_allclose(p.closed_form_optimum(1), [1.75, -0.05])
    grid = np.arange(-3, 3, 1e-4)
    for j, b in enumerate([2.0, -0.3]):
        best = grid[np.argmin((grid - b) ** 2 + 0.5 * np.abs(grid))]
        assert abs(best - p.closed_form_optimum(1)[j]) <= 2e-4
    assert p.constants.mu == p.constants.L == 2.0
