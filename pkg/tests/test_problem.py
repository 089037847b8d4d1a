import numpy as np
import pytest

from proxdyn.problem import ErrorModel, TheoreticalConstants, noisy_grad, validate_constants
from proxdyn.scenarios import quadratic_toy, static_target, subspace_problem, SubspaceStreamSpec


def test_constants_validation():
    tc = TheoreticalConstants(mu=1.0, L=2.0)
    assert tc.alpha_max == pytest.approx(0.5)
    assert tc.condition == pytest.approx(0.5)
    with pytest.raises(ValueError):
        TheoreticalConstants(mu=0.0, L=1.0)
    with pytest.raises(ValueError):
        TheoreticalConstants(mu=2.0, L=1.0)
    with pytest.raises(ValueError):
        TheoreticalConstants(mu=1.0, L=1.0, sigma=-1.0)


def test_error_model_reproducible_per_step():
    em = ErrorModel("gaussian", 0.3, seed=5)
    x = np.zeros(4)
    a = em.draw(7, x)
    em.draw(3, x)
    np.testing.assert_array_equal(a, em.draw(7, x))
    assert not np.array_equal(a, em.with_seed(6).draw(7, x))
    np.testing.assert_array_equal(ErrorModel().draw(1, x), np.zeros(4))
    with pytest.raises(ValueError):
        ErrorModel("laplace")


def test_error_model_variance():
    em = ErrorModel("gaussian", 0.3, seed=1)
    draws = np.concatenate([em.draw(k, np.zeros(50)) for k in range(1, 401)])
    assert draws.var() == pytest.approx(0.3, rel=0.05)
    assert abs(draws.mean()) < 0.02


def test_noisy_grad_adds_error():
    p = quadratic_toy(10, 3, static_target([1.0, 2.0, 3.0]))
    em = ErrorModel("custom", func=lambda k, x, rng: np.full(3, float(k)))
    g, e = noisy_grad(p, em, 4, np.zeros(3))
    np.testing.assert_allclose(g, -2 * np.array([1.0, 2.0, 3.0]) + 4.0)
    with pytest.raises(IndexError):
        noisy_grad(p, em, 11, np.zeros(3))


def test_validate_constants_accepts_true_and_flags_wrong():
    p = subspace_problem(SubspaceStreamSpec(r=8, Lwin=4, rank=1, N=4, K=5))
    rep = validate_constants(p, trials=50)
    assert rep.ok
    assert rep.mu_observed >= p.constants.mu * (1 - 1e-9)
    assert rep.L_observed <= p.constants.L * (1 + 1e-9)
    p.constants = p.constants.replace(L=2.0)
    bad = validate_constants(p, trials=50)
    assert not bad.ok
    assert bad.witness["inequality"] == "smoothness"
    assert "VIOLATION" in bad.summary()
