import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from proxdyn.prox_ops import (AffineProjection, Box, L1Shrink, NuclearSVT, SeparablePair, Zero, prox,
                              prox_check_optimality, soft_threshold)


def test_l1_examples():
    op = L1Shrink(0.5)
    assert prox(op, np.array([2.0]), 1.0)[0] == pytest.approx(1.5)
    assert prox(op, np.array([-0.3]), 1.0)[0] == 0.0
    assert prox_check_optimality(op, np.array([2.0, -0.3]), 1.0) == 0.0


def test_l1_against_grid_minimisation():
    grid = np.arange(-2.0, 2.0 + 1e-12, 1e-4)
    best = grid[np.argmin(0.3 * np.abs(grid) + (grid - 0.7) ** 2 / 2)]
    got = prox(L1Shrink(0.3), np.array([0.7]), 1.0)[0]
    assert got == pytest.approx(0.4)
    assert abs(got - best) <= 1e-4


def test_svt_diagonal():
    out = prox(NuclearSVT(2.0, (2, 2)), np.diag([3.0, 1.0]), 1.0)
    np.testing.assert_allclose(out, np.diag([1.0, 0.0]), atol=1e-14)
    flat = prox(NuclearSVT(1.0, (2, 2)), np.diag([3.0, 1.0]).ravel(), 2.0)
    assert flat.shape == (4,)


def test_affine_projection_example():
    op = AffineProjection(np.array([[1.0, 0.0]]))
    np.testing.assert_allclose(prox(op, np.array([2.0, 3.0]), 0.7), [0.0, 3.0])
    P = op.projector
    assert np.linalg.norm(P @ P - P) <= 1e-8
    assert op.violation(prox(op, np.array([5.0, -1.0]), 1.0)) <= 1e-8


def test_box_and_zero():
    op = Box(-1.0, 1.0)
    np.testing.assert_array_equal(prox(op, np.array([-3.0, 0.2, 5.0]), 1.0), [-1.0, 0.2, 1.0])
    np.testing.assert_array_equal(prox(Zero(), np.array([1.0, 2.0]), 3.0), [1.0, 2.0])


def test_separable_pair_splits():
    op = SeparablePair(NuclearSVT(1.0, (2, 2)), L1Shrink(1.0), 4)
    x = np.r_[np.diag([3.0, 1.0]).ravel(), 2.0, -0.5]
    np.testing.assert_allclose(prox(op, x, 1.0), [2.0, 0.0, 0.0, 0.0, 1.0, 0.0], atol=1e-14)
    assert op.value(x) == pytest.approx(4.0 + 2.5)


def test_errors():
    with pytest.raises(ValueError):
        L1Shrink(-1.0)
    with pytest.raises(ValueError):
        prox(L1Shrink(1.0), np.ones(2), 0.0)
    with pytest.raises(ValueError):
        prox(L1Shrink(1.0), np.array([np.nan]), 1.0)
    with pytest.raises(ValueError):
        prox(NuclearSVT(1.0, (2, 3)), np.ones(5), 1.0)
    with pytest.raises(ValueError):
        prox(AffineProjection(np.ones((1, 3))), np.ones(2), 1.0)
    with pytest.raises(ValueError):
        Box(1.0, 0.0)


def test_residual_detects_wrong_candidate():
    x = np.array([2.0, -0.3, 0.1])
    for op in (L1Shrink(0.5), Box(-1.0, 1.0), AffineProjection(np.array([[1.0, 1.0, 0.0]]))):
        y = prox(op, x, 1.0)
        assert prox_check_optimality(op, x, 1.0, y) <= 1e-12
        assert prox_check_optimality(op, x, 1.0, y + 0.1) > 1e-3
    op = NuclearSVT(0.5, (2, 2))
    xm = np.array([[2.0, 0.3], [0.1, 1.0]])
    y = prox(op, xm, 1.0)
    assert prox_check_optimality(op, xm, 1.0, y) <= 1e-10
    assert prox_check_optimality(op, xm, 1.0, y * 1.1) > 1e-3


floats = st.floats(-50, 50, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(st.lists(floats, min_size=3, max_size=3), st.lists(floats, min_size=3, max_size=3),
       st.floats(0.01, 5.0), st.floats(0.0, 3.0))
def test_l1_nonexpansive_hypothesis(x, y, alpha, lam):
    x, y = np.array(x), np.array(y)
    op = L1Shrink(lam)
    assert np.linalg.norm(op.prox(x, alpha) - op.prox(y, alpha)) <= np.linalg.norm(x - y) + 1e-12
    np.testing.assert_allclose(op.prox(x, alpha), soft_threshold(x, alpha * lam))
