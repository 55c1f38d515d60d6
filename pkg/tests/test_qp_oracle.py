"""Sanity checks on the test oracle itself, against an unrelated solver."""

import numpy as np
import pytest
from scipy.optimize import minimize

from qp_oracle import dual_objective, gram_matrix, random_problem, solve_box_qp


def lbfgsb_minimum(K, upper):
    n = K.shape[0]
    bounds = [(0.0, None if np.isinf(upper) else upper)] * n

    def fun(a):
        return 0.5 * a @ K @ a - a.sum()

    def grad(a):
        return K @ a - np.ones(n)

    best = np.inf
    for start in (np.zeros(n), np.full(n, min(upper, 1.0) / 2)):
        res = minimize(
            fun, start, jac=grad, bounds=bounds, method="L-BFGS-B",
            options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 10000},
        )
        best = min(best, res.fun)
    return best


def test_hand_solved_pair():
    # x1 = e0, y=+1; x2 = e1, y=-1; C=1. Interior KKT gives alpha=(1,1)
    # (exactly on the box corner), w=(1,-1,0), objective 0.5*2 - 2 = -1.
    rows = [np.array([0]), np.array([1])]
    y = np.array([1.0, -1.0])
    K = gram_matrix(rows, y, 2, 1.0)
    alpha, obj = solve_box_qp(K, 1.0)
    assert np.allclose(alpha, [1.0, 1.0], atol=1e-9)
    assert obj == pytest.approx(-1.0, abs=1e-9)


@pytest.mark.parametrize("loss", ["hinge", "squared_hinge"])
def test_oracle_agrees_with_lbfgsb(loss):
    rng = np.random.default_rng(29)
    for _ in range(25):
        rows, y, dim = random_problem(rng)
        c = float(rng.choice([0.1, 1.0, 10.0]))
        K = gram_matrix(rows, y, dim, c, loss)
        upper = c if loss == "hinge" else np.inf
        alpha, obj = solve_box_qp(K, upper)
        assert obj == pytest.approx(lbfgsb_minimum(K, upper), abs=1e-6)
        assert alpha.min() >= -1e-12
        if np.isfinite(upper):
            assert alpha.max() <= upper + 1e-9
        assert dual_objective(K, alpha) == pytest.approx(obj, abs=1e-12)


def test_duplicate_points_make_degenerate_gram():
    # Identical rows force a singular free block; the oracle must still
    # match the independent solver.
    rows = [np.array([0, 1]), np.array([0, 1]), np.array([2])]
    y = np.array([1.0, 1.0, -1.0])
    K = gram_matrix(rows, y, 3, 10.0)
    _, obj = solve_box_qp(K, 10.0)
    assert obj == pytest.approx(lbfgsb_minimum(K, 10.0), abs=1e-6)
