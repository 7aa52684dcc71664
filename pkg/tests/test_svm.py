"""SMO solver checks: hand-solvable duals, KKT conditions, reference QP.

The random-problem oracle verifies the full KKT system of the C-SVM
dual at the solver's own tolerance, and compares the dual objective
against scipy's SLSQP on problems small enough for it to be reliable.
"""

import numpy as np
import pytest
from scipy import optimize

from graphtst import ValidationError
from graphtst.svm import TOLERANCE, svm_decision, svm_predict, svm_train


def gaussian_gram(x, sigma=1.0):
    sq = np.sum((x[:, None, :] - x[None, :, :]) ** 2, axis=2)
    return np.exp(-sq / (2.0 * sigma**2))


def random_problem(rng, n=20, d=3):
    x = rng.normal(size=(n, d))
    y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    y[0], y[1] = 1.0, -1.0  # both classes always present
    return gaussian_gram(x), y


def dual_objective(K, y, alpha):
    q = (y[:, None] * y[None, :]) * K
    return 0.5 * alpha @ q @ alpha - alpha.sum()


class TestHandCases:
    def test_two_opposed_points_linear_kernel(self):
        # x = +1 labeled +1, x = -1 labeled -1, linear kernel:
        # dual optimum alpha = (1/2, 1/2), bias 0, decision f(x) = x.
        K = np.array([[1.0, -1.0], [-1.0, 1.0]])
        y = np.array([1.0, -1.0])
        model = svm_train(K, y, C=1.0)
        assert model.alpha[0] == 0.5 and model.alpha[1] == 0.5
        assert model.bias == 0.0
        assert model.support_count == 2
        K_cross = np.array([[2.0, -3.0], [-2.0, 3.0]])  # test points x = 2, -3
        assert np.array_equal(svm_decision(model, K_cross), [2.0, -3.0])
        assert np.array_equal(svm_predict(model, K_cross), [1.0, -1.0])

    def test_identical_points_opposite_labels(self):
        # Coincident contradictory points: both alphas saturate at C and
        # the decision value is exactly 0, which predicts +1 by the tie
        # rule, so exactly one of the two is misclassified.
        K = np.ones((2, 2))
        y = np.array([1.0, -1.0])
        model = svm_train(K, y, C=1.0)
        assert np.array_equal(model.alpha, [1.0, 1.0])
        assert model.bias == 0.0
        preds = svm_predict(model, K)
        assert np.array_equal(preds, [1.0, 1.0])

    def test_separable_block_gram(self):
        # Two perfectly separated clusters in kernel space.
        K = np.block([[np.full((3, 3), 0.9), np.full((3, 4), 0.1)],
                      [np.full((4, 3), 0.1), np.full((4, 4), 0.9)]])
        np.fill_diagonal(K, 1.0)
        y = np.array([1.0] * 3 + [-1.0] * 4)
        model = svm_train(K, y, C=10.0)
        assert np.array_equal(svm_predict(model, K), y)


class TestKktOracle:
    def test_kkt_conditions_hold_at_tolerance(self, np_rng):
        slack = 2.0 * TOLERANCE
        for C in (0.01, 1.0, 100.0):
            for _ in range(10):
                K, y = random_problem(np_rng)
                model = svm_train(K, y, C=C)
                a = model.alpha
                assert np.all(a >= 0.0) and np.all(a <= C)
                assert abs(a @ y) < 1e-9
                margins = y * (K @ (a * y) + model.bias)
                for i in range(len(y)):
                    if a[i] == 0.0:
                        assert margins[i] >= 1.0 - slack
                    elif a[i] == C:
                        assert margins[i] <= 1.0 + slack
                    else:
                        assert abs(margins[i] - 1.0) <= slack

    def test_objective_matches_reference_qp(self, np_rng):
        for _ in range(10):
            K, y = random_problem(np_rng, n=8)
            C = 1.0
            model = svm_train(K, y, C=C)
            ours = dual_objective(K, y, model.alpha)
            ref = optimize.minimize(
                lambda a: dual_objective(K, y, a),
                x0=np.full(8, C / 2),
                bounds=[(0.0, C)] * 8,
                constraints={"type": "eq", "fun": lambda a: a @ y},
                method="SLSQP",
                options={"maxiter": 500, "ftol": 1e-12},
            )
            assert ref.success
            assert ours <= ref.fun + 1e-4 * (1.0 + abs(ref.fun))


class TestWarmStart:
    def test_warm_start_reaches_cold_start_solution(self, np_rng):
        K, y = random_problem(np_rng)
        grid = [0.1, 1.0, 10.0]
        cold = [svm_train(K, y, C=c) for c in grid]
        alpha = None
        for c, reference in zip(grid, cold):
            warm = svm_train(K, y, C=c, alpha0=alpha)
            alpha = warm.alpha
            assert np.all(alpha >= 0.0) and np.all(alpha <= c)
            ours = dual_objective(K, y, alpha)
            base = dual_objective(K, y, reference.alpha)
            assert abs(ours - base) <= 1e-6 * (1.0 + abs(base))
            assert np.array_equal(svm_predict(warm, K), svm_predict(reference, K))

    def test_smaller_c_solution_is_feasible_start(self, np_rng):
        K, y = random_problem(np_rng)
        small = svm_train(K, y, C=0.5)
        large = svm_train(K, y, C=5.0, alpha0=small.alpha)
        assert np.all(large.alpha <= 5.0)


class TestValidation:
    def test_single_class_rejected(self):
        with pytest.raises(ValidationError, match="single class"):
            svm_train(np.eye(3), np.ones(3), C=1.0)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            svm_train(np.eye(3), np.array([1.0, -1.0]), C=1.0)

    def test_nonpositive_c_rejected(self):
        with pytest.raises(ValidationError):
            svm_train(np.eye(2), np.array([1.0, -1.0]), C=0.0)

    def test_bad_warm_start_shape_rejected(self):
        with pytest.raises(ValidationError):
            svm_train(np.eye(2), np.array([1.0, -1.0]), C=1.0, alpha0=np.zeros(3))

    def test_cross_kernel_shape_checked(self):
        model = svm_train(np.eye(2), np.array([1.0, -1.0]), C=1.0)
        with pytest.raises(ValidationError):
            svm_decision(model, np.zeros((3, 4)))
