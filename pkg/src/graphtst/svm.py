"""Kernel SVM trained by SMO on a precomputed Gram matrix.

Solves the C-SVM dual

    min_a  0.5 a' Q a - e' a,   Q_ij = y_i y_j K_ij,
    s.t.   0 <= a_i <= C,  sum_i a_i y_i = 0

with maximal-violating-pair working set selection. Convergence is
declared when the duality-style gap max_{I_up}(-y g) - min_{I_low}(-y g)
drops to the tolerance; index ties always resolve to the lowest index,
so training is deterministic. The iteration budget is 10^4 per training
point; exceeding it raises ConvergenceError rather than returning a
silently unconverged model.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConvergenceError, ValidationError

TOLERANCE = 1e-3
ITERATION_FACTOR = 10_000
# Curvature floor for coincident points, as in LIBSVM's TAU.
_ETA_FLOOR = 1e-12


@njit(cache=True, nogil=True)
def _smo_core(K, y, C, tol, max_iter, alpha):
    """Optimize alpha in place; return (bias, iterations, gap, converged)."""
    n = y.shape[0]
    # grad_i = d/d a_i (0.5 a'Qa - e'a) = sum_j y_i y_j K_ij a_j - 1
    grad = np.empty(n)
    for i in range(n):
        acc = -1.0
        for j in range(n):
            if alpha[j] > 0.0:
                acc += y[i] * y[j] * K[i, j] * alpha[j]
        grad[i] = acc

    it = 0
    gap = np.inf
    while True:
        # I_up: alpha_i can move "up" along +y_i; I_low: along -y_i.
        gmax = -np.inf
        gmin = np.inf
        i_sel = -1
        j_sel = -1
        for t in range(n):
            v = -y[t] * grad[t]
            if (y[t] > 0.0 and alpha[t] < C) or (y[t] < 0.0 and alpha[t] > 0.0):
                if v > gmax:
                    gmax = v
                    i_sel = t
            if (y[t] > 0.0 and alpha[t] > 0.0) or (y[t] < 0.0 and alpha[t] < C):
                if v < gmin:
                    gmin = v
                    j_sel = t
        if i_sel < 0 or j_sel < 0:
            gap = -np.inf
            break
        gap = gmax - gmin
        if gap <= tol:
            break
        if it >= max_iter:
            break
        it += 1

        i = i_sel
        j = j_sel
        yi = y[i]
        yj = y[j]
        ai_old = alpha[i]
        aj_old = alpha[j]
        # Newton step along the feasible pair direction, then clip each
        # variable to an *exact* bound and restore the partner from the
        # invariant (diff resp. sum). Clipping only one side in floating
        # point can leave the partner an ulp inside the box, and the
        # unchanged maximal-violating pair then gets reselected forever.
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if eta < _ETA_FLOOR:
            eta = _ETA_FLOOR
        if yi != yj:
            delta = (-grad[i] - grad[j]) / eta
            diff = ai_old - aj_old
            ai = ai_old + delta
            aj = aj_old + delta
            if diff > 0.0:
                if aj < 0.0:
                    aj = 0.0
                    ai = diff
            else:
                if ai < 0.0:
                    ai = 0.0
                    aj = -diff
            if diff > 0.0:
                if ai > C:
                    ai = C
                    aj = C - diff
            else:
                if aj > C:
                    aj = C
                    ai = C + diff
        else:
            delta = (grad[i] - grad[j]) / eta
            total = ai_old + aj_old
            ai = ai_old - delta
            aj = aj_old + delta
            if total > C:
                if ai > C:
                    ai = C
                    aj = total - C
            else:
                if aj < 0.0:
                    aj = 0.0
                    ai = total
            if total > C:
                if aj > C:
                    aj = C
                    ai = total - C
            else:
                if ai < 0.0:
                    ai = 0.0
                    aj = total
        dai = ai - ai_old
        daj = aj - aj_old
        alpha[i] = ai
        alpha[j] = aj
        for t in range(n):
            grad[t] += y[t] * (yi * K[t, i] * dai + yj * K[t, j] * daj)

    # Bias from free support vectors; fall back to the gap midpoint when
    # every alpha sits on a bound.
    b_sum = 0.0
    n_free = 0
    for t in range(n):
        if 0.0 < alpha[t] < C:
            b_sum += -y[t] * grad[t]
            n_free += 1
    if n_free > 0:
        bias = b_sum / n_free
    elif np.isfinite(gap):
        bias = 0.5 * (gmax + gmin)
    else:
        bias = 0.0
    converged = gap <= tol
    return bias, it, gap, converged


@njit(cache=True, nogil=True)
def _decision_core(K_cross, y, alpha, bias, out):
    """out[t] = sum_i alpha_i y_i K_cross[i, t] + bias."""
    n_train = y.shape[0]
    n_test = out.shape[0]
    for t in range(n_test):
        acc = bias
        for i in range(n_train):
            if alpha[i] > 0.0:
                acc += alpha[i] * y[i] * K_cross[i, t]
        out[t] = acc
    return out


@dataclass(frozen=True)
class SvmModel:
    alpha: np.ndarray
    y: np.ndarray
    bias: float
    C: float
    iterations: int
    gap: float

    @property
    def support_count(self) -> int:
        return int((self.alpha > 0.0).sum())


def svm_train(K: np.ndarray, y: np.ndarray, C: float,
              tol: float = TOLERANCE, alpha0=None) -> SvmModel:
    """Train on a precomputed training Gram matrix and labels in {-1,+1}.

    `alpha0` warm-starts the solver; it must be feasible for this C
    (any solution for a smaller C qualifies).
    """
    K = np.asarray(K, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if K.shape != (n, n):
        raise ValidationError(f"Gram shape {K.shape} does not match {n} labels")
    if C <= 0.0:
        raise ValidationError(f"C must be positive, got {C}")
    if not (np.any(y > 0.0) and np.any(y < 0.0)):
        raise ValidationError("training labels contain a single class")
    if alpha0 is None:
        alpha = np.zeros(n)
    else:
        alpha = np.array(alpha0, dtype=float)
        if alpha.shape != (n,):
            raise ValidationError("warm-start alpha has the wrong shape")
    max_iter = ITERATION_FACTOR * n
    bias, iterations, gap, converged = _smo_core(K, y, C, tol, max_iter, alpha)
    if not converged:
        raise ConvergenceError(
            f"SMO did not converge: gap={gap:.3e} after {iterations} iterations "
            f"(cap {max_iter}) at C={C}"
        )
    return SvmModel(alpha=alpha, y=y, bias=float(bias), C=float(C),
                    iterations=int(iterations), gap=float(gap))


def svm_decision(model: SvmModel, K_cross: np.ndarray) -> np.ndarray:
    """Decision values for test points; K_cross is (n_train, n_test)."""
    K_cross = np.asarray(K_cross, dtype=float)
    if K_cross.ndim != 2 or K_cross.shape[0] != model.y.shape[0]:
        raise ValidationError(
            f"cross-kernel shape {K_cross.shape} does not match "
            f"{model.y.shape[0]} training points"
        )
    out = np.empty(K_cross.shape[1])
    return _decision_core(K_cross, model.y, model.alpha, model.bias, out)


def svm_predict(model: SvmModel, K_cross: np.ndarray) -> np.ndarray:
    """Predicted labels in {-1,+1}; a decision value of exactly 0 maps to +1."""
    decision = svm_decision(model, K_cross)
    return np.where(decision >= 0.0, 1.0, -1.0)
