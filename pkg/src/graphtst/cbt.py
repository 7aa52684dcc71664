"""Classification-based two-sample test.

A kernel SVM is scored by nested stratified cross-validation: the outer
folds estimate balanced accuracy, the inner folds (over each outer
training block) pick the SVM cost C from a log-spaced grid. The
observed statistic is the median of that accuracy over several
repetitions (fresh fold shuffles each time); the null distribution
re-runs the whole nested procedure on label permutations. Balanced
accuracy has chance level 0.5 regardless of class imbalance, so the
test asks whether the classifier beats chance more than relabeling can
explain.

Fold assignment is stratified by dealing the (shuffled) within-class
ranks round-robin over folds, so per-class fold sizes differ by at most
one and the split is invariant to reordering items within a class.
"""

import numpy as np
from dataclasses import dataclass, field
from numba import njit

from . import rng
from .errors import ConvergenceError, ValidationError
from .graphs import LABEL_A, LABEL_B
from .ktst import TestReport, p_value, _resolve_gram_and_labels
from .svm import _smo_core, TOLERANCE, ITERATION_FACTOR

DEFAULT_C_GRID = tuple(float(c) for c in np.logspace(-5.0, 5.0, 25))


@njit(cache=True, nogil=True)
def _deal_class(y, cls, kappa, key, fold):
    n = y.shape[0]
    cnt = 0
    for i in range(n):
        if y[i] == cls:
            cnt += 1
    if cnt == 0:
        return
    ranks = np.arange(cnt)
    rng.shuffle(key, ranks)
    fold_for_rank = np.empty(cnt, dtype=np.int64)
    for t in range(cnt):
        fold_for_rank[ranks[t]] = t % kappa
    r = 0
    for i in range(n):
        if y[i] == cls:
            fold[i] = fold_for_rank[r]
            r += 1


@njit(cache=True, nogil=True)
def _fold_codes_core(y, kappa, key):
    fold = np.empty(y.shape[0], dtype=np.int64)
    _deal_class(y, 1.0, kappa, rng.derive(key, 0), fold)
    _deal_class(y, -1.0, kappa, rng.derive(key, 1), fold)
    return fold


@njit(cache=True, nogil=True)
def _balanced_accuracy_core(y_true, decision):
    pos = 0
    neg = 0
    tp = 0
    tn = 0
    for i in range(y_true.shape[0]):
        predicted_pos = decision[i] >= 0.0
        if y_true[i] > 0.0:
            pos += 1
            if predicted_pos:
                tp += 1
        else:
            neg += 1
            if not predicted_pos:
                tn += 1
    return 0.5 * (tp / float(pos) + tn / float(neg))


@njit(cache=True, nogil=True)
def _nested_cv_core(K, y, kappa, c_grid, key, tol, chosen):
    """Mean outer-fold balanced accuracy; fills chosen[f] with the C index.

    Returns (accuracy, status); status 1 flags an SMO iteration-cap hit.
    """
    n = y.shape[0]
    n_c = c_grid.shape[0]
    fold = _fold_codes_core(y, kappa, rng.derive(key, 0))
    inner_root = rng.derive(key, 1)
    acc_sum = 0.0

    for f in range(kappa):
        n_te = 0
        for i in range(n):
            if fold[i] == f:
                n_te += 1
        n_tr = n - n_te
        tr = np.empty(n_tr, dtype=np.int64)
        te = np.empty(n_te, dtype=np.int64)
        a = 0
        b = 0
        for i in range(n):
            if fold[i] == f:
                te[b] = i
                b += 1
            else:
                tr[a] = i
                a += 1
        y_tr = np.empty(n_tr)
        pos_tr = 0
        for p in range(n_tr):
            y_tr[p] = y[tr[p]]
            if y_tr[p] > 0.0:
                pos_tr += 1
        neg_tr = n_tr - pos_tr
        K_tr = np.empty((n_tr, n_tr))
        for p in range(n_tr):
            for q in range(n_tr):
                K_tr[p, q] = K[tr[p], tr[q]]

        # Inner folds cannot outnumber the rarest class in this block.
        ik = kappa
        if pos_tr < ik:
            ik = pos_tr
        if neg_tr < ik:
            ik = neg_tr

        best = 0
        if ik >= 2:
            acc_c = np.zeros(n_c)
            ifold = _fold_codes_core(y_tr, ik, rng.derive(inner_root, f))
            for g in range(ik):
                n_va = 0
                for p in range(n_tr):
                    if ifold[p] == g:
                        n_va += 1
                n_it = n_tr - n_va
                itr = np.empty(n_it, dtype=np.int64)
                iva = np.empty(n_va, dtype=np.int64)
                a = 0
                b = 0
                for p in range(n_tr):
                    if ifold[p] == g:
                        iva[b] = p
                        b += 1
                    else:
                        itr[a] = p
                        a += 1
                K_ii = np.empty((n_it, n_it))
                for p in range(n_it):
                    for q in range(n_it):
                        K_ii[p, q] = K_tr[itr[p], itr[q]]
                y_it = np.empty(n_it)
                for p in range(n_it):
                    y_it[p] = y_tr[itr[p]]
                y_iv = np.empty(n_va)
                for p in range(n_va):
                    y_iv[p] = y_tr[iva[p]]
                decision = np.empty(n_va)
                # Ascending C grid with a warm start: the previous
                # solution stays feasible when the box grows.
                alpha = np.zeros(n_it)
                for ci in range(n_c):
                    bias, _, _, converged = _smo_core(
                        K_ii, y_it, c_grid[ci], tol, ITERATION_FACTOR * n_it, alpha
                    )
                    if not converged:
                        return np.nan, 1
                    for t in range(n_va):
                        acc = bias
                        for p in range(n_it):
                            if alpha[p] > 0.0:
                                acc += alpha[p] * y_it[p] * K_tr[itr[p], iva[t]]
                        decision[t] = acc
                    acc_c[ci] += _balanced_accuracy_core(y_iv, decision)
            for ci in range(1, n_c):
                if acc_c[ci] > acc_c[best]:
                    best = ci

        alpha = np.zeros(n_tr)
        bias, _, _, converged = _smo_core(
            K_tr, y_tr, c_grid[best], tol, ITERATION_FACTOR * n_tr, alpha
        )
        if not converged:
            return np.nan, 1
        decision = np.empty(n_te)
        for t in range(n_te):
            acc = bias
            for p in range(n_tr):
                if alpha[p] > 0.0:
                    acc += alpha[p] * y_tr[p] * K[tr[p], te[t]]
            decision[t] = acc
        y_te = np.empty(n_te)
        for t in range(n_te):
            y_te[t] = y[te[t]]
        acc_sum += _balanced_accuracy_core(y_te, decision)
        chosen[f] = best

    return acc_sum / kappa, 0


@njit(cache=True, nogil=True)
def _cbt_null_core(K, y, kappa, c_grid, M, perm_root, fold_root, tol, out):
    n = y.shape[0]
    chosen = np.empty(kappa, dtype=np.int64)
    y_perm = np.empty(n)
    idx = np.empty(n, dtype=np.int64)
    for t in range(M):
        for q in range(n):
            idx[q] = q
        rng.shuffle(rng.derive(perm_root, t), idx)
        for q in range(n):
            y_perm[q] = y[idx[q]]
        acc, status = _nested_cv_core(
            K, y_perm, kappa, c_grid, rng.derive(fold_root, t), tol, chosen
        )
        if status != 0:
            return 1
        out[t] = acc
    return 0


def _as_signs(labels) -> np.ndarray:
    labels = list(labels)
    if all(lab in (LABEL_A, LABEL_B) for lab in labels):
        return np.array([1.0 if lab == LABEL_A else -1.0 for lab in labels])
    y = np.asarray(labels, dtype=float)
    if not np.all(np.abs(y) == 1.0):
        raise ValidationError("labels must be 'a'/'b' strings or +1/-1 values")
    return y


def stratified_kfold(labels, kappa: int, seed: int) -> np.ndarray:
    """Fold code (0..kappa-1) per item, stratified by class.

    Within each class the fold sizes differ by at most one, and an
    input reordering that preserves within-class order yields the same
    fold code for every item.
    """
    y = _as_signs(labels)
    n = y.shape[0]
    if not 1 <= kappa <= n:
        raise ValidationError(f"kappa={kappa} not in [1, {n}]")
    return _fold_codes_core(y, kappa, np.uint64(seed % 2**64))


def balanced_accuracy(y_true, y_pred) -> float:
    """Mean of per-class accuracies; 0.5 is chance for any class balance."""
    y_true = _as_signs(y_true)
    y_pred = _as_signs(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValidationError("label vectors differ in length")
    if not (np.any(y_true > 0) and np.any(y_true < 0)):
        raise ValidationError("true labels contain a single class")
    # reuse the decision-based kernel: signs act as their own decisions
    return float(_balanced_accuracy_core(y_true, y_pred))


def _check_c_grid(c_grid) -> np.ndarray:
    grid = np.asarray(c_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValidationError("C grid must be a non-empty 1-D sequence")
    if np.any(grid <= 0.0):
        raise ValidationError("C grid entries must be positive")
    return np.sort(grid)


def nested_cv_accuracy(K, y, kappa: int = 5, c_grid=DEFAULT_C_GRID,
                       seed: int = 0):
    """Nested-CV balanced accuracy for a precomputed Gram matrix.

    Returns (accuracy, selected_c) where selected_c lists the C value
    the inner loop picked for each outer fold (ties go to the smallest
    C).
    """
    K = np.asarray(K, dtype=float)
    y = _as_signs(y)
    n = y.shape[0]
    if K.shape != (n, n):
        raise ValidationError(f"Gram shape {K.shape} does not match {n} labels")
    m = int((y > 0).sum())
    if not 2 <= kappa <= min(m, n - m):
        raise ValidationError(
            f"kappa={kappa} not in [2, min(m, n)] = [2, {min(m, n - m)}]"
        )
    grid = _check_c_grid(c_grid)
    chosen = np.empty(kappa, dtype=np.int64)
    acc, status = _nested_cv_core(
        K, y, kappa, grid, np.uint64(seed % 2**64), TOLERANCE, chosen
    )
    if status != 0:
        raise ConvergenceError("SMO hit its iteration cap during nested CV")
    return float(acc), grid[chosen]


@dataclass(frozen=True)
class CbtConfig:
    folds: int = 5
    c_grid: tuple = DEFAULT_C_GRID
    repetitions: int = 100
    permutations: int = 10000
    seed: int = 0
    convention: str = "geq"
    smooth: bool = False

    def __post_init__(self):
        if self.folds < 2:
            raise ValidationError("folds must be >= 2")
        if self.repetitions < 1:
            raise ValidationError("repetitions must be >= 1")
        if self.permutations < 1:
            raise ValidationError("permutations must be >= 1")
        if self.convention not in ("geq", "greater"):
            raise ValidationError(f"unknown convention: {self.convention!r}")
        _check_c_grid(self.c_grid)


@dataclass(frozen=True)
class CbtReport(TestReport):
    """Test report plus the classification detail behind the statistic."""

    repetitions: int = 1
    folds: int = 5
    acc_cv_all: np.ndarray = field(default_factory=lambda: np.empty(0))
    p_values_per_repetition: np.ndarray = field(default_factory=lambda: np.empty(0))
    c_histogram: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        out = super().to_json_dict()
        out["repetitions"] = self.repetitions
        out["folds"] = self.folds
        out["acc_cv_all"] = [float(v) for v in self.acc_cv_all]
        out["p_values_per_repetition"] = [
            float(v) for v in self.p_values_per_repetition
        ]
        out["c_histogram"] = {k: int(v) for k, v in sorted(self.c_histogram.items())}
        return out


def cbt(source, config: CbtConfig = CbtConfig(), labels=None,
        build_gram=None) -> CbtReport:
    """Run the classification-based two-sample test.

    The observed statistic is the median nested-CV balanced accuracy
    over `repetitions` fold reshuffles; the null re-runs one nested CV
    per label permutation, with fresh fold splits each time.
    """
    if build_gram is None:
        from .pipeline import default_gram
        build_gram = default_gram
    kernel, labels = _resolve_gram_and_labels(source, labels, build_gram)
    y = _as_signs(labels)
    n = y.shape[0]
    m = int((y > 0).sum())
    if not 2 <= config.folds <= min(m, n - m):
        raise ValidationError(
            f"folds={config.folds} not in [2, min(m, n)] = [2, {min(m, n - m)}]"
        )
    grid = _check_c_grid(config.c_grid)
    root = np.uint64(config.seed % 2**64)
    K = kernel.values

    chosen = np.empty(config.folds, dtype=np.int64)
    acc_all = np.empty(config.repetitions)
    c_counts: dict = {}
    rep_root = rng.derive_key(root, 1)
    for r in range(config.repetitions):
        acc, status = _nested_cv_core(
            K, y, config.folds, grid, rng.derive_key(rep_root, r), TOLERANCE, chosen
        )
        if status != 0:
            raise ConvergenceError("SMO hit its iteration cap during nested CV")
        acc_all[r] = acc
        for ci in chosen:
            key = f"{grid[ci]:.6g}"
            c_counts[key] = c_counts.get(key, 0) + 1
    observed = float(np.median(acc_all))

    null = np.empty(config.permutations)
    status = _cbt_null_core(
        K, y, config.folds, grid, config.permutations,
        rng.derive_key(root, 2), rng.derive_key(root, 3), TOLERANCE, null,
    )
    if status != 0:
        raise ConvergenceError("SMO hit its iteration cap during a null permutation")

    p = p_value(observed, null, config.convention, config.smooth)
    per_rep = np.array([
        p_value(float(acc_all[r]), null, config.convention, config.smooth)
        for r in range(config.repetitions)
    ])
    provenance = dict(kernel.provenance)
    provenance["test"] = "cbt"
    return CbtReport(
        statistic=observed,
        null_sample=null,
        p_value=p,
        permutations=config.permutations,
        seed=config.seed,
        convention=config.convention,
        smooth=config.smooth,
        m=m,
        n=n - m,
        provenance=provenance,
        repetitions=config.repetitions,
        folds=config.folds,
        acc_cv_all=acc_all,
        p_values_per_repetition=per_rep,
        c_histogram=c_counts,
    )
