"""Kernel two-sample test: unbiased MMD^2 statistic and permutation null.

The statistic is computed from a precomputed Gram matrix whose first m
rows/columns are sample A and remaining n are sample B:

    MMD2u = sum_{i != j} K_AA[i,j] / (m (m-1))
          - 2 sum_{i,j} K_AB[i,j] / (m n)
          + sum_{i != j} K_BB[i,j] / (n (n-1))

Unbiasedness means the estimate can be negative. The null distribution
comes from recomputing the statistic after uniformly random relabelings
of the m+n items into groups of sizes m and n; each permutation draws
its randomness from a sub-key derived from (seed, permutation index), so
the null sample is reproducible and independent of evaluation order.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from . import rng
from .errors import ValidationError
from .embeddings import KernelMatrix
from .graphs import LabeledGraphDataset, label_indices

NULL_QUANTILES = (0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99)


@njit(cache=True, nogil=True)
def _mmd2u_core(K, m, n):
    saa = 0.0
    for i in range(m):
        for j in range(m):
            if i != j:
                saa += K[i, j]
    sbb = 0.0
    for i in range(m, m + n):
        for j in range(m, m + n):
            if i != j:
                sbb += K[i, j]
    sab = 0.0
    for i in range(m):
        for j in range(m, m + n):
            sab += K[i, j]
    return saa / (m * (m - 1.0)) - 2.0 * sab / (m * n) + sbb / (n * (n - 1.0))


@njit(cache=True, nogil=True)
def _null_core(K, m, n, M, key, out):
    N = m + n
    idx = np.empty(N, dtype=np.int64)
    for t in range(M):
        for q in range(N):
            idx[q] = q
        rng.shuffle(rng.derive(key, t), idx)
        saa = 0.0
        for i in range(m):
            for j in range(m):
                if i != j:
                    saa += K[idx[i], idx[j]]
        sbb = 0.0
        for i in range(m, N):
            for j in range(m, N):
                if i != j:
                    sbb += K[idx[i], idx[j]]
        sab = 0.0
        for i in range(m):
            for j in range(m, N):
                sab += K[idx[i], idx[j]]
        out[t] = saa / (m * (m - 1.0)) - 2.0 * sab / (m * n) + sbb / (n * (n - 1.0))
    return out


def _as_gram_array(K) -> np.ndarray:
    if isinstance(K, KernelMatrix):
        return K.values
    return np.asarray(K, dtype=float)


def mmd2u(K, m: int, n: int) -> float:
    """Unbiased MMD^2 estimate from a block-ordered (m+n) x (m+n) Gram matrix."""
    values = _as_gram_array(K)
    if m < 2 or n < 2:
        raise ValidationError(f"both samples need at least 2 members, got m={m}, n={n}")
    if values.shape != (m + n, m + n):
        raise ValidationError(
            f"Gram matrix shape {values.shape} does not match m+n={m + n}"
        )
    return float(_mmd2u_core(values, m, n))


def ktst_null(K, m: int, n: int, M: int, seed: int) -> np.ndarray:
    """Permutation null sample of MMD2u: M relabelings, reproducible from seed."""
    values = _as_gram_array(K)
    if M < 1:
        raise ValidationError(f"need at least one permutation, got M={M}")
    if m < 2 or n < 2:
        raise ValidationError(f"both samples need at least 2 members, got m={m}, n={n}")
    if values.shape != (m + n, m + n):
        raise ValidationError(
            f"Gram matrix shape {values.shape} does not match m+n={m + n}"
        )
    out = np.empty(M)
    _null_core(values, m, n, M, np.uint64(seed % 2**64), out)
    return out


def p_value(observed: float, null_sample, convention: str = "geq",
            smooth: bool = False) -> float:
    """Fraction of null values at least as extreme as the observed statistic.

    `geq` counts ties as extreme (the standard valid permutation
    p-value); `greater` counts strict exceedances only. With `smooth`
    the estimate is (b+1)/(M+1) instead of b/M.
    """
    null = np.asarray(null_sample, dtype=float)
    if null.size == 0:
        raise ValidationError("empty null sample")
    if convention == "geq":
        b = int((null >= observed).sum())
    elif convention == "greater":
        b = int((null > observed).sum())
    else:
        raise ValidationError(f"unknown p-value convention: {convention!r}")
    if smooth:
        return (b + 1.0) / (null.size + 1.0)
    return b / float(null.size)


@dataclass(frozen=True)
class KtstConfig:
    permutations: int = 10000
    seed: int = 0
    convention: str = "geq"
    smooth: bool = False

    def __post_init__(self):
        if self.permutations < 1:
            raise ValidationError("permutations must be >= 1")
        if self.convention not in ("geq", "greater"):
            raise ValidationError(f"unknown convention: {self.convention!r}")


@dataclass(frozen=True)
class TestReport:
    """Everything needed to reproduce and re-check one hypothesis test."""

    statistic: float
    null_sample: np.ndarray
    p_value: float
    permutations: int
    seed: int
    convention: str
    smooth: bool
    m: int
    n: int
    provenance: dict = field(default_factory=dict)

    def null_summary(self) -> dict:
        null = np.asarray(self.null_sample, dtype=float)
        return {
            "min": float(null.min()),
            "max": float(null.max()),
            "quantiles": {str(q): float(np.quantile(null, q)) for q in NULL_QUANTILES},
        }

    def to_json_dict(self) -> dict:
        return {
            "test": self.provenance.get("test", ""),
            "statistic": self.statistic,
            "p_value": self.p_value,
            "m": self.m,
            "n": self.n,
            "M": self.permutations,
            "seed": self.seed,
            "convention": self.convention,
            "smooth": self.smooth,
            "provenance": self.provenance,
            "null_summary": self.null_summary(),
        }

    def save(self, path, null_csv=None) -> None:
        """Write the report JSON; optionally the full null sample as CSV."""
        Path(path).write_text(
            json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
        if null_csv is not None:
            lines = "\n".join(repr(float(v)) for v in np.asarray(self.null_sample))
            Path(null_csv).write_text(lines + "\n", encoding="utf-8")


def _resolve_gram_and_labels(source, labels, build_gram):
    if isinstance(source, LabeledGraphDataset):
        kernel = build_gram(source)
        return kernel, source.labels
    if labels is None:
        raise ValidationError("labels are required when passing a precomputed kernel")
    kernel = source if isinstance(source, KernelMatrix) else KernelMatrix(values=source)
    if len(labels) != kernel.size:
        raise ValidationError(
            f"{len(labels)} labels for a {kernel.size}x{kernel.size} kernel"
        )
    return kernel, tuple(labels)


def ktst(source, config: KtstConfig = KtstConfig(), labels=None,
         build_gram=None) -> TestReport:
    """Run the kernel two-sample test.

    `source` is either a LabeledGraphDataset (then `build_gram` turns it
    into a KernelMatrix; see graphtst.pipeline) or a precomputed
    KernelMatrix / array, in which case `labels` must be given in row
    order. Rows are re-blocked so sample A comes first; the permutation
    null is unaffected by that reordering.
    """
    if build_gram is None:
        from .pipeline import default_gram  # late import: pipeline depends on us not
        build_gram = default_gram
    kernel, labels = _resolve_gram_and_labels(source, labels, build_gram)
    idx_a, idx_b = label_indices(labels)
    if idx_a.size < 2 or idx_b.size < 2:
        raise ValidationError(
            f"both samples need at least 2 members, got m={idx_a.size}, n={idx_b.size}"
        )
    order = np.concatenate([idx_a, idx_b])
    blocked = kernel.values[np.ix_(order, order)]
    m, n = int(idx_a.size), int(idx_b.size)

    statistic = mmd2u(blocked, m, n)
    null = ktst_null(blocked, m, n, config.permutations, config.seed)
    p = p_value(statistic, null, config.convention, config.smooth)
    provenance = dict(kernel.provenance)
    provenance["test"] = "ktst"
    return TestReport(
        statistic=statistic,
        null_sample=null,
        p_value=p,
        permutations=config.permutations,
        seed=config.seed,
        convention=config.convention,
        smooth=config.smooth,
        m=m,
        n=n,
        provenance=provenance,
    )
