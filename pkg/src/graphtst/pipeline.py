"""From a labeled graph dataset to a kernel matrix.

Two families of representation are supported:

* vector embeddings (`dce`, `dre`) followed by a Gaussian kernel whose
  bandwidth defaults to the median pairwise distance;
* structural graph kernels (`wl`, `sp`) on label-discretized graphs.

Graph kernels need a discrete edge structure, so datasets with
non-unit weights must state an explicit threshold — silently binarizing
weighted data is the kind of default that invalidates a study.
"""

from dataclasses import dataclass

import numpy as np

from .embeddings import (KernelMatrix, dce_embed, dre_embed, gaussian_gram,
                         median_heuristic)
from .errors import ValidationError
from .graph_kernels import (discretize, normalize_gram, sp_kernel_matrix,
                            wl_kernel_matrix)
from .graphs import LabeledGraphDataset

METHODS = ("dce", "dre", "wl", "sp")


@dataclass(frozen=True)
class RepresentationConfig:
    method: str = "dce"
    wl_iterations: int = 3
    edge_threshold: float = None
    normalize: bool = False
    sigma: float = None  # None: median heuristic
    prototypes: tuple = None  # dre only; None: every graph

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(
                f"unknown representation {self.method!r}; choose from {METHODS}"
            )
        if self.wl_iterations < 0:
            raise ValidationError("wl_iterations must be >= 0")
        if self.sigma is not None and self.sigma <= 0.0:
            raise ValidationError("sigma must be positive")


def has_nonunit_weights(dataset: LabeledGraphDataset) -> bool:
    return any(w != 1.0 for g in dataset.graphs for w in g.weights)


def _gaussian_from_vectors(vectors: np.ndarray, config: RepresentationConfig,
                           extra: dict) -> KernelMatrix:
    if config.sigma is None:
        sigma = median_heuristic(vectors)
        extra = dict(extra, sigma_source="median")
    else:
        sigma = float(config.sigma)
        extra = dict(extra, sigma_source="fixed")
    kernel = gaussian_gram(vectors, sigma)
    provenance = dict(kernel.provenance)
    provenance.update(extra)
    return KernelMatrix(values=kernel.values, provenance=provenance)


def gram_from_dataset(dataset: LabeledGraphDataset,
                      config: RepresentationConfig = RepresentationConfig()
                      ) -> KernelMatrix:
    """Build the Gram matrix for the configured representation."""
    if config.method == "dce":
        embedded = dce_embed(dataset)
        return _gaussian_from_vectors(
            embedded.vectors, config, {"representation": "dce"}
        )
    if config.method == "dre":
        embedded = dre_embed(dataset, prototypes=config.prototypes)
        extra = {
            "representation": "dre",
            "prototypes": [int(i) for i in embedded.prototype_indices],
        }
        return _gaussian_from_vectors(embedded.vectors, config, extra)

    # structural kernels need discrete edges
    if has_nonunit_weights(dataset) and config.edge_threshold is None:
        raise ValidationError(
            "dataset has non-unit edge weights; graph kernels need an explicit "
            "edge threshold (--threshold)"
        )
    discrete = [discretize(g, config.edge_threshold) for g in dataset.graphs]
    if config.method == "wl":
        kernel = wl_kernel_matrix(discrete, h=config.wl_iterations)
    else:
        kernel = sp_kernel_matrix(discrete)
    if config.normalize:
        kernel = normalize_gram(kernel)
    return kernel


def default_gram(dataset: LabeledGraphDataset) -> KernelMatrix:
    return gram_from_dataset(dataset, RepresentationConfig())
