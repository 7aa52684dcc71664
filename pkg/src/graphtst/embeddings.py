"""Vector embeddings of node-corresponding graphs and Gaussian Gram matrices.

Two embeddings are provided. The direct connection embedding (DCE)
unfolds the strictly-upper-triangular adjacency entries of each graph
into a vector of dimension |V|(|V|-1)/2, in row-major order. The
dissimilarity representation embedding (DRE) describes each graph by its
Euclidean distances to a set of prototype graphs; the base vectors for
those distances are the DCE vectors (recorded in provenance).

Embedded datasets become Gram matrices through the Gaussian kernel
k(u, v) = exp(-||u - v||^2 / (2 sigma^2)) with sigma set by the median
heuristic: the median of all pairwise distances, which spends no labeled
data on bandwidth selection.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .graphs import Graph, LabeledGraphDataset


@dataclass(frozen=True)
class EmbeddedDataset:
    """N x d matrix of graph vectors plus how they were produced."""

    vectors: np.ndarray
    method: str  # "dce" or "dre"
    node_count: int | None = None
    prototype_indices: tuple[int, ...] | None = None


@dataclass(frozen=True)
class KernelMatrix:
    """Symmetric PSD Gram matrix with provenance metadata.

    `provenance` records the kernel/embedding route and its parameters so
    every report downstream is self-describing.
    """

    values: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValidationError(f"kernel matrix must be square, got shape {v.shape}")
        if np.max(np.abs(v - v.T), initial=0.0) > 1e-9:
            raise ValidationError("kernel matrix is not symmetric within 1e-9")

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def check_psd(self) -> None:
        """Raise unless the smallest eigenvalue is within the PSD tolerance.

        Roundoff allowance: lambda_min >= -1e-8 * lambda_max.
        """
        eigvals = np.linalg.eigvalsh((self.values + self.values.T) / 2.0)
        lo, hi = eigvals[0], max(eigvals[-1], 0.0)
        if lo < -1e-8 * max(hi, 1.0):
            raise ValidationError(
                f"kernel matrix is not positive semidefinite: "
                f"min eigenvalue {lo:.3e}, max {hi:.3e}"
            )


def dce_embed(dataset: LabeledGraphDataset) -> EmbeddedDataset:
    """Unfold each adjacency matrix's strict upper triangle into a row vector.

    Requires node correspondence; absent edges contribute 0. Row-major
    order: (0,1), (0,2), ..., (0,V-1), (1,2), ...
    """
    if not dataset.node_correspondence:
        raise ValidationError("DCE requires a dataset with node correspondence")
    v = dataset.graphs[0].node_count
    iu, ju = np.triu_indices(v, k=1)
    vectors = np.zeros((dataset.size, iu.size))
    for row, graph in enumerate(dataset.graphs):
        vectors[row] = graph.adjacency_matrix()[iu, ju]
    return EmbeddedDataset(vectors=vectors, method="dce", node_count=v)


def dce_to_graph(vector, node_count: int) -> Graph:
    """Inverse of the DCE unfolding for a fixed node set."""
    iu, ju = np.triu_indices(node_count, k=1)
    a = np.zeros((node_count, node_count))
    a[iu, ju] = vector
    return Graph.from_adjacency(a + a.T)


def dre_embed(dataset: LabeledGraphDataset, prototype_indices=None) -> EmbeddedDataset:
    """Represent each graph by Euclidean distances to prototype graphs.

    Prototypes default to the whole dataset (deterministic and free of
    label leakage); pass an index collection to restrict them. Distances
    are taken between DCE vectors.
    """
    if prototype_indices is None:
        prototype_indices = range(dataset.size)
    prototypes = tuple(int(i) for i in prototype_indices)
    if not prototypes:
        raise ValidationError("DRE needs at least one prototype")
    if any(i < 0 or i >= dataset.size for i in prototypes):
        raise ValidationError(f"prototype index out of range 0..{dataset.size - 1}")
    base = dce_embed(dataset).vectors
    proto = base[list(prototypes)]
    vectors = np.sqrt(pairwise_sq_dists(base, proto))
    return EmbeddedDataset(vectors=vectors, method="dre", prototype_indices=prototypes)


def pairwise_sq_dists(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between rows of x and rows of y.

    Computed row by row as sums of squared differences: exact symmetry
    for x is y, no cancellation, and memory stays at one n x d block.
    """
    out = np.empty((x.shape[0], y.shape[0]))
    for i in range(x.shape[0]):
        out[i] = ((y - x[i]) ** 2).sum(axis=1)
    return out


def median_heuristic(vectors) -> float:
    """Bandwidth sigma = median of the N(N-1)/2 pairwise Euclidean distances.

    For an even count the mean of the two middle order statistics is
    used. Raises when the median distance is zero (a degenerate dataset:
    no usable bandwidth exists).
    """
    x = np.asarray(vectors, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 2:
        raise ValidationError("median heuristic needs at least 2 vectors")
    d2 = pairwise_sq_dists(x, x)
    iu, ju = np.triu_indices(x.shape[0], k=1)
    sigma = float(np.median(np.sqrt(d2[iu, ju])))
    if sigma <= 0.0:
        raise ValidationError("degenerate dataset: median pairwise distance is zero")
    return sigma


def gaussian_gram(vectors, sigma: float, provenance=None) -> KernelMatrix:
    """Gaussian Gram matrix K_ij = exp(-||v_i - v_j||^2 / (2 sigma^2)).

    The diagonal is set to exactly 1. Provenance records the kernel
    convention along with sigma.
    """
    if sigma <= 0.0:
        raise ValidationError(f"sigma must be positive, got {sigma}")
    x = np.asarray(vectors, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    k = np.exp(-pairwise_sq_dists(x, x) / (2.0 * sigma * sigma))
    np.fill_diagonal(k, 1.0)
    prov = {"kernel": "gaussian", "convention": "exp(-r^2/(2*sigma^2))", "sigma": sigma}
    if provenance:
        prov.update(provenance)
    return KernelMatrix(values=k, provenance=prov)
