"""Graph kernels that need no node correspondence: WL subtree and shortest-path.

Both operate on discrete (unweighted) structure, so weighted graphs are
first thresholded: an edge survives iff |weight| >= t. There is no
silent default threshold for weighted inputs; t = 0 is only appropriate
for graphs that are already binary.

The Weisfeiler-Lehman subtree kernel counts compressed relabeling
patterns. At each iteration every node's signature is (own label,
sorted multiset of neighbor labels); signatures map to fresh compressed
labels through one dictionary shared across all graphs, assigned in
sorted signature order so the numbering never depends on graph order or
scheduling. The kernel value sums the per-iteration count inner
products for iterations 0..h.

The shortest-path kernel counts triples (label_u, label_v, hop distance)
over unordered node pairs with a finite distance, and takes inner
products of the counts (a Dirac comparison, which is why hop counts are
used rather than real-valued path lengths).
"""

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .embeddings import KernelMatrix
from .graphs import Graph


@dataclass(frozen=True)
class DiscreteGraph:
    """Simple undirected graph with total node labels and unweighted edges."""

    node_count: int
    node_labels: tuple[str, ...]
    edges: tuple[tuple[int, int], ...]

    def neighbor_lists(self) -> list[list[int]]:
        adj = [[] for _ in range(self.node_count)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return adj


@dataclass(frozen=True)
class KernelConfig:
    """Parameters for the discrete graph kernels."""

    wl_iterations: int = 3
    edge_threshold: float | None = None
    normalize: bool = False

    def __post_init__(self):
        if self.wl_iterations < 0:
            raise ValidationError(f"wl_iterations must be >= 0, got {self.wl_iterations}")


def discretize(graph: Graph, edge_threshold: float = None) -> DiscreteGraph:
    """Keep exactly the edges with |weight| >= threshold; drop the weights.

    With no threshold every edge survives, which is only sensible for
    graphs that are already binary.
    """
    if edge_threshold is None:
        kept = tuple((min(i, j), max(i, j)) for i, j in graph.edges)
    else:
        kept = tuple(
            (min(i, j), max(i, j))
            for (i, j), w in zip(graph.edges, graph.weights)
            if abs(w) >= edge_threshold
        )
    return DiscreteGraph(
        node_count=graph.node_count,
        node_labels=graph.labels_or_default(),
        edges=kept,
    )


def _wl_feature_counts(graphs, h: int) -> list[list[Counter]]:
    """Per-graph list of per-iteration Counter feature vectors.

    Iteration 0 uses the original labels; each later iteration relabels
    every node by its compressed signature. Compressed ids are assigned
    per iteration in sorted signature order (canonical, scheduling-free).
    """
    alphabet = sorted({lab for g in graphs for lab in g.node_labels})
    to_id = {lab: i for i, lab in enumerate(alphabet)}
    node_ids = [np.array([to_id[lab] for lab in g.node_labels]) for g in graphs]
    adjacency = [g.neighbor_lists() for g in graphs]

    features = [[Counter(ids.tolist())] for ids in node_ids]
    for _ in range(h):
        signatures = []
        for ids, adj in zip(node_ids, adjacency):
            signatures.append(
                [(int(ids[v]), tuple(sorted(int(ids[u]) for u in adj[v])))
                 for v in range(len(ids))]
            )
        compress = {sig: k for k, sig in enumerate(sorted({s for per in signatures for s in per}))}
        node_ids = [np.array([compress[s] for s in per]) for per in signatures]
        for per_graph, ids in zip(features, node_ids):
            per_graph.append(Counter(ids.tolist()))
    return features


def _counts_gram(features) -> np.ndarray:
    """Gram matrix of summed inner products between Counter lists."""
    n = len(features)
    k = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            total = 0
            for fi, fj in zip(features[i], features[j]):
                small, large = (fi, fj) if len(fi) <= len(fj) else (fj, fi)
                total += sum(c * large[key] for key, c in small.items() if key in large)
            k[i, j] = k[j, i] = float(total)
    return k


def wl_kernel_matrix(graphs, h: int = 3) -> KernelMatrix:
    """Weisfeiler-Lehman subtree kernel Gram matrix for iterations 0..h."""
    graphs = list(graphs)
    if h < 0:
        raise ValidationError(f"h must be >= 0, got {h}")
    k = _counts_gram(_wl_feature_counts(graphs, h))
    return KernelMatrix(values=k, provenance={"kernel": "wl", "h": h})


def _sp_distances(graph: DiscreteGraph) -> np.ndarray:
    """All-pairs shortest hop counts via Floyd-Warshall; inf = unreachable."""
    n = graph.node_count
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for i, j in graph.edges:
        dist[i, j] = dist[j, i] = 1.0
    for k in range(n):
        dist = np.minimum(dist, dist[:, k, None] + dist[None, k, :])
    return dist


def sp_feature_counts(graph: DiscreteGraph) -> Counter:
    """Counts of (label_u, label_v, distance) with unordered endpoints."""
    dist = _sp_distances(graph)
    labels = graph.node_labels
    counts = Counter()
    for u in range(graph.node_count):
        for v in range(u + 1, graph.node_count):
            if np.isfinite(dist[u, v]):
                la, lb = sorted((labels[u], labels[v]))
                counts[(la, lb, int(dist[u, v]))] += 1
    return counts


def sp_kernel_matrix(graphs) -> KernelMatrix:
    """Shortest-path kernel Gram matrix (Dirac comparison of path triples)."""
    features = [[sp_feature_counts(g)] for g in graphs]
    k = _counts_gram(features)
    return KernelMatrix(values=k, provenance={"kernel": "sp"})


def normalize_gram(kernel: KernelMatrix) -> KernelMatrix:
    """Cosine normalization K'_ij = K_ij / sqrt(K_ii K_jj); unit diagonal."""
    diag = np.diag(kernel.values).copy()
    if np.any(diag <= 0.0):
        raise ValidationError("cannot normalize: zero or negative diagonal entry")
    scale = 1.0 / np.sqrt(diag)
    values = kernel.values * np.outer(scale, scale)
    np.fill_diagonal(values, 1.0)
    provenance = dict(kernel.provenance)
    provenance["normalized"] = True
    return KernelMatrix(values=values, provenance=provenance)
