"""Graph and dataset data model, validation, and file ingestion.

Graphs are simple, undirected, edge-weighted and optionally node-labeled.
Datasets pair one graph per subject with a binary group label ("a"/"b")
and carry a flag saying whether nodes correspond one-to-one across all
graphs (e.g. a shared brain parcellation).

On disk a dataset is a JSON manifest plus one dense adjacency CSV per
subject::

    {"node_correspondence": true,
     "subjects": [{"file": "s000.csv", "label": "a"}, ...]}

Adjacency files are comma-separated floats, one row per line, no header.
File paths are resolved relative to the manifest's directory. A zero
entry means "no edge"; negative weights are legal (correlations can be
negative) and are passed through untouched.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError

LABEL_A = "a"
LABEL_B = "b"
UNIFORM_NODE_LABEL = "_"

# |a_ij - a_ji| above this is treated as a broken (non-symmetric) matrix
SYMMETRY_TOL = 1e-9


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with weighted edges and optional node labels.

    `edges` and `weights` are parallel tuples; endpoints are stored as
    given so that :func:`validate` can report malformed inputs instead of
    silently repairing them. Use :meth:`from_adjacency` for normalized
    construction.
    """

    node_count: int
    edges: tuple[tuple[int, int], ...] = ()
    weights: tuple[float, ...] = ()
    node_labels: tuple[str, ...] | None = None

    @classmethod
    def from_adjacency(cls, matrix, node_labels=None) -> "Graph":
        """Build a graph from a dense symmetric adjacency matrix.

        Edges are the strictly-upper-triangular nonzero entries.
        """
        a = np.asarray(matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError(f"adjacency matrix must be square, got shape {a.shape}")
        if np.max(np.abs(a - a.T), initial=0.0) > SYMMETRY_TOL:
            raise ValidationError("adjacency matrix is non-symmetric")
        n = a.shape[0]
        iu, ju = np.triu_indices(n, k=1)
        mask = a[iu, ju] != 0.0
        edges = tuple((int(i), int(j)) for i, j in zip(iu[mask], ju[mask]))
        weights = tuple(float(w) for w in a[iu, ju][mask])
        labels = tuple(node_labels) if node_labels is not None else None
        return cls(node_count=n, edges=edges, weights=weights, node_labels=labels)

    def adjacency_matrix(self) -> np.ndarray:
        """Dense symmetric adjacency matrix (zeros where no edge)."""
        a = np.zeros((self.node_count, self.node_count))
        for (i, j), w in zip(self.edges, self.weights):
            a[i, j] = w
            a[j, i] = w
        return a

    def labels_or_default(self) -> tuple[str, ...]:
        """Node labels, defaulting to one uniform symbol when absent."""
        if self.node_labels is not None:
            return self.node_labels
        return (UNIFORM_NODE_LABEL,) * self.node_count


def validate(graph: Graph) -> list[str]:
    """Check every Graph invariant; returns all violations (empty = ok).

    Violations are data, not faults: malformed graphs are representable
    and this is the one place that reports them.
    """
    violations = []
    if graph.node_count <= 0:
        violations.append(f"node count must be positive, got {graph.node_count}")
    if len(graph.edges) != len(graph.weights):
        violations.append(
            f"each edge needs exactly one weight: {len(graph.edges)} edges, "
            f"{len(graph.weights)} weights"
        )
    seen = set()
    for i, j in graph.edges:
        if i == j:
            violations.append(f"self-loop at node {i}")
        if not (0 <= i < graph.node_count) or not (0 <= j < graph.node_count):
            violations.append(f"edge ({i},{j}) endpoint out of range")
        key = (min(i, j), max(i, j))
        if key in seen:
            violations.append(f"duplicate edge ({i},{j})")
        seen.add(key)
    if graph.node_labels is not None and len(graph.node_labels) != graph.node_count:
        violations.append(
            f"label arity: {len(graph.node_labels)} labels on a "
            f"{graph.node_count}-node graph"
        )
    return violations


@dataclass(frozen=True)
class LabeledGraphDataset:
    """N graphs with binary labels over {"a", "b"}.

    Sample A is the graphs labeled "a" (size m), sample B those labeled
    "b" (size n). Both samples must have at least two members. When
    `node_correspondence` is set, all graphs share one node set.
    """

    graphs: tuple[Graph, ...]
    labels: tuple[str, ...]
    node_correspondence: bool = False

    def __post_init__(self):
        object.__setattr__(self, "graphs", tuple(self.graphs))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.graphs) != len(self.labels):
            raise ValidationError(
                f"{len(self.graphs)} graphs but {len(self.labels)} labels"
            )
        bad = sorted({y for y in self.labels} - {LABEL_A, LABEL_B})
        if bad:
            raise ValidationError(f"unknown label(s): {bad}")
        m = sum(1 for y in self.labels if y == LABEL_A)
        n = len(self.labels) - m
        if m < 2 or n < 2:
            raise ValidationError(f"need at least 2 graphs per class, got m={m}, n={n}")
        if self.node_correspondence:
            counts = {g.node_count for g in self.graphs}
            if len(counts) > 1:
                raise ValidationError(
                    f"node_correspondence requires equal node counts, got {sorted(counts)}"
                )

    @property
    def size(self) -> int:
        return len(self.graphs)

    @property
    def m(self) -> int:
        return sum(1 for y in self.labels if y == LABEL_A)

    @property
    def n(self) -> int:
        return sum(1 for y in self.labels if y == LABEL_B)


def _is_a(label) -> bool:
    if isinstance(label, str):
        return label == LABEL_A
    return float(label) == 1.0


def _is_b(label) -> bool:
    if isinstance(label, str):
        return label == LABEL_B
    return float(label) == -1.0


def label_indices(labels) -> tuple[np.ndarray, np.ndarray]:
    """Dataset-order index arrays of sample A and sample B.

    Labels are the 'a'/'b' strings of a dataset or their +1/-1 numeric
    equivalents.
    """
    labels = list(labels)
    idx_a = np.array([i for i, y in enumerate(labels) if _is_a(y)], dtype=np.int64)
    idx_b = np.array([i for i, y in enumerate(labels) if _is_b(y)], dtype=np.int64)
    return idx_a, idx_b


def split_by_label(dataset: LabeledGraphDataset):
    """Split into (sample A graphs, sample B graphs), dataset order preserved."""
    idx_a, idx_b = label_indices(dataset.labels)
    sample_a = tuple(dataset.graphs[i] for i in idx_a)
    sample_b = tuple(dataset.graphs[i] for i in idx_b)
    return sample_a, sample_b


def _read_adjacency_csv(path: Path) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError as exc:
                raise ValidationError(f"{path}: cannot parse row: {exc}") from exc
    if not rows:
        raise ValidationError(f"{path}: empty adjacency file")
    width = {len(r) for r in rows}
    if len(width) > 1 or width.pop() != len(rows):
        raise ValidationError(f"{path}: adjacency matrix is not square")
    return np.array(rows, dtype=float)


def load_dataset(manifest_path) -> LabeledGraphDataset:
    """Load a dataset from a JSON manifest plus per-subject adjacency CSVs."""
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise ValidationError(f"manifest not found: {manifest_path}")
    with open(manifest_path, "r", encoding="utf-8") as fh:
        try:
            manifest = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{manifest_path}: invalid JSON: {exc}") from exc
    if "subjects" not in manifest:
        raise ValidationError(f"{manifest_path}: manifest has no 'subjects' entry")

    base = manifest_path.parent
    graphs, labels = [], []
    for entry in manifest["subjects"]:
        label = entry.get("label")
        if label not in (LABEL_A, LABEL_B):
            raise ValidationError(f"unknown label {label!r} for file {entry.get('file')}")
        path = base / entry["file"]
        if not path.exists():
            raise ValidationError(f"adjacency file not found: {path}")
        matrix = _read_adjacency_csv(path)
        if np.max(np.abs(matrix - matrix.T), initial=0.0) > SYMMETRY_TOL:
            raise ValidationError(f"{path}: non-symmetric adjacency matrix")
        graphs.append(Graph.from_adjacency(matrix))
        labels.append(label)

    return LabeledGraphDataset(
        graphs=tuple(graphs),
        labels=tuple(labels),
        node_correspondence=bool(manifest.get("node_correspondence", False)),
    )


def save_dataset(dataset: LabeledGraphDataset, manifest_path) -> Path:
    """Write a dataset as manifest + CSVs; round-trips weights exactly.

    Weights are serialized with `repr`, which is lossless for float64,
    so load(save(d)) reproduces edges and weights bit for bit.
    """
    manifest_path = Path(manifest_path)
    manifest_path.parent.mkdir(parents=True, exist_ok=True)
    subjects = []
    for idx, (graph, label) in enumerate(zip(dataset.graphs, dataset.labels)):
        name = f"subject_{idx:04d}.csv"
        matrix = graph.adjacency_matrix()
        lines = [",".join(repr(float(v)) for v in row) for row in matrix]
        (manifest_path.parent / name).write_text("\n".join(lines) + "\n", encoding="utf-8")
        subjects.append({"file": name, "label": label})
    manifest = {
        "node_correspondence": dataset.node_correspondence,
        "subjects": subjects,
    }
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest_path
