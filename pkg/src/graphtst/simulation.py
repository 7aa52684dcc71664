"""Star-graph simulation for power/size analysis of the two tests.

Each subject is a star graph on d+1 nodes (hub 0, one edge per leaf)
whose d edge weights are drawn from N(0, I) for class a and from
N(delta * 1, I) for class b. Both tests then run on the dimension-wise
embedding with the median-heuristic Gaussian kernel, and rejection
rates at the configured thresholds are aggregated over repetitions:
at delta = 0 the rejection rate is the Type I error, at delta > 0 one
minus the rejection rate is the Type II error.

Every repetition is keyed by (seed, delta index, repetition index), so
results are identical for any worker count and any execution order.
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import rng
from .cbt import DEFAULT_C_GRID, CbtConfig, cbt
from .errors import ValidationError
from .graphs import LABEL_A, LABEL_B, Graph, LabeledGraphDataset
from .ktst import KtstConfig, ktst
from .pipeline import RepresentationConfig, gram_from_dataset

DEFAULT_DELTAS = (0.0, 0.25, 0.5, 0.75, 1.0)
DEFAULT_THETAS = (0.05, 0.01)
KNOWN_TESTS = ("ktst", "cbt")


def star_graph(weights) -> Graph:
    """Star on len(weights)+1 nodes: node 0 is the hub, edge i has weight[i]."""
    weights = tuple(float(w) for w in weights)
    edges = tuple((0, i + 1) for i in range(len(weights)))
    return Graph(node_count=len(weights) + 1, edges=edges, weights=weights)


def gen_star_dataset(d: int, delta: float, m: int, n: int, seed: int,
                     cov=None) -> LabeledGraphDataset:
    """m class-a and n class-b star graphs with Gaussian edge weights.

    Class a weights are N(0, cov), class b N(delta*1, cov); cov defaults
    to the identity. The same seed always produces the same dataset.
    """
    if d < 1:
        raise ValidationError(f"need at least one leaf, got d={d}")
    if m < 2 or n < 2:
        raise ValidationError(f"both classes need at least 2 members, got m={m}, n={n}")
    key = np.uint64(seed % 2**64)
    z = np.empty((m + n) * d)
    rng.normals(rng.derive_key(key, 0), z)
    w = z.reshape(m + n, d)
    if cov is not None:
        cov = np.asarray(cov, dtype=float)
        if cov.shape != (d, d):
            raise ValidationError(f"covariance shape {cov.shape} is not ({d}, {d})")
        w = w @ np.linalg.cholesky(cov).T
    w[m:] += delta
    graphs = tuple(star_graph(row) for row in w)
    labels = (LABEL_A,) * m + (LABEL_B,) * n
    return LabeledGraphDataset(graphs=graphs, labels=labels, node_correspondence=True)


@dataclass(frozen=True)
class SimConfig:
    d: int = 5
    deltas: tuple = DEFAULT_DELTAS
    m: int = 20
    n: int = 20
    repetitions: int = 500
    permutations: int = 1000
    thetas: tuple = DEFAULT_THETAS
    seed: int = 0
    folds: int = 5
    c_grid: tuple = DEFAULT_C_GRID
    convention: str = "greater"
    smooth: bool = False
    tests: tuple = KNOWN_TESTS
    cbt_repetitions: int = 1
    covariance: tuple = None
    workers: int = 1

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValidationError("repetitions must be >= 1")
        if not self.deltas:
            raise ValidationError("need at least one delta")
        if any(t <= 0.0 or t >= 1.0 for t in self.thetas):
            raise ValidationError("thresholds must lie strictly between 0 and 1")
        unknown = [t for t in self.tests if t not in KNOWN_TESTS]
        if unknown:
            raise ValidationError(f"unknown tests: {unknown}")
        if not self.tests:
            raise ValidationError("need at least one test")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")


def paper_scale(config: SimConfig) -> SimConfig:
    """The long-run setting: 1000 repetitions, 10000 permutations."""
    return replace(config, repetitions=1000, permutations=10000)


def _rep_key(seed: int, delta_index: int, rep: int) -> np.uint64:
    return rng.derive_key(rng.derive_key(seed, delta_index), rep)


def _run_one(config: SimConfig, delta: float, key: np.uint64) -> dict:
    dataset = gen_star_dataset(config.d, delta, config.m, config.n,
                               seed=int(key), cov=config.covariance)
    kernel = gram_from_dataset(dataset, RepresentationConfig(method="dce"))
    out = {}
    if "ktst" in config.tests:
        report = ktst(
            kernel,
            KtstConfig(permutations=config.permutations,
                       seed=int(rng.derive_key(key, 1)),
                       convention=config.convention,
                       smooth=config.smooth),
            labels=dataset.labels,
        )
        out["ktst"] = report.p_value
    if "cbt" in config.tests:
        report = cbt(
            kernel,
            CbtConfig(folds=config.folds,
                      c_grid=config.c_grid,
                      repetitions=config.cbt_repetitions,
                      permutations=config.permutations,
                      seed=int(rng.derive_key(key, 2)),
                      convention=config.convention,
                      smooth=config.smooth),
            labels=dataset.labels,
        )
        out["cbt"] = report.p_value
    return out


@dataclass(frozen=True)
class SimulationReport:
    config: SimConfig
    p_values: dict  # test name -> (len(deltas), repetitions) array

    def rejection_rate(self, test: str, delta_index: int, theta: float) -> float:
        p = self.p_values[test][delta_index]
        return float((p < theta).mean())

    def error_rate(self, test: str, delta_index: int, theta: float) -> float:
        """Type I error at delta = 0, Type II error otherwise."""
        rate = self.rejection_rate(test, delta_index, theta)
        if self.config.deltas[delta_index] == 0.0:
            return rate
        return 1.0 - rate

    def table_rows(self) -> list:
        rows = []
        for di, delta in enumerate(self.config.deltas):
            row = {
                "delta": float(delta),
                "error_type": "type_i" if delta == 0.0 else "type_ii",
            }
            for theta in self.config.thetas:
                for test in KNOWN_TESTS:
                    col = f"{test}@{theta:g}"
                    if test in self.p_values:
                        row[col] = self.error_rate(test, di, theta)
                    else:
                        row[col] = None
            rows.append(row)
        return rows

    def to_csv_text(self) -> str:
        cols = [f"{test}@{theta:g}"
                for theta in self.config.thetas for test in KNOWN_TESTS]
        lines = [",".join(["delta", "error_type"] + cols)]
        for row in self.table_rows():
            cells = [f"{row['delta']:g}", row["error_type"]]
            for col in cols:
                cells.append("" if row[col] is None else repr(row[col]))
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        cfg = {
            "d": self.config.d,
            "deltas": [float(v) for v in self.config.deltas],
            "m": self.config.m,
            "n": self.config.n,
            "repetitions": self.config.repetitions,
            "permutations": self.config.permutations,
            "thetas": [float(v) for v in self.config.thetas],
            "seed": self.config.seed,
            "folds": self.config.folds,
            "c_grid": [float(v) for v in self.config.c_grid],
            "convention": self.config.convention,
            "smooth": self.config.smooth,
            "tests": list(self.config.tests),
            "cbt_repetitions": self.config.cbt_repetitions,
            "covariance": (None if self.config.covariance is None
                           else [list(map(float, r)) for r in self.config.covariance]),
        }
        return {
            "config": cfg,
            "table": self.table_rows(),
            "p_values": {test: [[float(v) for v in row] for row in arr]
                         for test, arr in sorted(self.p_values.items())},
        }

    def save(self, json_path=None, csv_path=None) -> None:
        if json_path is not None:
            Path(json_path).write_text(
                json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n",
                encoding="utf-8",
            )
        if csv_path is not None:
            Path(csv_path).write_text(self.to_csv_text(), encoding="utf-8")


def run_error_experiment(config: SimConfig = SimConfig()) -> SimulationReport:
    """Run the full grid of deltas x repetitions and aggregate error rates.

    Worker threads only change wall time: repetition (delta_index, rep)
    always uses the key derive(derive(seed, delta_index), rep).
    """
    n_d = len(config.deltas)
    p_values = {test: np.empty((n_d, config.repetitions))
                for test in config.tests}
    jobs = [(di, r) for di in range(n_d) for r in range(config.repetitions)]

    def run(job):
        di, r = job
        return _run_one(config, float(config.deltas[di]),
                        _rep_key(config.seed, di, r))

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]
    for (di, r), res in zip(jobs, results):
        for test in config.tests:
            p_values[test][di, r] = res[test]
    return SimulationReport(config=config, p_values=p_values)
