"""Vector embeddings, bandwidth heuristic, and the Gaussian Gram matrix."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphtst import (Graph, LabeledGraphDataset, ValidationError, dce_embed,
                      dce_to_graph, dre_embed, gaussian_gram, median_heuristic)
from graphtst.embeddings import KernelMatrix, pairwise_sq_dists


def corresponding_dataset(weight_rows, node_count=3):
    """One triangle-shaped graph per row of upper-triangle weights."""
    graphs = []
    for row in weight_rows:
        graphs.append(dce_to_graph(np.asarray(row, dtype=float), node_count))
    labels = ("a", "a") + ("b",) * (len(graphs) - 2)
    return LabeledGraphDataset(graphs=tuple(graphs), labels=labels,
                               node_correspondence=True)


class TestDce:
    def test_row_major_upper_triangle_order(self):
        # 3 nodes: order must be (0,1), (0,2), (1,2)
        g = Graph(node_count=3, edges=((1, 2), (0, 2), (0, 1)),
                  weights=(30.0, 20.0, 10.0))
        ds = LabeledGraphDataset(graphs=(g,) * 4, labels=("a", "a", "b", "b"),
                                 node_correspondence=True)
        emb = dce_embed(ds)
        assert emb.vectors.shape == (4, 3)
        assert emb.vectors[0].tolist() == [10.0, 20.0, 30.0]

    def test_dimension_is_node_pairs(self):
        # |V| = 177 -> d = 177*176/2 = 15576
        g = Graph(node_count=177, edges=(), weights=())
        ds = LabeledGraphDataset(graphs=(g,) * 4, labels=("a", "a", "b", "b"),
                                 node_correspondence=True)
        assert dce_embed(ds).vectors.shape == (4, 15576)

    def test_requires_node_correspondence(self):
        g = Graph(node_count=3, edges=((0, 1),), weights=(1.0,))
        ds = LabeledGraphDataset(graphs=(g,) * 4, labels=("a", "a", "b", "b"),
                                 node_correspondence=False)
        with pytest.raises(ValidationError, match="correspondence"):
            dce_embed(ds)

    @given(st.lists(st.floats(-10, 10), min_size=6, max_size=6))
    def test_embedding_round_trips_through_graph(self, entries):
        vec = np.asarray(entries)
        g = dce_to_graph(vec, 4)
        ds = LabeledGraphDataset(graphs=(g,) * 4, labels=("a", "a", "b", "b"),
                                 node_correspondence=True)
        assert np.array_equal(dce_embed(ds).vectors[0], vec)


class TestDre:
    def test_hand_distance_example(self):
        # base vectors (0,0,0) and (3,4,0); distance = 5
        ds = corresponding_dataset([[0, 0, 0], [3, 4, 0], [0, 0, 0], [3, 4, 0]])
        emb = dre_embed(ds, prototype_indices=[0])
        assert emb.vectors.shape == (4, 1)
        assert emb.vectors[1, 0] == 5.0
        assert emb.vectors[0, 0] == 0.0

    def test_defaults_to_all_graphs_as_prototypes(self):
        ds = corresponding_dataset([[0, 0, 0], [3, 4, 0], [1, 1, 1], [2, 2, 2]])
        emb = dre_embed(ds)
        assert emb.vectors.shape == (4, 4)
        assert tuple(emb.prototype_indices) == (0, 1, 2, 3)
        assert np.allclose(np.diag(emb.vectors), 0.0)

    def test_rejects_bad_prototype_indices(self):
        ds = corresponding_dataset([[0, 0, 0]] * 4)
        with pytest.raises(ValidationError):
            dre_embed(ds, prototype_indices=[7])
        with pytest.raises(ValidationError):
            dre_embed(ds, prototype_indices=[])


class TestMedianHeuristic:
    def test_odd_count_middle_value(self):
        # 1-D points 0, 1, 3 -> pairwise distances {1, 3, 2} -> median 2
        vectors = np.array([[0.0], [1.0], [3.0]])
        assert median_heuristic(vectors) == 2.0

    def test_even_count_mean_of_middle_two(self):
        # points 0, 1 -> single distance 1... use 4 points for 6 distances
        vectors = np.array([[0.0], [1.0], [4.0], [10.0]])
        # distances: 1, 4, 10, 3, 9, 6 -> sorted 1,3,4,6,9,10 -> (4+6)/2 = 5
        assert median_heuristic(vectors) == 5.0

    def test_degenerate_all_identical_raises(self):
        with pytest.raises(ValidationError, match="degenerate"):
            median_heuristic(np.ones((5, 2)))

    def test_needs_at_least_two_vectors(self):
        with pytest.raises(ValidationError):
            median_heuristic(np.ones((1, 3)))


class TestGaussianGram:
    def test_convention_and_unit_diagonal(self):
        x = np.array([[0.0], [2.0]])
        k = gaussian_gram(x, sigma=2.0)
        # exp(-r^2 / (2 sigma^2)) with r=2, sigma=2 -> exp(-0.5)
        assert k.values[0, 1] == pytest.approx(np.exp(-0.5), rel=1e-15)
        assert k.values[0, 0] == 1.0 and k.values[1, 1] == 1.0

    def test_identical_samples_mmd_value(self):
        # two identical two-point samples: MMD2u = k(x1,x2) - 1
        from graphtst import mmd2u
        x = np.array([[0.0], [1.5]])
        sigma = 1.0
        k = gaussian_gram(np.vstack([x, x]), sigma)
        expected = np.exp(-(1.5 ** 2) / 2.0) - 1.0
        assert mmd2u(k.values, 2, 2) == pytest.approx(expected, rel=1e-12)

    def test_rejects_bad_sigma(self):
        with pytest.raises(ValidationError):
            gaussian_gram(np.zeros((2, 1)), sigma=0.0)

    def test_gram_is_symmetric_psd(self, np_rng):
        x = np_rng.normal(size=(30, 4))
        k = gaussian_gram(x, median_heuristic(x))
        assert np.array_equal(k.values, k.values.T)
        k.check_psd()  # must not raise

    def test_pairwise_distances_match_numpy(self, np_rng):
        x = np_rng.normal(size=(13, 5))
        y = np_rng.normal(size=(7, 5))
        d2 = pairwise_sq_dists(x, y)
        ref = ((x[:, None, :] - y[None, :, :]) ** 2).sum(axis=2)
        assert np.allclose(d2, ref, atol=1e-12)


class TestKernelMatrix:
    def test_rejects_non_square(self):
        with pytest.raises(ValidationError):
            KernelMatrix(values=np.zeros((2, 3)))

    def test_rejects_asymmetry(self):
        with pytest.raises(ValidationError):
            KernelMatrix(values=np.array([[1.0, 0.5], [0.2, 1.0]]))

    def test_check_psd_rejects_indefinite(self):
        k = KernelMatrix(values=np.array([[1.0, 2.0], [2.0, 1.0]]))
        with pytest.raises(ValidationError, match="positive semidefinite"):
            k.check_psd()
