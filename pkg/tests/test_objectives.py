import itertools
import logging

import numpy as np
import scipy.sparse as sp
from numpy.testing import assert_allclose, assert_array_equal

from fairclust import (
    AffinityGraph,
    ClusteringProblem,
    binarize,
    discrete_objective,
    kmeans_potentials,
    kmedian_potentials,
    ncut_potentials,
)

from conftest import random_simplex_rows


class TestKMeansPotentials:
    def test_point_at_centroid_has_zero_potential(self):
        features = np.array([[1.0, 1.0], [3.0, 3.0]])
        soft = binarize([0, 1], 2)
        pots, centers = kmeans_potentials(features, soft)
        assert_allclose(centers, features)
        assert_allclose(np.diag(pots), [0.0, 0.0])

    def test_one_dimensional_pair(self):
        features = np.array([[0.0], [2.0]])
        soft = np.ones((2, 1))
        pots, centers = kmeans_potentials(features, soft)
        assert_allclose(centers, [[1.0]])
        assert_allclose(pots, [[1.0], [1.0]])

    def test_six_point_soft_weights_match_direct_summation(
            self, six_point_instance):
        features, soft, _ = six_point_instance
        pots, centers = kmeans_potentials(features, soft)
        for k in range(2):
            mass = soft[:, k].sum()
            expected_center = sum(soft[p, k] * features[p]
                                  for p in range(6)) / mass
            assert_allclose(centers[k], expected_center, atol=1e-12)
            for p in range(6):
                assert_allclose(pots[p, k],
                                np.sum((features[p] - expected_center) ** 2),
                                atol=1e-12)

    def test_empty_cluster_reseeds_to_farthest_point(self, caplog):
        features = np.array([[0.0, 0.0], [0.1, 0.0], [5.0, 5.0]])
        soft = np.array([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
        with caplog.at_level(logging.WARNING):
            pots, centers = kmeans_potentials(features, soft)
        assert "reseeding" in caplog.text
        assert_allclose(centers[1], [5.0, 5.0])
        assert pots[2, 1] == 0.0


class TestKMedianPotentials:
    def test_three_point_line_picks_middle(self):
        features = np.array([[0.0], [1.0], [10.0]])
        soft = np.ones((3, 1))
        pots, medoids = kmedian_potentials(features, soft)
        # exhaustive check: distance sums are 11, 10, 19
        sums = [np.abs(features - features[q]).sum() for q in range(3)]
        assert int(np.argmin(sums)) == 1
        assert medoids[0] == 1
        assert_allclose(pots[:, 0], [1.0, 0.0, 9.0])

    def test_single_point_cluster(self):
        features = np.array([[2.0, 2.0], [7.0, 7.0]])
        soft = binarize([0, 1], 2)
        pots, medoids = kmedian_potentials(features, soft)
        assert_array_equal(medoids, [0, 1])
        assert pots[1, 1] == 0.0

    def test_weight_split_duplication_invariance(self, rng):
        # duplicating a non-medoid point and splitting its weight does not
        # move the medoid
        features = rng.normal(size=(8, 2))
        weights = rng.uniform(0.5, 1.0, size=8)
        soft = weights[:, None]
        _, medoid = kmedian_potentials(features, soft / soft.sum() * 8)
        dup = 0 if medoid[0] != 0 else 1
        features2 = np.vstack([features, features[dup]])
        weights2 = np.append(weights, weights[dup] / 2)
        weights2[dup] /= 2
        soft2 = weights2[:, None]
        _, medoid2 = kmedian_potentials(features2, soft2)
        assert_allclose(features2[medoid2[0]], features[medoid[0]])

    def test_matches_exhaustive_weighted_search(self, six_point_instance):
        features, soft, _ = six_point_instance
        _, medoids = kmedian_potentials(features, soft)
        dists = np.sqrt(((features[:, None, :]
                          - features[None, :, :]) ** 2).sum(-1))
        for k in range(2):
            costs = [soft[:, k] @ dists[:, q] for q in range(6)]
            assert medoids[k] == int(np.argmin(costs))


def dense_ncut_potentials(weights, soft):
    """Direct dense evaluation of the graph bound coefficients."""
    weights = np.asarray(weights, dtype=float)
    degrees = weights.sum(axis=1)
    n, k = soft.shape
    out = np.zeros((n, k))
    for c in range(k):
        col = soft[:, c]
        dmass = degrees @ col
        z = col @ weights @ col / dmass**2
        for p in range(n):
            out[p, c] = degrees[p] * z - 2 * (weights[p] @ col) / dmass
    return out


def two_cliques_graph():
    dense = np.zeros((8, 8))
    for block in (slice(0, 4), slice(4, 8)):
        dense[block, block] = 1.0
    np.fill_diagonal(dense, 0.0)
    return dense


class TestNcutPotentials:
    def test_disconnected_cliques_match_dense_oracle(self):
        dense = two_cliques_graph()
        graph = AffinityGraph(weights=sp.csr_matrix(dense))
        soft = binarize([0] * 4 + [1] * 4, 2)
        got = ncut_potentials(graph, soft)
        assert_allclose(got, dense_ncut_potentials(dense, soft), atol=1e-12)
        # own-cluster coefficients are negative: d_p/mass - 2 d_p/mass
        assert np.all(got[np.arange(8), [0] * 4 + [1] * 4] < 0)

    def test_argmin_invariant_under_uniform_scaling(self, rng):
        dense = rng.uniform(0.0, 1.0, size=(10, 10))
        dense = (dense + dense.T) / 2
        np.fill_diagonal(dense, 0.0)
        soft = random_simplex_rows(rng, 10, 3)
        base = dense_ncut_potentials(dense, soft)
        scaled = dense_ncut_potentials(7.3 * dense, soft)
        graph = AffinityGraph(weights=sp.csr_matrix(dense))
        assert_allclose(ncut_potentials(graph, soft), base, atol=1e-12)
        assert_array_equal(np.argmin(base, axis=1), np.argmin(scaled, axis=1))

    def test_single_cluster_identity(self, rng):
        dense = rng.uniform(0.1, 1.0, size=(9, 9))
        dense = (dense + dense.T) / 2
        np.fill_diagonal(dense, 0.0)
        graph = AffinityGraph(weights=sp.csr_matrix(dense))
        soft = random_simplex_rows(rng, 9, 1)  # all ones
        pots = ncut_potentials(graph, soft)
        col = soft[:, 0]
        dmass = dense.sum(axis=1) @ col
        assoc = col @ dense @ col
        # sum_p s_p a_p collapses to minus the association ratio
        assert_allclose(np.sum(soft * pots), -assoc / dmass, atol=1e-10)


class TestDiscreteObjective:
    def test_ncut_zero_for_matching_components(self):
        dense = two_cliques_graph()
        problem = ClusteringProblem(
            objective="ncut", n_clusters=2, trade_off=0.0,
            graph=AffinityGraph(weights=sp.csr_matrix(dense)))
        labels = np.array([0] * 4 + [1] * 4)
        assert_allclose(discrete_objective(problem, labels), 0.0, atol=1e-12)

    def test_kmeans_zero_for_identical_points(self):
        problem = ClusteringProblem(objective="kmeans", n_clusters=2,
                                    trade_off=0.0, features=np.ones((5, 3)))
        assert discrete_objective(problem, np.array([0, 0, 1, 1, 1])) == 0.0

    def test_kmeans_all_labelings_match_enumeration_oracle(self):
        features = np.array([[0.0], [1.0], [2.5], [6.0], [6.5]])
        problem = ClusteringProblem(objective="kmeans", n_clusters=2,
                                    trade_off=0.0, features=features)

        def oracle(labels):
            total = 0.0
            for k in (0, 1):
                pts = features[np.asarray(labels) == k]
                if pts.size:
                    total += np.sum((pts - pts.mean(axis=0)) ** 2)
            return total

        values, oracle_values = [], []
        for labels in itertools.product([0, 1], repeat=5):
            got = discrete_objective(problem, np.array(labels))
            assert_allclose(got, oracle(labels), atol=1e-12)
            values.append(got)
            oracle_values.append(oracle(labels))
        assert_allclose(min(values), min(oracle_values), atol=1e-12)

    def test_empty_cluster_conventions(self):
        features = np.array([[0.0], [1.0]])
        problem = ClusteringProblem(objective="kmeans", n_clusters=3,
                                    trade_off=0.0, features=features)
        # clusters 1, 2 unused: contribute nothing
        assert_allclose(discrete_objective(problem, np.array([0, 0])), 0.5)

        dense = two_cliques_graph()
        graph_problem = ClusteringProblem(
            objective="ncut", n_clusters=3, trade_off=0.0,
            graph=AffinityGraph(weights=sp.csr_matrix(dense)))
        labels = np.array([0] * 4 + [1] * 4)
        # the empty third cluster contributes its full unit
        assert_allclose(discrete_objective(graph_problem, labels), 1.0,
                        atol=1e-12)

    def test_ncut_in_unit_range(self, rng):
        dense = rng.uniform(0.05, 1.0, size=(12, 12))
        dense = (dense + dense.T) / 2
        np.fill_diagonal(dense, 0.0)
        problem = ClusteringProblem(
            objective="ncut", n_clusters=3, trade_off=0.0,
            graph=AffinityGraph(weights=sp.csr_matrix(dense)))
        for _ in range(50):
            labels = rng.integers(0, 3, size=12)
            value = discrete_objective(problem, labels)
            assert -1e-12 <= value <= 3 + 1e-12


class TestBoundProperties:
    def test_prototype_potentials_dominate_refit_objective(self, rng):
        # linearizing at the current prototypes can never undercut the
        # objective evaluated with prototypes re-fit to the new assignment
        for _ in range(25):
            n = int(rng.integers(6, 21))
            features = rng.normal(size=(n, 2))
            current = random_simplex_rows(rng, n, 3)
            candidate = random_simplex_rows(rng, n, 3)
            for kind in ("kmeans", "kmedian"):
                if kind == "kmeans":
                    pots, _ = kmeans_potentials(features, current)
                    refit, _ = kmeans_potentials(features, candidate)
                else:
                    pots, _ = kmedian_potentials(features, current)
                    refit, _ = kmedian_potentials(features, candidate)
                bound = np.sum(candidate * pots)
                objective = np.sum(candidate * refit)
                assert bound >= objective - 1e-9

    def test_ncut_first_order_bound_for_psd_affinity(self, rng):
        # for a PSD affinity matrix (a Gram matrix of nonnegative factors,
        # which keeps its diagonal) the association-ratio objective is
        # concave, so its linearization at any point is an upper bound
        for _ in range(25):
            n = 10
            g = rng.uniform(0.0, 1.0, size=(n, n))
            dense = g @ g.T
            current = random_simplex_rows(rng, n, 2, alpha=3.0)
            candidate = random_simplex_rows(rng, n, 2, alpha=3.0)
            pots = dense_ncut_potentials(dense, current)

            def relaxed(soft):
                degrees = dense.sum(axis=1)
                total = 0.0
                for k in range(2):
                    col = soft[:, k]
                    total += col @ dense @ col / (degrees @ col)
                return 2 - total

            lhs = relaxed(candidate)
            rhs = relaxed(current) + np.sum(pots * (candidate - current))
            assert lhs <= rhs + 1e-9
