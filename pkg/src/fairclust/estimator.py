"""Scikit-learn style estimator wrapping the fair-clustering solver."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .core import ClusteringProblem, DemographicPartition, SolverConfig
from .datasets import kmeanspp_seed, knn_affinity
from .solver import solve


class FairClustering(ClusterMixin, BaseEstimator):
    """Fair clustering with a tunable fairness/quality trade-off.

    Minimizes a K-means, K-median or Normalized-Cut objective plus
    ``trade_off`` times a KL divergence between each cluster's demographic
    mix and the target proportions.  Follows the scikit-learn estimator
    protocol (``get_params`` / ``set_params`` / ``fit_predict``); the
    demographic group of every sample is passed to :meth:`fit` via the
    ``groups`` keyword.

    Parameters
    ----------
    n_clusters : int, default=2
    objective : {"kmeans", "kmedian", "ncut"}, default="kmeans"
        With "ncut" a binary k-NN affinity graph is built from ``X``.
    trade_off : float, default=10.0
        Weight of the fairness penalty; 0 recovers the plain objective.
    target_proportions : array-like, optional
        Required demographic mix of every cluster; defaults to the empirical
        group proportions.
    knn : int, default=20
        Neighbor count for the "ncut" affinity graph.
    lipschitz : float, default=2.0
        Smoothness constant of the fairness bound.
    random_state : int, default=0
        Seed of the k-means++ initialization.

    Attributes
    ----------
    labels_ : ndarray of shape (n_samples,)
    probabilities_ : ndarray of shape (n_samples, n_clusters)
        Final soft assignment.
    energy_trace_ : ndarray
        One row (iteration, total, clustering, fairness) per outer iteration.
    fairness_error_, min_balance_, discrete_objective_ : float
    result_ : SolveResult

    Notes
    -----
    No feature scaling happens here; compose with a scaler when needed.
    """

    def __init__(self, n_clusters=2, objective="kmeans", trade_off=10.0,
                 target_proportions=None, knn=20, lipschitz=2.0,
                 inner_tol=1e-6, outer_tol=1e-6, max_inner=1000,
                 max_outer=100, marginal_floor=1e-10, random_state=0):
        self.n_clusters = n_clusters
        self.objective = objective
        self.trade_off = trade_off
        self.target_proportions = target_proportions
        self.knn = knn
        self.lipschitz = lipschitz
        self.inner_tol = inner_tol
        self.outer_tol = outer_tol
        self.max_inner = max_inner
        self.max_outer = max_outer
        self.marginal_floor = marginal_floor
        self.random_state = random_state

    def fit(self, X, y=None, groups=None):
        """Cluster ``X`` under the fairness penalty.

        Parameters
        ----------
        X : array-like of shape (n_samples, n_features)
        y : ignored
        groups : array-like of shape (n_samples,)
            Demographic group index of every sample.  Required.
        """
        X = check_array(X, dtype=np.float64)
        if groups is None:
            raise ValueError("fit requires the demographic `groups` of every "
                             "sample")
        groups = np.asarray(groups, dtype=np.int64)
        if groups.shape != (X.shape[0],):
            raise ValueError("groups must have one entry per sample")
        demo = DemographicPartition.from_group_labels(
            groups, targets=self.target_proportions)

        graph = knn_affinity(X, self.knn) if self.objective == "ncut" else None
        problem = ClusteringProblem(
            objective=self.objective,
            n_clusters=self.n_clusters,
            trade_off=self.trade_off,
            features=None if self.objective == "ncut" else X,
            graph=graph,
        )
        config = SolverConfig(
            lipschitz_L=self.lipschitz,
            inner_tol=self.inner_tol,
            outer_tol=self.outer_tol,
            max_inner=self.max_inner,
            max_outer=self.max_outer,
            rng_seed=self.random_state,
            marginal_floor=self.marginal_floor,
        )
        init = kmeanspp_seed(X, self.n_clusters, seed=self.random_state)
        result = solve(problem, demo, init, config)

        self.result_ = result
        self.labels_ = result.labels
        self.probabilities_ = result.soft
        self.energy_trace_ = result.energy_trace
        self.fairness_error_ = result.metrics["fairness_error"]
        self.min_balance_ = result.metrics["min_balance"]
        self.discrete_objective_ = result.metrics["discrete_objective"]
        self.n_iter_ = result.iterations_used["outer"]
        if self.objective == "kmeans":
            self.cluster_centers_ = np.vstack([
                X[result.labels == k].mean(axis=0)
                if np.any(result.labels == k) else np.full(X.shape[1], np.nan)
                for k in range(self.n_clusters)])
        elif self.objective == "kmedian":
            self.cluster_centers_ = self._hard_medoids(X, result.labels)
        return self

    def _hard_medoids(self, X, labels):
        from scipy.spatial.distance import cdist

        centers = np.full((self.n_clusters, X.shape[1]), np.nan)
        for k in range(self.n_clusters):
            pts = X[labels == k]
            if pts.size:
                centers[k] = pts[cdist(pts, pts).sum(axis=0).argmin()]
        return centers

    def fit_predict(self, X, y=None, groups=None):
        return self.fit(X, y, groups=groups).labels_

    def predict(self, X):
        """Assign new samples to the nearest learned prototype.

        Only available for the prototype objectives.
        """
        check_is_fitted(self, "labels_")
        if self.objective == "ncut":
            raise RuntimeError("predict is not available for the graph "
                               "objective; use fit_predict")
        from scipy.spatial.distance import cdist

        X = check_array(X, dtype=np.float64)
        metric = "sqeuclidean" if self.objective == "kmeans" else "euclidean"
        dists = cdist(X, self.cluster_centers_, metric=metric)
        return np.argmin(np.where(np.isnan(dists), np.inf, dists), axis=1)
