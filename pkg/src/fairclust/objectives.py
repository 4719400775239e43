"""Clustering objectives and their per-point bound coefficients.

Each objective contributes, at the current soft assignment, an
``(n_points, n_clusters)`` matrix of unary potentials that upper-bounds the
objective linearly in the assignment variables:

* K-means: squared Euclidean distances to the mass-weighted cluster means.
* K-median: distances to the weighted medoids (the data point minimizing the
  assignment-weighted sum of distances).
* Normalized Cut: the first-order expansion of the association ratios on an
  affinity graph.

``discrete_objective`` evaluates the plain hard-assignment objective that the
benchmark reports use.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy.spatial.distance import cdist

from .core import AffinityGraph, binarize, hard_labels

logger = logging.getLogger(__name__)

DEFAULT_FLOOR = 1e-10

# Above this size the medoid candidate set is restricted to each cluster's
# hard members, keeping the search O(N^2 / K) per cluster instead of O(N^2).
_EXACT_MEDOID_LIMIT = 2048


def _reseed_empty(potentials, empty, objective):
    """Point a dead cluster at the spot worst served by the live ones.

    ``potentials`` holds distances to the current prototypes; the chosen
    point is the one farthest from its nearest live prototype.
    """
    live = [k for k in range(potentials.shape[1]) if k not in empty]
    if not live:
        raise ValueError("all clusters lost their mass; cannot reseed")
    nearest = potentials[:, live].min(axis=1)
    order = np.argsort(-nearest, kind="stable")
    picks = order[: len(empty)]
    for k, p in zip(sorted(empty), picks):
        logger.warning("%s cluster %d is empty; reseeding at point %d",
                       objective, k, p)
    return picks


def kmeans_potentials(features, soft, marginal_floor=DEFAULT_FLOOR):
    """Squared distances to the mass-weighted cluster means.

    Returns
    -------
    potentials : ndarray of shape (n_points, n_clusters)
    centers : ndarray of shape (n_clusters, n_features)

    Clusters whose total mass falls below ``marginal_floor`` are reseeded to
    the point farthest from its nearest surviving center.
    """
    features = np.asarray(features, dtype=np.float64)
    soft = np.asarray(soft, dtype=np.float64)
    mass = soft.sum(axis=0)
    centers = (soft.T @ features) / np.maximum(mass, marginal_floor)[:, None]
    potentials = cdist(features, centers, metric="sqeuclidean")
    empty = set(np.nonzero(mass < marginal_floor)[0].tolist())
    if empty:
        picks = _reseed_empty(potentials, empty, "kmeans")
        for k, p in zip(sorted(empty), picks):
            centers[k] = features[p]
        potentials = cdist(features, centers, metric="sqeuclidean")
    return potentials, centers


def _weighted_medoids(features, soft, metric, marginal_floor):
    """Index of the weighted medoid of every cluster.

    The medoid of cluster k minimizes ``sum_p soft[p, k] * d(x_p, x_q)`` over
    candidate points q.  On small instances the search is exhaustive over
    all points and all weights; on large ones the candidates are the
    cluster's hard members and the weighted sums drop contributions below
    the mass floor, keeping the search quadratic within the cluster rather
    than in the full point count.
    """
    n_points, n_clusters = soft.shape
    exact = n_points <= _EXACT_MEDOID_LIMIT
    members = hard_labels(soft)
    mass = soft.sum(axis=0)
    medoids = np.full(n_clusters, -1, dtype=np.int64)
    empty = set(np.nonzero(mass < marginal_floor)[0].tolist())
    for k in range(n_clusters):
        if k in empty:
            continue
        if exact:
            candidates = np.arange(n_points)
            support = slice(None)
            weights = soft[:, k]
        else:
            candidates = np.nonzero(members == k)[0]
            if candidates.size == 0:
                empty.add(k)
                continue
            support = np.nonzero(soft[:, k] > marginal_floor)[0]
            weights = soft[support, k]
        support_features = features[support]
        best_cost, best_q = np.inf, -1
        for start in range(0, candidates.size, 512):
            block = candidates[start:start + 512]
            costs = weights @ cdist(support_features, features[block],
                                    metric=metric)
            i = int(np.argmin(costs))
            # strict < keeps the lowest candidate index on cost ties
            if costs[i] < best_cost:
                best_cost, best_q = float(costs[i]), int(block[i])
        medoids[k] = best_q
    return medoids, empty


def kmedian_potentials(features, soft, metric="euclidean",
                       marginal_floor=DEFAULT_FLOOR):
    """Distances to the weighted medoid of every cluster.

    ``metric`` is any metric name accepted by scipy's ``cdist``.

    Returns
    -------
    potentials : ndarray of shape (n_points, n_clusters)
    medoids : ndarray of shape (n_clusters,)
        Indices of the medoid points.
    """
    features = np.asarray(features, dtype=np.float64)
    soft = np.asarray(soft, dtype=np.float64)
    medoids, empty = _weighted_medoids(features, soft, metric, marginal_floor)
    if empty:
        live = medoids >= 0
        if not live.any():
            raise ValueError("all clusters lost their mass; cannot reseed")
        live_dists = cdist(features, features[medoids[live]], metric=metric)
        order = np.argsort(-live_dists.min(axis=1), kind="stable")
        for k, p in zip(sorted(empty), order[: len(empty)]):
            logger.warning("kmedian cluster %d is empty; reseeding at point %d",
                           k, p)
            medoids[k] = p
    potentials = cdist(features, features[medoids], metric=metric)
    return potentials, medoids


def ncut_potentials(graph, soft, marginal_floor=DEFAULT_FLOOR):
    """First-order bound coefficients of the Normalized Cut objective.

    For point p and cluster k::

        degrees[p] * assoc[k] / dmass[k]**2  -  2 * (W @ S)[p, k] / dmass[k]

    where ``assoc[k]`` is the within-cluster affinity mass ``S_k' W S_k`` and
    ``dmass[k]`` the degree-weighted cluster mass, both clamped from below.
    """
    if not isinstance(graph, AffinityGraph):
        raise TypeError("graph must be an AffinityGraph")
    soft = np.asarray(soft, dtype=np.float64)
    if soft.shape[0] != graph.n_points:
        raise ValueError("soft assignment and graph disagree on the number "
                         "of points")
    weights, degrees = graph.weights, graph.degrees
    ws = weights @ soft                                  # (N, K)
    dmass = np.maximum(degrees @ soft, marginal_floor)   # (K,)
    assoc = np.einsum("pk,pk->k", soft, ws)              # S_k' W S_k
    z = assoc / dmass**2
    return degrees[:, None] * z[None, :] - 2.0 * ws / dmass[None, :]


def discrete_objective(problem, labels, metric="euclidean"):
    """Hard-assignment value of the problem's clustering objective.

    K-means sums squared distances to per-cluster means; K-median sums
    distances to per-cluster medoids; Ncut is ``K`` minus the within-cluster
    association ratios.  Empty clusters contribute 0 to the prototype
    objectives and their full unit to Ncut.
    """
    labels = np.asarray(labels)
    n_clusters = problem.n_clusters
    if problem.objective == "ncut":
        graph = problem.graph
        soft = binarize(labels, n_clusters)
        ws = graph.weights @ soft
        dmass = graph.degrees @ soft
        assoc = np.einsum("pk,pk->k", soft, ws)
        nonempty = dmass > 0
        return float(n_clusters - np.sum(assoc[nonempty] / dmass[nonempty]))

    features = problem.features
    total = 0.0
    for k in range(n_clusters):
        members = labels == k
        if not members.any():
            continue
        pts = features[members]
        if problem.objective == "kmeans":
            center = pts.mean(axis=0)
            total += float(np.sum((pts - center) ** 2))
        else:
            dists = cdist(pts, pts, metric=metric)
            total += float(dists.sum(axis=0).min())
    return total
