"""Discrete fairness metrics over hard cluster labels."""

from __future__ import annotations

import logging

import numpy as np

logger = logging.getLogger(__name__)


def cluster_balance(labels, demo, cluster):
    """Worst pairwise group-count ratio inside one cluster, in [0, 1].

    Equals 1 only when every group has the same count in the cluster and 0
    as soon as any group is absent.  An empty cluster has balance 0.
    """
    labels = np.asarray(labels)
    members = labels == cluster
    if not members.any():
        logger.warning("cluster %d is empty; balance reported as 0", cluster)
        return 0.0
    counts = np.bincount(demo.group_of[members], minlength=demo.n_groups)
    if counts.min() == 0:
        return 0.0
    return float(counts.min() / counts.max())


def min_balance(labels, demo, n_clusters=None):
    """Minimum of :func:`cluster_balance` over all clusters."""
    labels = np.asarray(labels)
    if n_clusters is None:
        n_clusters = int(labels.max()) + 1
    return min(cluster_balance(labels, demo, k) for k in range(n_clusters))
