"""KL fairness penalty, its per-cluster marginals and its tight upper bound.

The penalty measures, for every cluster, how far the demographic mix inside
the cluster is from the required target proportions.  Because the penalty is
a sum of a concave and a convex part in the assignment variables, it admits a
linear-plus-entropy upper bound whose per-point coefficients are computed by
:func:`fairness_bound_potentials`; the solver adds those coefficients to the
clustering potentials and minimizes both in closed form.
"""

from __future__ import annotations

import numpy as np

from .core import DemographicPartition

DEFAULT_FLOOR = 1e-10


def _masses(soft, demo, floor):
    """Cluster masses (K,) clamped from below and raw group masses (J, K).

    Group masses stay raw here so an empty cluster yields near-zero
    marginals; the log clamps downstream then price an empty cluster at
    ``-log(floor)`` per group instead of letting it masquerade as fair.
    """
    group_mass = demo.indicators @ soft
    cluster_mass = np.maximum(group_mass.sum(axis=0), floor)
    return cluster_mass, group_mass


def cluster_marginals(soft, demo, marginal_floor=DEFAULT_FLOOR):
    """Demographic proportions within each cluster.

    Parameters
    ----------
    soft : ndarray of shape (n_points, n_clusters)
        Row-stochastic soft assignment.
    demo : DemographicPartition
    marginal_floor : float
        Lower clamp on the cluster mass so the shares stay finite when a
        cluster carries no mass (its row then sits near zero).

    Returns
    -------
    ndarray of shape (n_clusters, n_groups)
        Entry (k, j) is the share of group j within cluster k.
    """
    soft = np.asarray(soft, dtype=np.float64)
    if soft.shape[0] != demo.n_points:
        raise ValueError(
            f"soft assignment has {soft.shape[0]} rows but the demographic "
            f"partition covers {demo.n_points} points"
        )
    cluster_mass, group_mass = _masses(soft, demo, marginal_floor)
    return (group_mass / cluster_mass).T


def kl_divergence(u, p, marginal_floor=DEFAULT_FLOOR):
    """Kullback-Leibler divergence between two points on the simplex.

    ``0 * log 0`` terms contribute nothing; entries of ``p`` are clamped at
    ``marginal_floor`` before the log.
    """
    u = np.asarray(u, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    for name, vec in (("u", u), ("p", p)):
        if abs(vec.sum() - 1.0) > 1e-9 or np.any(vec < -1e-12):
            raise ValueError(f"{name} must lie on the probability simplex")
    p = np.maximum(p, marginal_floor)
    pos = u > 0
    return float(np.sum(u[pos] * np.log(u[pos] / p[pos])))


def fairness_error(soft, demo, marginal_floor=DEFAULT_FLOOR):
    """Sum over clusters of the KL divergence from the target proportions.

    Zero exactly when every cluster's demographic mix equals the targets.
    """
    marg = cluster_marginals(soft, demo, marginal_floor)
    u = demo.targets
    ratios = u[None, :] / np.maximum(marg, marginal_floor)
    return float(np.sum(u[None, :] * np.log(ratios)))


def fairness_penalty(soft, demo, marginal_floor=DEFAULT_FLOOR):
    """Cross-entropy form of the fairness term.

    Equals :func:`fairness_error` plus the constant ``n_clusters *
    entropy(targets)``, which is what the solver actually minimizes.
    """
    marg = cluster_marginals(soft, demo, marginal_floor)
    u = demo.targets
    return float(-np.sum(u[None, :] * np.log(np.maximum(marg, marginal_floor))))


def fairness_penalty_gradient(soft, demo, marginal_floor=DEFAULT_FLOOR):
    """Gradient of :func:`fairness_penalty` w.r.t. every soft entry."""
    return fairness_bound_potentials(soft, demo, lipschitz_L=1.0,
                                     marginal_floor=marginal_floor)


def fairness_bound_potentials(soft, demo, lipschitz_L=2.0,
                              marginal_floor=DEFAULT_FLOOR):
    """Per-point, per-cluster coefficients of the fairness upper bound.

    For point p (in group g) and cluster k the coefficient is::

        (1 / L) * (1 / cluster_mass[k] - targets[g] / group_mass[g, k])

    using the current, clamped masses.  With a single demographic group the
    coefficients vanish identically.  ``L`` is the smoothness constant of the
    bound: scaled down, the same matrix is the exact penalty gradient
    (``L = 1``).

    Returns
    -------
    ndarray of shape (n_points, n_clusters)
    """
    soft = np.asarray(soft, dtype=np.float64)
    if soft.shape[0] != demo.n_points:
        raise ValueError("soft assignment and demographic partition disagree "
                         "on the number of points")
    cluster_mass, group_mass = _masses(soft, demo, marginal_floor)
    group_mass = np.maximum(group_mass, marginal_floor)
    # targets[g] / group_mass[g, k], gathered per point through its group
    group_term = (demo.targets[:, None] / group_mass)[demo.group_of, :]
    return (1.0 / cluster_mass[None, :] - group_term) / lipschitz_L
