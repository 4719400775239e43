"""Shared domain types and validation helpers.

Soft cluster assignments are plain ``(n_points, n_clusters)`` float arrays in
which every row is a point on the probability simplex.  The helpers here
validate that contract and convert between soft assignments and hard labels.
Cluster labels and demographic-group indices are 0-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

SIMPLEX_ATOL = 1e-9


def check_soft_assignment(soft, atol=SIMPLEX_ATOL):
    """Validate a soft assignment matrix and return it as float64.

    Every entry must lie in [0, 1] (within ``atol``) and every row must sum
    to 1 within ``atol``.
    """
    soft = np.asarray(soft, dtype=np.float64)
    if soft.ndim != 2:
        raise ValueError(f"soft assignment must be 2-D, got shape {soft.shape}")
    if np.any(soft < -atol) or np.any(soft > 1 + atol):
        raise ValueError("soft assignment entries must lie in [0, 1]")
    row_sums = soft.sum(axis=1)
    bad = np.abs(row_sums - 1.0) > atol
    if np.any(bad):
        p = int(np.argmax(bad))
        raise ValueError(
            f"soft assignment row {p} sums to {row_sums[p]!r}, expected 1"
        )
    return soft


def hard_labels(soft):
    """Per-point argmax labels; ties break toward the lowest cluster index."""
    soft = np.asarray(soft)
    return np.argmax(soft, axis=1)


def binarize(labels, n_clusters):
    """One-hot soft assignment sitting at the simplex vertices.

    Raises
    ------
    ValueError
        If any label falls outside ``{0, ..., n_clusters - 1}``.
    """
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ValueError("labels must be 1-D")
    if labels.size and (labels.min() < 0 or labels.max() >= n_clusters):
        raise ValueError(
            f"labels must lie in [0, {n_clusters - 1}], got range "
            f"[{labels.min()}, {labels.max()}]"
        )
    soft = np.zeros((labels.size, n_clusters), dtype=np.float64)
    soft[np.arange(labels.size), labels] = 1.0
    return soft


@dataclass(frozen=True)
class DemographicPartition:
    """Partition of the points into demographic groups plus target proportions.

    Parameters
    ----------
    group_of : ndarray of shape (n_points,)
        0-based group index of every point.  The groups must partition the
        point set (every point belongs to exactly one group).
    targets : ndarray of shape (n_groups,)
        Required group proportions within every cluster.  Must be strictly
        positive and sum to 1.
    """

    group_of: np.ndarray
    targets: np.ndarray
    indicators: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        group_of = np.asarray(self.group_of, dtype=np.int64)
        targets = np.asarray(self.targets, dtype=np.float64)
        if group_of.ndim != 1:
            raise ValueError("group_of must be 1-D")
        if targets.ndim != 1:
            raise ValueError("targets must be 1-D")
        n_groups = targets.size
        if group_of.size == 0:
            raise ValueError("empty demographic partition")
        if group_of.min() < 0 or group_of.max() >= n_groups:
            raise ValueError(
                f"group indices must lie in [0, {n_groups - 1}], got range "
                f"[{group_of.min()}, {group_of.max()}]"
            )
        if abs(targets.sum() - 1.0) > SIMPLEX_ATOL:
            raise ValueError(f"targets must sum to 1, got {targets.sum()!r}")
        if np.any(targets <= 0):
            raise ValueError("every target proportion must be positive")
        indicators = np.zeros((n_groups, group_of.size), dtype=np.float64)
        indicators[group_of, np.arange(group_of.size)] = 1.0
        object.__setattr__(self, "group_of", group_of)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "indicators", indicators)

    @property
    def n_groups(self):
        return self.targets.size

    @property
    def n_points(self):
        return self.group_of.size

    @classmethod
    def from_group_labels(cls, group_of, targets=None):
        """Build a partition from raw group labels.

        When ``targets`` is omitted the empirical group proportions are used.
        """
        group_of = np.asarray(group_of, dtype=np.int64)
        n_groups = int(group_of.max()) + 1 if group_of.size else 0
        if targets is None:
            counts = np.bincount(group_of, minlength=n_groups).astype(np.float64)
            targets = counts / counts.sum()
        return cls(group_of=group_of, targets=np.asarray(targets, dtype=np.float64))

    def group_counts(self, labels, n_clusters):
        """(n_groups, n_clusters) contingency table of hard labels."""
        labels = np.asarray(labels)
        counts = np.zeros((self.n_groups, n_clusters), dtype=np.int64)
        np.add.at(counts, (self.group_of, labels), 1)
        return counts


@dataclass(frozen=True)
class AffinityGraph:
    """Symmetric nonnegative affinity matrix with cached vertex degrees.

    The matrix must be exactly symmetric, have a zero diagonal and no
    isolated vertices (degree-0 vertices are rejected here so downstream
    ratio computations never see them).
    """

    weights: sp.csr_matrix
    degrees: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        weights = sp.csr_matrix(self.weights, dtype=np.float64)
        if weights.shape[0] != weights.shape[1]:
            raise ValueError("affinity matrix must be square")
        if (weights != weights.T).nnz != 0:
            raise ValueError("affinity matrix must be exactly symmetric")
        if weights.diagonal().any():
            raise ValueError("affinity matrix must have a zero diagonal")
        if weights.nnz and weights.data.min() < 0:
            raise ValueError("affinity weights must be nonnegative")
        degrees = np.asarray(weights.sum(axis=1)).ravel()
        if np.any(degrees <= 0):
            p = int(np.argmax(degrees <= 0))
            raise ValueError(f"vertex {p} is isolated (degree 0)")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "degrees", degrees)

    @property
    def n_points(self):
        return self.weights.shape[0]


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of the bound-optimization solver.

    ``lipschitz_L`` scales the fairness-bound coefficients (smaller is more
    aggressive; the conservative choice is the number of points).
    ``marginal_floor`` clamps cluster and group masses from below before any
    log or division, so transiently empty clusters keep the updates finite.
    """

    lipschitz_L: float = 2.0
    inner_tol: float = 1e-6
    outer_tol: float = 1e-6
    max_inner: int = 1000
    max_outer: int = 100
    rng_seed: int = 0
    marginal_floor: float = 1e-10
    reinit_from_potentials: bool = True

    def __post_init__(self):
        if self.lipschitz_L <= 0:
            raise ValueError("lipschitz_L must be positive")
        if self.inner_tol <= 0 or self.outer_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.marginal_floor <= 0:
            raise ValueError("marginal_floor must be positive")


OBJECTIVES = ("kmeans", "kmedian", "ncut")


@dataclass(frozen=True)
class ClusteringProblem:
    """A clustering instance: data, objective kind, K and the trade-off weight.

    Prototype objectives ("kmeans", "kmedian") read ``features``; the graph
    objective ("ncut") reads ``graph``.
    """

    objective: str
    n_clusters: int
    trade_off: float
    features: np.ndarray | None = None
    graph: AffinityGraph | None = None

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValueError(
                f"objective must be one of {OBJECTIVES}, got {self.objective!r}"
            )
        if self.trade_off < 0:
            raise ValueError("trade_off must be nonnegative")
        if self.n_clusters < 1:
            raise ValueError("n_clusters must be at least 1")
        if self.objective == "ncut":
            if self.graph is None:
                raise ValueError("ncut problems need an affinity graph")
        elif self.features is None:
            raise ValueError(f"{self.objective} problems need a feature matrix")
        if self.features is not None:
            object.__setattr__(
                self, "features", np.asarray(self.features, dtype=np.float64)
            )

    @property
    def n_points(self):
        if self.objective == "ncut":
            return self.graph.n_points
        return self.features.shape[0]

    def with_trade_off(self, trade_off):
        return ClusteringProblem(
            objective=self.objective,
            n_clusters=self.n_clusters,
            trade_off=float(trade_off),
            features=self.features,
            graph=self.graph,
        )


@dataclass(frozen=True)
class SolveResult:
    """Converged solver output.

    ``energy_trace`` has one row per outer iteration with columns
    (iteration, total energy, clustering term, weighted fairness term).
    """

    labels: np.ndarray
    soft: np.ndarray
    energy_trace: np.ndarray
    metrics: dict
    iterations_used: dict

    @property
    def energy_increases(self):
        """Number of outer iterations whose total energy rose beyond slack."""
        total = self.energy_trace[:, 1]
        if total.size < 2:
            return 0
        prev, cur = total[:-1], total[1:]
        return int(np.sum(cur > prev + 1e-9 * np.abs(prev)))
