"""Bound-optimization solver with closed-form per-point simplex updates.

The total energy is ``clustering objective + trade_off * fairness penalty``.
Each outer iteration freezes the clustering potentials at the current
assignment, re-initializes every row from them, and then runs inner passes
that minimize a strictly convex linear-plus-entropy upper bound.  The bound
minimizer is an elementwise multiplicative (softmax) update, so every inner
pass updates all points independently against a read-only snapshot of the
previous assignment.

The energy is recorded once per outer iteration.  A rise in the trace means
the configured smoothness constant was too aggressive for the instance; it is
logged, never hidden.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ClusteringProblem,
    DemographicPartition,
    SolveResult,
    SolverConfig,
    binarize,
    check_soft_assignment,
    hard_labels,
)
from .fairness import fairness_error, fairness_penalty
from .metrics import min_balance
from .objectives import (
    discrete_objective,
    kmeans_potentials,
    kmedian_potentials,
    ncut_potentials,
)

logger = logging.getLogger(__name__)

# Below this normalizer a row has lost all its mass to underflow.
_ROW_UNDERFLOW = 1e-300


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy terms at one assignment: total = clustering + fairness."""

    total: float
    clustering: float
    fairness: float
    auxiliary: float | None = None


def softmax_update(soft, clustering_potentials, fairness_potentials, trade_off):
    """One multiplicative simplex update of every row.

    Each row is multiplied elementwise by
    ``exp(-(clustering_potentials + trade_off * fairness_potentials))`` and
    renormalized.  The exponent is shifted by its per-row maximum first, so
    arbitrarily large trade-offs cannot overflow.  Rows whose updated mass
    underflows entirely are reset to uniform (and logged).
    """
    soft = np.asarray(soft, dtype=np.float64)
    exponent = -(clustering_potentials + trade_off * fairness_potentials)
    exponent = exponent - exponent.max(axis=1, keepdims=True)
    updated = soft * np.exp(exponent)
    norms = updated.sum(axis=1, keepdims=True)
    dead = norms[:, 0] < _ROW_UNDERFLOW
    if dead.any():
        logger.warning("%d rows underflowed; resetting them to uniform",
                       int(dead.sum()))
        updated[dead] = 1.0
        norms = updated.sum(axis=1, keepdims=True)
    return updated / norms


def auxiliary_value(soft, soft_anchor, clustering_potentials,
                    fairness_potentials, trade_off, marginal_floor=1e-10):
    """Value of the per-point upper bound anchored at ``soft_anchor``.

    The bound is ``sum_p s_p . (a_p + trade_off * b_p + log s_p - log s'_p)``;
    it touches the true energy shape at the anchor and dominates it
    elsewhere, so its sequence of values drives the inner-loop stop test.
    """
    soft = np.asarray(soft, dtype=np.float64)
    soft_anchor = np.asarray(soft_anchor, dtype=np.float64)
    combined = clustering_potentials + trade_off * fairness_potentials
    entropy_gap = np.log(np.maximum(soft, marginal_floor)) \
        - np.log(np.maximum(soft_anchor, marginal_floor))
    return float(np.sum(soft * (combined + entropy_gap)))


def _clustering_potentials(problem, soft, marginal_floor):
    """Dispatch to the objective's potential computation."""
    if problem.objective == "kmeans":
        potentials, _ = kmeans_potentials(problem.features, soft, marginal_floor)
    elif problem.objective == "kmedian":
        potentials, _ = kmedian_potentials(problem.features, soft,
                                           marginal_floor=marginal_floor)
    else:
        potentials = ncut_potentials(problem.graph, soft, marginal_floor)
    return potentials


def _clustering_energy(problem, soft, marginal_floor):
    """Clustering term evaluated on a soft assignment.

    Prototype objectives re-fit their prototypes to the given assignment;
    the graph objective uses the relaxed association-ratio expression.
    """
    soft = np.asarray(soft, dtype=np.float64)
    if problem.objective == "ncut":
        graph = problem.graph
        ws = graph.weights @ soft
        dmass = np.maximum(graph.degrees @ soft, marginal_floor)
        assoc = np.einsum("pk,pk->k", soft, ws)
        return float(problem.n_clusters - np.sum(assoc / dmass))
    if problem.objective == "kmeans":
        potentials, _ = kmeans_potentials(problem.features, soft, marginal_floor)
    else:
        potentials, _ = kmedian_potentials(problem.features, soft,
                                           marginal_floor=marginal_floor)
    return float(np.sum(soft * potentials))


def total_energy(problem, soft, demo, marginal_floor=1e-10):
    """Energy breakdown of an assignment for the given problem."""
    clustering = _clustering_energy(problem, soft, marginal_floor)
    fairness = problem.trade_off * fairness_penalty(soft, demo, marginal_floor)
    return EnergyBreakdown(total=clustering + fairness, clustering=clustering,
                           fairness=fairness)


def _converged(new, old, tol):
    """Relative-change stop test with a 1e-12 absolute fallback near zero."""
    return abs(new - old) <= max(tol * abs(old), 1e-12)


def _row_softmax(potentials):
    shifted = -(potentials - potentials.min(axis=1, keepdims=True))
    weights = np.exp(shifted)
    return weights / weights.sum(axis=1, keepdims=True)


def solve(problem, demo, init_labels, config=None):
    """Run the full outer/inner bound-optimization loop.

    Parameters
    ----------
    problem : ClusteringProblem
    demo : DemographicPartition
    init_labels : array-like of shape (n_points,)
        Initial hard labels (0-based), e.g. from k-means++ seeding.
    config : SolverConfig, optional

    Returns
    -------
    SolveResult
        Final hard labels, final soft assignment, the per-outer-iteration
        energy trace, and summary metrics (discrete objective, fairness
        error, minimum balance).

    Raises
    ------
    FloatingPointError
        If the energy turns non-finite; the message names the iteration.
    """
    config = config or SolverConfig()
    if problem.n_clusters < 2:
        raise ValueError("need at least 2 clusters")
    if demo.n_points != problem.n_points:
        raise ValueError("demographic partition and problem disagree on the "
                         "number of points")
    floor = config.marginal_floor
    lam = problem.trade_off

    soft = binarize(init_labels, problem.n_clusters)
    trace = []
    energy_prev = None
    total_prev = None
    inner_total = 0
    outer_used = 0
    scale = lam / config.lipschitz_L
    targets = demo.targets[:, None]

    for outer in range(1, config.max_outer + 1):
        outer_used = outer
        clustering_pot = _clustering_potentials(problem, soft, floor)
        if config.reinit_from_potentials:
            soft = _row_softmax(clustering_pot)

        # Fused inner pass: one multiplicative update per point against a
        # snapshot of the assignment, with the fairness coefficients rebuilt
        # from the snapshot's masses.  The bound value at the updated point
        # reduces to -sum_p log(normalizer_p), since the per-point linear
        # term cancels the entropy gap exactly; that identity makes the
        # stop test free (see the softmax_update/auxiliary_value tests).
        neg_clustering = -clustering_pot
        group_of = demo.group_of
        indicators = demo.indicators
        aux_prev = None
        exponent = np.empty_like(neg_clustering)
        for _ in range(config.max_inner):
            inner_total += 1
            group_mass = indicators @ soft
            cluster_mass = np.maximum(group_mass.sum(axis=0), floor)
            correction = scale * (targets / np.maximum(group_mass, floor)
                                  - 1.0 / cluster_mass)
            np.add(neg_clustering, correction[group_of, :], out=exponent)
            shift = exponent.max(axis=1, keepdims=True)
            np.subtract(exponent, shift, out=exponent)
            np.exp(exponent, out=exponent)
            np.multiply(soft, exponent, out=exponent)
            norms = exponent.sum(axis=1, keepdims=True)
            dead = norms[:, 0] < _ROW_UNDERFLOW
            if dead.any():
                logger.warning("%d rows underflowed; resetting them to "
                               "uniform", int(dead.sum()))
                exponent[dead] = 1.0
                norms = exponent.sum(axis=1, keepdims=True)
            soft = exponent / norms
            aux = -float(np.sum(np.log(norms) + shift))
            if aux_prev is not None and _converged(aux, aux_prev,
                                                   config.inner_tol):
                break
            aux_prev = aux

        check_soft_assignment(soft)
        energy = total_energy(problem, soft, demo, floor)
        if not np.isfinite(energy.total):
            raise FloatingPointError(
                f"energy became non-finite at outer iteration {outer}: "
                f"{energy}")
        trace.append((outer, energy.total, energy.clustering, energy.fairness))
        # Relative convergence is measured on the constant-free form of the
        # energy (clustering + weighted KL), otherwise the additive
        # cross-entropy constant inflates the denominator and stops the
        # loop while the clustering term is still moving.
        energy_stop = energy.clustering + lam * fairness_error(soft, demo,
                                                               floor)
        if energy_prev is not None:
            if energy.total > total_prev + 1e-9 * abs(total_prev):
                logger.warning(
                    "energy rose from %.12g to %.12g at outer iteration %d "
                    "(smoothness constant %g may be too small)",
                    total_prev, energy.total, outer, config.lipschitz_L)
            if _converged(energy_stop, energy_prev, config.outer_tol):
                break
        energy_prev = energy_stop
        total_prev = energy.total

    labels = hard_labels(soft)
    metrics = {
        "discrete_objective": discrete_objective(problem, labels),
        "fairness_error": fairness_error(binarize(labels, problem.n_clusters),
                                         demo, floor),
        "min_balance": min_balance(labels, demo, problem.n_clusters),
    }
    return SolveResult(
        labels=labels,
        soft=soft,
        energy_trace=np.asarray(trace, dtype=np.float64),
        metrics=metrics,
        iterations_used={"outer": outer_used, "inner_total": inner_total},
    )


@dataclass(frozen=True)
class SweepResult:
    """Outcome of an ascending trade-off sweep.

    ``table`` has one row per trade-off value:
    (trade_off, discrete_objective, fairness_error, min_balance).
    ``satisfied`` is False when no value met the fairness tolerance, in which
    case ``chosen`` holds the largest-value run.
    """

    chosen_trade_off: float
    chosen: SolveResult
    table: list = field(repr=False)
    results: dict = field(repr=False)
    satisfied: bool = True


def _worker_count(n_jobs):
    env = os.environ.get("FAIRCLUST_THREADS")
    if env:
        return max(1, min(int(env), n_jobs))
    return max(1, min(os.cpu_count() or 1, n_jobs))


def lambda_sweep(problem, demo, init_labels, trade_offs, epsilon, config=None):
    """Independent solver runs over ascending trade-off values.

    Returns the smallest trade-off whose fairness error is at most
    ``epsilon`` together with the full per-value table.  Runs are
    independent, so they execute on a worker pool (capped by the
    ``FAIRCLUST_THREADS`` environment variable) and the outcome does not
    depend on the worker count.
    """
    trade_offs = [float(v) for v in trade_offs]
    if not trade_offs:
        raise ValueError("need at least one trade-off value")
    if any(b <= a for a, b in zip(trade_offs, trade_offs[1:])):
        raise ValueError("trade-off values must be strictly ascending")
    if any(v < 0 for v in trade_offs):
        raise ValueError("trade-off values must be nonnegative")

    def run(value):
        return solve(problem.with_trade_off(value), demo, init_labels, config)

    with ThreadPoolExecutor(max_workers=_worker_count(len(trade_offs))) as pool:
        results = dict(zip(trade_offs, pool.map(run, trade_offs)))

    table = [
        (
            value,
            results[value].metrics["discrete_objective"],
            results[value].metrics["fairness_error"],
            results[value].metrics["min_balance"],
        )
        for value in trade_offs
    ]
    for value in trade_offs:
        if results[value].metrics["fairness_error"] <= epsilon:
            return SweepResult(chosen_trade_off=value, chosen=results[value],
                               table=table, results=results, satisfied=True)
    last = trade_offs[-1]
    logger.warning("no trade-off value reached fairness error <= %g; "
                   "returning the largest (%g)", epsilon, last)
    return SweepResult(chosen_trade_off=last, chosen=results[last],
                       table=table, results=results, satisfied=False)
