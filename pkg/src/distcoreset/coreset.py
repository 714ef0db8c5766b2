"""Distributed coreset construction from local approximate solutions.

Round 1: every site solves its local data approximately and shares the
scalar cost of that solution. Round 2: sample counts are split across
sites proportionally to those costs, each site samples its own points
with probability proportional to their contribution to the local
solution's cost, and the local solution centers absorb the residual
(possibly negative) mass. The union of the per-site portions is the
global coreset; its total weight equals the total input weight exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Objective, WeightedPointSet, assign
from .network import CommLedger, NullComm
from .solvers import SolverParams, local_approximation


class AllLocalCostsZero(ValueError):
    """Every site's local solution has zero cost; nothing is sample-able."""


@dataclass(frozen=True)
class CoresetPortion:
    """Per-site slice of the global coreset.

    `sampled` holds the drawn points with their (positive) sample weights,
    duplicates as separate entries; `centers` holds the local solution
    centers with signed residual weights. Portions produced by baseline
    merging may carry pass-through entries in `centers` beyond the k
    solution centers.
    """

    site_id: int
    sampled: WeightedPointSet
    centers: WeightedPointSet

    def size(self) -> int:
        return len(self.sampled) + len(self.centers)

    def total_weight(self) -> float:
        return self.sampled.total_weight() + self.centers.total_weight()

    def as_weighted_set(self) -> WeightedPointSet:
        return WeightedPointSet(
            np.concatenate([self.sampled.points, self.centers.points]),
            np.concatenate([self.sampled.weights, self.centers.weights]),
        )


@dataclass(frozen=True)
class SamplingPlan:
    """Proportional split of the global sample budget across sites."""

    local_costs: list[float]
    total_cost: float
    t: int
    t_i: list[int]

    def __post_init__(self):
        if sum(self.t_i) != self.t:
            raise ValueError("per-site sample counts must sum to the budget")
        if any(c < 0 for c in self.local_costs) or any(c < 0 for c in self.t_i):
            raise ValueError("costs and counts must be nonnegative")


def make_sampling_plan(local_costs, t: int) -> SamplingPlan:
    """Allocation plus the shared totals every site needs for round two."""
    costs = [float(c) for c in local_costs]
    return SamplingPlan(
        local_costs=costs,
        total_cost=float(np.sum(costs)),
        t=t,
        t_i=allocate(costs, t),
    )


def union_coreset(portions: list[CoresetPortion]) -> WeightedPointSet:
    """Concatenate portion contents into one weighted point set."""
    return WeightedPointSet.concat([p.as_weighted_set() for p in portions])


def sampling_weights(P: WeightedPointSet, centers: np.ndarray, obj: Objective) -> np.ndarray:
    """Per-point sampling mass: twice the point's weighted cost against `centers`.

    The leading factor of two cancels between the draw probabilities (mass
    over mass sum) and the sample weights (mass sum over mass), so it never
    changes what gets built; it is kept because the residual center-weight
    bookkeeping is stated in terms of these doubled masses.
    """
    _, dmin = assign(P.points, centers)
    return 2.0 * P.weights * dmin**obj.exponent


def allocate(local_costs, t: int) -> list[int]:
    """Split t sample slots proportionally to local costs.

    Largest-remainder apportionment: floor the proportional quotas, then
    hand the remaining slots to the largest fractional remainders (ties to
    the lowest site index). Zero-cost sites get zero slots.
    """
    costs = np.asarray(local_costs, dtype=float)
    if t < 1:
        raise ValueError("sample budget t must be >= 1")
    if np.any(costs < 0):
        raise ValueError("local costs must be nonnegative")
    total = costs.sum()
    if total <= 0:
        raise AllLocalCostsZero("all local costs are zero")
    quotas = t * costs / total
    counts = np.floor(quotas).astype(int)
    remainders = quotas - counts
    for idx in sorted(range(len(costs)), key=lambda i: (-remainders[i], i)):
        if counts.sum() >= t:
            break
        counts[idx] += 1
    return [int(c) for c in counts]


def sample_portion(
    P: WeightedPointSet,
    centers: np.ndarray,
    t_i: int,
    global_m_sum: float,
    t: int,
    obj: Objective,
    rng: np.random.Generator,
    site_id: int = 0,
) -> CoresetPortion:
    """Draw one site's coreset portion.

    Draws t_i points i.i.d. with replacement, each with probability
    proportional to its sampling mass m_p; a drawn occurrence of q gets
    weight global_m_sum / (t * m_q). Each local center then carries its
    cluster's input mass minus the mass of samples drawn from that cluster,
    which keeps the portion's total weight equal to the site's input weight
    exactly.
    """
    m = sampling_weights(P, centers, obj)
    m_sum = m.sum()
    labels, _ = assign(P.points, centers)
    k = centers.shape[0]

    if t_i > 0:
        if m_sum <= 0:
            raise ValueError("positive sample count but zero sampling mass at site")
        if t < 1:
            raise ValueError("per-site draws require a positive global budget t")
        draws = rng.choice(len(P), size=t_i, replace=True, p=m / m_sum)
        sample_w = global_m_sum / (t * m[draws])
        sampled = WeightedPointSet(P.points[draws], sample_w)
        drawn_mass_per_center = np.bincount(labels[draws], weights=sample_w, minlength=k)
    else:
        sampled = WeightedPointSet(np.empty((0, P.dim)), np.empty(0))
        drawn_mass_per_center = np.zeros(k)

    cluster_mass = np.bincount(labels, weights=P.weights, minlength=k)
    center_w = cluster_mass - drawn_mass_per_center
    return CoresetPortion(
        site_id=site_id,
        sampled=sampled,
        centers=WeightedPointSet(np.asarray(centers, dtype=float), center_w),
    )


def _split_signed(P: WeightedPointSet) -> tuple[WeightedPointSet, WeightedPointSet]:
    """Nonnegative-weight part (solver/sampling input) and negative-weight rest."""
    neg = P.weights < 0
    return P.subset(~neg), P.subset(neg)


def _append_passthrough(portion: CoresetPortion, passthrough: WeightedPointSet) -> CoresetPortion:
    if len(passthrough) == 0:
        return portion
    merged = WeightedPointSet(
        np.concatenate([portion.centers.points, passthrough.points]),
        np.concatenate([portion.centers.weights, passthrough.weights]),
    )
    return CoresetPortion(portion.site_id, portion.sampled, merged)


def build_distributed_coreset(
    sites: list[WeightedPointSet],
    k: int,
    t: int,
    obj: Objective,
    rng: np.random.Generator,
    comm=None,
    params: SolverParams = SolverParams(),
) -> tuple[list[CoresetPortion], CommLedger]:
    """Run both rounds of the distributed construction.

    Each site gets an independent RNG stream spawned from `rng`, so the
    output does not depend on the order sites are processed in. `comm`
    carries the round-1 scalar broadcast and owns the returned ledger; when
    None, a cost-free communicator is used.

    If every local solution has zero cost there is nothing to sample; the
    centers already represent the data exactly and carry its full mass.
    """
    if not sites:
        raise ValueError("need at least one site")
    if any(len(s) == 0 for s in sites):
        raise ValueError("every site must hold at least one point")
    if t < 0:
        raise ValueError("sample budget t must be nonnegative")
    if comm is None:
        comm = NullComm()

    streams = rng.spawn(len(sites))
    positives, passthroughs, solutions, costs = [], [], [], []
    for site, stream in zip(sites, streams):
        pos, neg = _split_signed(site)
        if len(pos) == 0 or pos.weights.sum() <= 0:
            raise ValueError("site has no positive-weight points to solve on")
        centers, local_cost = local_approximation(pos, k, obj, stream, params)
        positives.append(pos)
        passthroughs.append(neg)
        solutions.append(centers)
        costs.append(local_cost)

    shared = comm.broadcast_scalars(costs)
    total_cost = float(np.sum(shared))
    global_m_sum = 2.0 * total_cost

    if total_cost <= 0 or t == 0:
        # nothing is sample-able (or no budget): centers carry all the mass
        t_i = [0] * len(sites)
    else:
        t_i = make_sampling_plan(shared, t).t_i

    portions = []
    for i, (pos, centers, stream) in enumerate(zip(positives, solutions, streams)):
        portion = sample_portion(pos, centers, t_i[i], global_m_sum, t, obj, stream, site_id=i)
        portions.append(_append_passthrough(portion, passthroughs[i]))
    return portions, comm.ledger


def build_centralized_coreset(
    P: WeightedPointSet,
    k: int,
    t: int,
    obj: Objective,
    rng: np.random.Generator,
    params: SolverParams = SolverParams(),
) -> CoresetPortion:
    """Single-site coreset construction on (possibly signed) weighted input.

    Exactly the one-site case of the distributed pipeline, with no
    communication. Negative-weight input entries are never sampled and
    never feed the solver; they pass through to the output unchanged.
    """
    portions, _ = build_distributed_coreset([P], k, t, obj, rng, comm=None, params=params)
    return portions[0]
