"""Executable oracles and statistical checks for the coreset pipeline.

These are the independent routes used by the test suite: a coreset-quality
probe over random candidate center sets, an exhaustive small-instance
clustering optimum, a Monte Carlo unbiasedness check of the sampling
stage, and a randomized verification of a perturbation bound on squared
distances (replacing a point by a nearby proxy moves the squared cost
only a little, relative to the costs themselves).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coreset import allocate, sampling_weights
from .geometry import Objective, WeightedPointSet, assign, cost, point_costs


def check_coreset(
    coreset: WeightedPointSet,
    P: WeightedPointSet,
    obj: Objective,
    num_center_sets: int,
    k: int,
    rng: np.random.Generator,
) -> float:
    """Worst relative cost error of `coreset` over random candidate centers.

    Half the candidates are k-subsets of P's points, half are such subsets
    displaced by Gaussian noise at the scale of the per-coordinate data
    std, covering near-optimal and deliberately poor center placements.
    Candidates whose true cost is below 1e-12 are skipped.
    """
    if len(P) == 0:
        raise ValueError("reference point set is empty")
    if num_center_sets < 1:
        raise ValueError("need at least one candidate center set")
    scale = P.points.std(axis=0)
    worst = None
    for trial in range(num_center_sets):
        idx = rng.choice(len(P), size=k, replace=len(P) < k)
        centers = P.points[idx].copy()
        if trial % 2 == 1:
            centers += rng.standard_normal(centers.shape) * scale
        true_cost = cost(P, centers, obj)
        if true_cost < 1e-12:
            continue
        err = abs(cost(coreset, centers, obj) - true_cost) / true_cost
        worst = err if worst is None else max(worst, err)
    if worst is None:
        raise ValueError("every candidate center set had degenerate (zero) cost")
    return float(worst)


def _subset_kmeans_costs(points: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Optimal single-cluster k-means cost for every nonempty point subset.

    Index = bitmask over the points; uses the identity
    sum w|x|^2 - |sum w x|^2 / sum w for the cost around the weighted
    centroid, accumulated by peeling the lowest set bit.
    """
    n = len(points)
    size = 1 << n
    wsum = np.zeros(size)
    wx = np.zeros((size, points.shape[1]))
    wxx = np.zeros(size)
    for mask in range(1, size):
        low = mask & -mask
        i = low.bit_length() - 1
        rest = mask ^ low
        wsum[mask] = wsum[rest] + weights[i]
        wx[mask] = wx[rest] + weights[i] * points[i]
        wxx[mask] = wxx[rest] + weights[i] * points[i] @ points[i]
    costs = np.zeros(size)
    nonzero = wsum > 0
    costs[nonzero] = wxx[nonzero] - np.einsum("ij,ij->i", wx[nonzero], wx[nonzero]) / wsum[nonzero]
    return np.maximum(costs, 0.0)


def _subset_kmedian_costs(points: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Optimal single-cluster k-median cost for every nonempty point subset.

    Runs Weiszfeld (200 iterations, 1e-12 displacement stop) on all subsets
    at once, then takes the minimum against every member point as center.
    The member-point candidates make collinear subsets exact, since a 1-D
    weighted median is always attained at a data point.
    """
    n = len(points)
    size = 1 << n
    member = np.zeros((size, n), dtype=bool)
    for mask in range(1, size):
        member[mask] = [(mask >> i) & 1 for i in range(n)]
    w_masked = member * weights  # (size, n)
    wtot = w_masked.sum(axis=1)
    safe = np.where(wtot > 0, wtot, 1.0)

    y = (w_masked @ points) / safe[:, None]  # weighted centroids as start
    eps = 1e-12
    for _ in range(200):
        d = np.linalg.norm(points[None, :, :] - y[:, None, :], axis=2) + eps
        coef = w_masked / d
        denom = coef.sum(axis=1)
        denom = np.where(denom > 0, denom, 1.0)
        y_next = (coef @ points) / denom[:, None]
        if np.abs(y_next - y).max() <= eps:
            y = y_next
            break
        y = y_next
    d = np.linalg.norm(points[None, :, :] - y[:, None, :], axis=2)
    weiszfeld_cost = (w_masked * d).sum(axis=1)

    pair = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=2)
    at_member = w_masked @ pair  # cost of each subset using point j as center
    at_member[~member] = np.inf
    at_member[0] = np.inf
    member_cost = np.min(at_member, axis=1, initial=np.inf)
    member_cost[0] = 0.0

    return np.minimum(weiszfeld_cost, member_cost)


def _label_partitions(n: int, k: int):
    """Canonical labelings of n items into at most k blocks (no relabelings)."""
    labels = [0] * n

    def rec(i: int, used: int):
        if i == n:
            yield labels
            return
        for j in range(min(used + 1, k)):
            labels[i] = j
            yield from rec(i + 1, used + 1 if j == used else used)

    yield from rec(1, 1) if n > 1 else iter([labels])


def brute_force_optimal(P: WeightedPointSet, k: int, obj: Objective) -> float:
    """Exact optimal clustering cost by enumerating all cluster assignments.

    Only feasible for tiny instances (at most 12 points); per-cluster
    optima come from the closed-form weighted centroid (k-means) or a
    high-precision geometric median (k-median).
    """
    n = len(P)
    if n > 12:
        raise ValueError(f"brute force is limited to 12 points, got {n}")
    if n == 0:
        raise ValueError("empty instance")
    if np.any(P.weights < 0):
        raise ValueError("brute force requires nonnegative weights")
    if obj is Objective.KMEANS:
        subset_cost = _subset_kmeans_costs(P.points, P.weights)
    else:
        subset_cost = _subset_kmedian_costs(P.points, P.weights)

    best = np.inf
    for labels in _label_partitions(n, min(k, n)):
        masks = [0] * k
        for i, lab in enumerate(labels):
            masks[lab] |= 1 << i
        total = sum(subset_cost[m] for m in masks if m)
        if total < best:
            best = total
    return float(best)


@dataclass
class UnbiasednessReport:
    mean: float
    stderr: float
    truth: float

    @property
    def passed(self) -> bool:
        return abs(self.mean - self.truth) <= 3.0 * self.stderr


def check_unbiased(
    sites: list[WeightedPointSet],
    solutions: list[np.ndarray],
    centers: np.ndarray,
    t: int,
    obj: Objective,
    reps: int,
    rng: np.random.Generator,
) -> UnbiasednessReport:
    """Monte Carlo mean and stderr of the coreset cost at fixed centers.

    Holds the local solutions (and hence the sampling plan) fixed and
    re-draws only the sampling stage `reps` times. The estimator's mean
    should match the true cost of the pooled data at `centers`.
    """
    P = WeightedPointSet.concat(list(sites))
    truth = cost(P, centers, obj)

    local_costs = [float(np.dot(s.weights, point_costs(s.points, b, obj))) for s, b in zip(sites, solutions)]
    global_m_sum = 2.0 * float(np.sum(local_costs))
    t_i = allocate(local_costs, t) if t > 0 else [0] * len(sites)

    # fixed part: every center carries its cluster's full input mass
    base = 0.0
    site_data = []
    for s, b, ti in zip(sites, solutions, t_i):
        labels, _ = assign(s.points, b)
        cluster_mass = np.bincount(labels, weights=s.weights, minlength=b.shape[0])
        cb = point_costs(b, centers, obj)
        base += float(cluster_mass @ cb)
        m = sampling_weights(s, b, obj)
        msum = m.sum()
        cp = point_costs(s.points, centers, obj)
        if ti > 0 and msum > 0:
            site_data.append((ti, m / msum, m, cp - cb[labels]))

    costs = np.empty(reps)
    for r in range(reps):
        total = base
        for ti, probs, m, delta in site_data:
            draws = rng.choice(len(probs), size=ti, replace=True, p=probs)
            w = global_m_sum / (t * m[draws])
            total += float(w @ delta[draws])
        costs[r] = total
    stderr = float(costs.std(ddof=1) / np.sqrt(reps)) if reps > 1 else 0.0
    return UnbiasednessReport(mean=float(costs.mean()), stderr=stderr, truth=truth)


@dataclass
class TechBoundReport:
    trials: int
    hypothesis_cases: int
    violation: dict | None

    @property
    def passed(self) -> bool:
        return self.violation is None


def check_tech_bound(
    trials: int,
    rng: np.random.Generator,
    eps_max: float = 0.05,
    dim: int = 3,
    k: int = 3,
) -> TechBoundReport:
    """Randomized check of the squared-distance perturbation bound.

    Samples (p, b, X, eps) with b at log-uniform offsets from p and centers
    at log-uniform distances, keeps the trials where the premise
    d(p,b)^2 / eps <= |d(p,X)^2 - d(b,X)^2| holds, and verifies
    |d(p,X)^2 - d(b,X)^2| <= 8 eps min(d(p,X)^2, d(b,X)^2) on every one.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    p = rng.standard_normal((trials, dim))
    u = rng.standard_normal((trials, dim))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    offs = np.exp(rng.uniform(np.log(1e-4), np.log(2.0), size=trials))
    b = p + offs[:, None] * u

    dirs = rng.standard_normal((trials, k, dim))
    dirs /= np.linalg.norm(dirs, axis=2, keepdims=True)
    radii = np.exp(rng.uniform(np.log(0.1), np.log(30.0), size=(trials, k)))
    X = p[:, None, :] + radii[..., None] * dirs

    eps = rng.uniform(0.0, eps_max, size=trials)
    eps = np.maximum(eps, 1e-9)  # open interval (0, eps_max]

    dpX = np.linalg.norm(X - p[:, None, :], axis=2).min(axis=1)
    dbX = np.linalg.norm(X - b[:, None, :], axis=2).min(axis=1)
    gap = np.abs(dpX**2 - dbX**2)
    hypothesis = offs**2 / eps <= gap
    bound = 8.0 * eps * np.minimum(dpX**2, dbX**2)
    bad = hypothesis & (gap > bound)

    violation = None
    if bad.any():
        i = int(np.argmax(bad))
        violation = {
            "p": p[i].tolist(),
            "b": b[i].tolist(),
            "centers": X[i].tolist(),
            "eps": float(eps[i]),
            "gap": float(gap[i]),
            "bound": float(bound[i]),
        }
    return TechBoundReport(
        trials=trials, hypothesis_cases=int(hypothesis.sum()), violation=violation
    )
