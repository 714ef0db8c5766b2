"""Local constant-approximation solvers for weighted k-means / k-median.

Seeding draws centers proportional to w(p) * d(p, chosen)^e (the exponent
matching the objective) and refinement alternates closest-center
assignment with per-cluster center updates: weighted centroid for k-means,
Weiszfeld iterations for k-median.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Objective, WeightedPointSet, as_centers, assign, cost


@dataclass(frozen=True)
class SolverParams:
    max_iters: int = 100  # refinement iteration cap
    rel_tol: float = 1e-4  # stop when relative cost improvement drops below
    weiszfeld_iters: int = 50
    weiszfeld_eps: float = 1e-10  # additive guard against division at data points

    def __post_init__(self):
        if self.max_iters < 1 or self.weiszfeld_iters < 1:
            raise ValueError("iteration counts must be positive")
        if self.rel_tol <= 0 or self.weiszfeld_eps <= 0:
            raise ValueError("tolerances must be positive")


def weighted_median_1d(values: np.ndarray, weights: np.ndarray) -> float:
    """Smallest value at which cumulative weight reaches half the total."""
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(weights[order])
    idx = int(np.searchsorted(cum, 0.5 * cum[-1]))
    return float(values[order][min(idx, len(values) - 1)])


def geometric_median(
    points: np.ndarray,
    weights: np.ndarray,
    start: np.ndarray,
    iters: int,
    eps: float,
) -> np.ndarray:
    """Weighted geometric median by Weiszfeld iteration from `start`."""
    y = np.array(start, dtype=float)
    for _ in range(iters):
        d = np.linalg.norm(points - y, axis=1) + eps
        coef = weights / d
        denom = coef.sum()
        if denom <= 0:
            break
        y_next = coef @ points / denom
        if np.linalg.norm(y_next - y) <= eps:
            y = y_next
            break
        y = y_next
    return y


def collinear_direction(points: np.ndarray, tol: float = 1e-12) -> np.ndarray | None:
    """Unit direction if the points lie on one line, else None."""
    centered = points - points.mean(axis=0)
    if len(points) <= 2 or points.shape[1] == 1:
        norms = np.linalg.norm(centered, axis=1)
        i = int(np.argmax(norms))
        if norms[i] <= tol:
            return np.zeros(points.shape[1])
        return centered[i] / norms[i]
    s = np.linalg.svd(centered, compute_uv=False)
    if s[1] <= tol * max(s[0], 1.0):
        u = centered[int(np.argmax(np.linalg.norm(centered, axis=1)))]
        n = np.linalg.norm(u)
        return u / n if n > tol else np.zeros(points.shape[1])
    return None


def exact_median_collinear(points: np.ndarray, weights: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Geometric median of collinear points: 1-D weighted median on the line."""
    base = points.mean(axis=0)
    coords = (points - base) @ direction
    return base + weighted_median_1d(coords, weights) * direction


def seed(P: WeightedPointSet, k: int, obj: Objective, rng: np.random.Generator) -> np.ndarray:
    """Draw k starting centers from P's points.

    The first center is drawn weight-proportionally; each subsequent one
    proportional to w(p) * d(p, chosen)^e. Once every distinct
    positive-weight point is chosen the remaining slots repeat the last
    center, so degenerate inputs (fewer distinct points than k) still
    yield k entries.
    """
    if len(P) == 0:
        raise ValueError("cannot seed centers from an empty point set")
    if np.any(P.weights < 0):
        raise ValueError("seeding requires nonnegative weights")
    total = P.weights.sum()
    if total <= 0:
        raise ValueError("cannot seed centers: total weight is zero")
    if k < 1:
        raise ValueError("k must be >= 1")

    first = int(rng.choice(len(P), p=P.weights / total))
    centers = [P.points[first]]
    # D^e mass of each point against the chosen set so far
    d_e = P.weights * np.linalg.norm(P.points - centers[0], axis=1) ** obj.exponent
    while len(centers) < k:
        s = d_e.sum()
        if s <= 0:
            break  # every positive-weight point coincides with a chosen center
        idx = int(rng.choice(len(P), p=d_e / s))
        centers.append(P.points[idx])
        d_e = np.minimum(
            d_e,
            P.weights * np.linalg.norm(P.points - centers[-1], axis=1) ** obj.exponent,
        )
    while len(centers) < k:
        centers.append(centers[-1])
    return np.array(centers)


def _update_center(
    cluster_points: np.ndarray,
    cluster_weights: np.ndarray,
    current: np.ndarray,
    obj: Objective,
    params: SolverParams,
) -> np.ndarray:
    centroid = cluster_weights @ cluster_points / cluster_weights.sum()
    if obj is Objective.KMEANS:
        return centroid
    direction = collinear_direction(cluster_points)
    if direction is not None:
        return exact_median_collinear(cluster_points, cluster_weights, direction)
    return geometric_median(
        cluster_points, cluster_weights, centroid, params.weiszfeld_iters, params.weiszfeld_eps
    )


def refine(
    P: WeightedPointSet,
    initial: np.ndarray,
    obj: Objective,
    params: SolverParams = SolverParams(),
    cost_trace: list[float] | None = None,
) -> np.ndarray:
    """Lloyd-style alternating refinement of a center set.

    Per cluster the candidate update is kept only if it does not increase
    that cluster's assigned cost, so the total cost is non-increasing
    across iterations. Empty clusters are re-seeded at the points with the
    largest weighted cost contribution (deterministic). If `cost_trace` is
    given, the cost after each iteration is appended to it.
    """
    if np.any(P.weights < 0):
        raise ValueError("refinement requires nonnegative weights")
    centers = as_centers(initial).copy()
    k = centers.shape[0]
    prev = cost(P, centers, obj)
    if cost_trace is not None:
        cost_trace.append(prev)
    for _ in range(params.max_iters):
        labels, dmin = assign(P.points, centers)
        contrib = P.weights * dmin**obj.exponent
        empties = []
        for j in range(k):
            mask = labels == j
            wsum = P.weights[mask].sum()
            if wsum <= 0:
                empties.append(j)
                continue
            candidate = _update_center(
                P.points[mask], P.weights[mask], centers[j], obj, params
            )
            cand_cost = float(
                P.weights[mask]
                @ np.linalg.norm(P.points[mask] - candidate, axis=1) ** obj.exponent
            )
            if cand_cost <= contrib[mask].sum():
                centers[j] = candidate
        if empties:
            # re-seed empty clusters at the heaviest contributors, in order
            order = np.argsort(-contrib, kind="stable")
            for slot, j in enumerate(empties):
                centers[j] = P.points[order[min(slot, len(order) - 1)]]
        cur = cost(P, centers, obj)
        if cost_trace is not None:
            cost_trace.append(cur)
        if prev <= 0 or (prev - cur) < params.rel_tol * prev:
            break
        prev = cur
    return centers


def local_approximation(
    P: WeightedPointSet,
    k: int,
    obj: Objective,
    rng: np.random.Generator,
    params: SolverParams = SolverParams(),
) -> tuple[np.ndarray, float]:
    """Seed-then-refine local solution; returns (centers, cost)."""
    centers = refine(P, seed(P, k, obj, rng), obj, params)
    return centers, cost(P, centers, obj)
