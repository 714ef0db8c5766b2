"""Points, weighted point sets, and the two clustering cost functions.

Everything here is a pure function over numpy arrays: a point is a 1-D
float array of length d, a center set is a (k, d) array, and weighted
data is carried by :class:`WeightedPointSet`. All arithmetic is double
precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class Objective(Enum):
    """Clustering objective; selects the exponent applied to distances."""

    KMEANS = "kmeans"
    KMEDIAN = "kmedian"

    @property
    def exponent(self) -> int:
        return 2 if self is Objective.KMEANS else 1


@dataclass(frozen=True)
class WeightedPointSet:
    """Ordered points with per-point real weights.

    Raw datasets carry unit weights; coresets may carry negative weights
    (center weights produced by the sampling construction are signed), and
    all cost computations propagate the sign unchanged.
    """

    points: np.ndarray  # (n, d) float64
    weights: np.ndarray  # (n,) float64

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise ValueError(f"points must be a (n, d) array, got shape {pts.shape}")
        wts = np.asarray(self.weights, dtype=float)
        if wts.shape != (pts.shape[0],):
            raise ValueError(
                f"weights shape {wts.shape} does not match {pts.shape[0]} points"
            )
        if not np.all(np.isfinite(pts)):
            raise ValueError("points contain non-finite coordinates")
        if not np.all(np.isfinite(wts)):
            raise ValueError("weights contain non-finite values")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", wts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def total_weight(self) -> float:
        return float(self.weights.sum())

    @classmethod
    def unit(cls, points) -> "WeightedPointSet":
        """Wrap raw points with unit weights."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2:
            pts = np.atleast_2d(pts)
        return cls(pts, np.ones(pts.shape[0]))

    def subset(self, index) -> "WeightedPointSet":
        return WeightedPointSet(self.points[index], self.weights[index])

    @staticmethod
    def concat(parts: list["WeightedPointSet"]) -> "WeightedPointSet":
        parts = [p for p in parts if len(p) > 0]
        if not parts:
            raise ValueError("cannot concatenate zero nonempty point sets")
        return WeightedPointSet(
            np.concatenate([p.points for p in parts]),
            np.concatenate([p.weights for p in parts]),
        )


def as_centers(x) -> np.ndarray:
    """Validate and return a (k, d) center array."""
    c = np.atleast_2d(np.asarray(x, dtype=float))
    if c.shape[0] < 1:
        raise ValueError("center set must be nonempty")
    if not np.all(np.isfinite(c)):
        raise ValueError("centers contain non-finite coordinates")
    return c


def distance(p, q) -> float:
    """Euclidean distance between two points of equal dimension."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"dimension mismatch: {p.shape} vs {q.shape}")
    return float(np.linalg.norm(p - q))


def center_distances(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Distance from each point to each center, shape (n, k).

    Computed one center at a time so memory stays O(n) regardless of k.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    centers = as_centers(centers)
    if points.shape[1] != centers.shape[1]:
        raise ValueError(
            f"dimension mismatch: points are {points.shape[1]}-d, "
            f"centers are {centers.shape[1]}-d"
        )
    out = np.empty((points.shape[0], centers.shape[0]))
    for j in range(centers.shape[0]):
        out[:, j] = np.linalg.norm(points - centers[j], axis=1)
    return out


def assign(points: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closest-center label and distance for each point.

    Ties break to the lowest center index (argmin returns the first
    minimum), which keeps runs reproducible.
    """
    dists = center_distances(points, centers)
    labels = np.argmin(dists, axis=1)
    return labels, dists[np.arange(len(labels)), labels]


def closest_center(p, centers) -> tuple[int, float]:
    """Index of the nearest center to p and the distance to it."""
    labels, dists = assign(np.atleast_2d(np.asarray(p, dtype=float)), centers)
    return int(labels[0]), float(dists[0])


def cost(P: WeightedPointSet, centers, obj: Objective) -> float:
    """Weighted clustering cost of P against a center set.

    Sum of w(p) * d(p, X)^e with e = 2 for k-means and e = 1 for k-median.
    Negative weights contribute with their sign.
    """
    if len(P) == 0:
        return 0.0
    _, dmin = assign(P.points, centers)
    return float(np.dot(P.weights, dmin**obj.exponent))


def point_costs(points: np.ndarray, centers, obj: Objective) -> np.ndarray:
    """Per-point unweighted cost d(p, X)^e, shape (n,)."""
    _, dmin = assign(points, centers)
    return dmin**obj.exponent
