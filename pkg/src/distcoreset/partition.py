"""Distribute a global dataset across n sites.

Four assignment schemes: uniform, similarity-based (Gaussian kernel around
one anchor point per site), weighted (site weights drawn as |N(0,1)|), and
degree-based (proportional to topology degree). A draw that leaves any
site empty is redrawn wholesale, so every returned site is nonempty.
"""

from __future__ import annotations

import numpy as np

from .geometry import WeightedPointSet
from .network import Topology

SCHEMES = ("uniform", "similarity", "weighted", "degree")


def median_heuristic_bandwidth(
    P: WeightedPointSet, rng: np.random.Generator, sample_size: int = 500
) -> float:
    """Median pairwise distance of a subsample; kernel bandwidth default."""
    n = len(P)
    if n > sample_size:
        idx = rng.choice(n, size=sample_size, replace=False)
        pts = P.points[idx]
    else:
        pts = P.points
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=2)
    upper = d2[np.triu_indices(len(pts), k=1)]
    med = float(np.sqrt(np.median(upper))) if upper.size else 0.0
    return med if med > 0 else 1.0


def _site_probabilities(
    P: WeightedPointSet,
    n: int,
    scheme: str,
    g: Topology | None,
    rng: np.random.Generator,
    bandwidth: float | None,
    site_weights,
) -> np.ndarray:
    """Per-point site-assignment probabilities, shape (len(P), n)."""
    npts = len(P)
    if scheme == "uniform":
        return np.full((npts, n), 1.0 / n)
    if scheme == "similarity":
        if bandwidth is None:
            bandwidth = median_heuristic_bandwidth(P, rng)
        if bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        anchor_idx = rng.choice(npts, size=n, replace=npts < n)
        anchors = P.points[anchor_idx]
        d2 = np.empty((npts, n))
        for j in range(n):
            d2[:, j] = np.sum((P.points - anchors[j]) ** 2, axis=1)
        # stabilized Gaussian kernel; rows are normalized below
        logits = -d2 / (2.0 * bandwidth**2)
        probs = np.exp(logits - logits.max(axis=1, keepdims=True))
        return probs / probs.sum(axis=1, keepdims=True)
    if scheme == "weighted":
        w = np.abs(rng.standard_normal(n)) if site_weights is None else np.asarray(site_weights, float)
        if w.shape != (n,) or np.any(w < 0) or w.sum() <= 0:
            raise ValueError("site weights must be n nonnegative values with positive sum")
        return np.tile(w / w.sum(), (npts, 1))
    if scheme == "degree":
        if g is None:
            raise ValueError("degree-based partition requires a topology")
        if g.n != n:
            raise ValueError(f"topology has {g.n} sites, expected {n}")
        deg = g.degrees().astype(float)
        return np.tile(deg / deg.sum(), (npts, 1))
    raise ValueError(f"unknown partition scheme {scheme!r}; choose from {SCHEMES}")


def partition(
    P: WeightedPointSet,
    n: int,
    scheme: str,
    rng: np.random.Generator,
    g: Topology | None = None,
    bandwidth: float | None = None,
    site_weights=None,
    max_tries: int = 1000,
) -> list[WeightedPointSet]:
    """Assign every point of P to exactly one of n sites.

    Redraws the whole partition until no site is empty (bounded retries).
    `site_weights` overrides the random |N(0,1)| draw of the weighted
    scheme, which is mainly useful for testing.
    """
    if len(P) == 0:
        raise ValueError("cannot partition an empty point set")
    if n < 2:
        raise ValueError("partitioning needs n >= 2 sites")
    for _ in range(max_tries):
        # scheme randomness (anchors, site weights) is part of the redraw
        probs = _site_probabilities(P, n, scheme, g, rng, bandwidth, site_weights)
        cut = np.cumsum(probs, axis=1)
        u = rng.random(len(P))
        labels = np.minimum((u[:, None] >= cut).sum(axis=1), n - 1)
        if len(np.unique(labels)) == n:
            return [P.subset(labels == j) for j in range(n)]
    raise RuntimeError(f"no all-sites-nonempty partition in {max_tries} draws")
