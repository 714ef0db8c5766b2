"""Dataset ingestion and synthetic mixture generation."""

from __future__ import annotations

import numpy as np

from ..geometry import WeightedPointSet


def gen_synthetic(
    k_true: int,
    d: int,
    points_per_center: int,
    spread: float,
    rng: np.random.Generator,
) -> tuple[WeightedPointSet, np.ndarray]:
    """Gaussian mixture with standard-normal centers.

    Draws k_true centers from N(0, I_d) and points_per_center points as
    center + N(0, spread^2 I) around each. Returns the unit-weight data
    and the true centers (useful as a cost baseline).
    """
    if k_true < 1 or d < 1 or points_per_center < 1:
        raise ValueError("k_true, d and points_per_center must be positive")
    if spread < 0:
        raise ValueError("spread must be nonnegative")
    centers = rng.standard_normal((k_true, d))
    blocks = [
        c + spread * rng.standard_normal((points_per_center, d)) for c in centers
    ]
    return WeightedPointSet.unit(np.concatenate(blocks)), centers


def load_dataset(path) -> WeightedPointSet:
    """Read comma-separated numeric rows as a unit-weight point set.

    Rows must all have the same width and contain only finite reals; there
    is no header support. Errors cite the offending 1-based line number.
    """
    rows = []
    width = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            fields = line.split(",")
            try:
                values = [float(f) for f in fields]
            except ValueError as exc:
                raise ValueError(
                    f"{path}: line {lineno}: non-numeric field ({exc})"
                ) from None
            if any(not np.isfinite(v) for v in values):
                raise ValueError(f"{path}: line {lineno}: non-finite value")
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise ValueError(
                    f"{path}: line {lineno}: expected {width} fields, got {len(values)}"
                )
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: empty dataset")
    return WeightedPointSet.unit(np.array(rows))


def save_dataset(P: WeightedPointSet, path) -> None:
    """Write points (weights dropped) in the comma-separated row format."""
    with open(path, "w") as fh:
        for row in P.points:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
