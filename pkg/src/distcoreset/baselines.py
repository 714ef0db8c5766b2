"""Comparison methods: union-of-local-coresets and hierarchical tree merging.

COMBINE gives every site an equal slice of the sample budget and unions
the independently built local coresets. The tree-merge baseline instead
rebuilds a fixed-size coreset at every node of a rooted tree from the
node's own data plus its children's coresets, passing the result one hop
up; only the root's coreset survives. Both conserve total weight exactly.
"""

from __future__ import annotations

import numpy as np

from .coreset import CoresetPortion, build_centralized_coreset
from .geometry import Objective, WeightedPointSet
from .network import CommLedger, RootedTree
from .solvers import SolverParams


def combine(
    sites: list[WeightedPointSet],
    k: int,
    t_total: int,
    obj: Objective,
    rng: np.random.Generator,
    params: SolverParams = SolverParams(),
) -> list[CoresetPortion]:
    """Union of per-site coresets, each of size floor(t_total / n).

    Leftover slots go to the lowest-index sites. Communication for sharing
    the portions is charged by the caller, exactly as for the distributed
    method's portions.
    """
    n = len(sites)
    if n == 0:
        raise ValueError("need at least one site")
    if t_total < n:
        raise ValueError(f"t_total={t_total} leaves some of the {n} sites without samples")
    base, extra = divmod(t_total, n)
    # one site needs no stream split; this keeps n=1 bitwise equal to the
    # centralized construction under the same generator
    streams = rng.spawn(n) if n > 1 else [rng]
    portions = []
    for i, (site, stream) in enumerate(zip(sites, streams)):
        t_i = base + (1 if i < extra else 0)
        portion = build_centralized_coreset(site, k, t_i, obj, stream, params)
        portions.append(
            CoresetPortion(site_id=i, sampled=portion.sampled, centers=portion.centers)
        )
    return portions


def zhang_tree_merge(
    tree: RootedTree,
    sites: list[WeightedPointSet],
    k: int,
    t_node: int,
    obj: Objective,
    rng: np.random.Generator,
    ledger: CommLedger,
    params: SolverParams = SolverParams(),
) -> CoresetPortion:
    """Merge coresets up a rooted tree; returns the root's coreset.

    Post-order: each node pools its own raw data with the coresets received
    from its children, builds a size-t_node coreset of the pooled weighted
    set, and sends it one hop to its parent (charged at the portion's
    actual size in point-units). Negative-weight entries arriving from
    children are never resampled; they pass through each merge unchanged.
    """
    if len(sites) != tree.n:
        raise ValueError("need one dataset per tree node")
    if t_node < 1:
        raise ValueError("per-node coreset size must be >= 1")

    children: dict[int, list[int]] = {v: [] for v in range(tree.n)}
    for v, parent in tree.parent.items():
        children[parent].append(v)

    streams = rng.spawn(tree.n)
    received: dict[int, CoresetPortion] = {}

    # iterative post-order: children strictly before parents
    order: list[int] = []
    stack = [tree.root]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(children[v])
    for v in reversed(order):
        pooled = WeightedPointSet.concat(
            [sites[v]] + [received[c].as_weighted_set() for c in sorted(children[v])]
        )
        portion = build_centralized_coreset(pooled, k, t_node, obj, streams[v], params)
        portion = CoresetPortion(site_id=v, sampled=portion.sampled, centers=portion.centers)
        if v != tree.root:
            p = tree.parent[v]
            ledger.charge_points((min(v, p), max(v, p)), portion.size())
        received[v] = portion
    return received[tree.root]
