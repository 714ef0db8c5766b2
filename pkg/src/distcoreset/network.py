"""Topology generation, flooding, tree converge-cast, and communication accounting.

The simulator is synchronous and latency-free: what matters is *what* crosses
each edge, counted exactly. Transmitted d-dimensional points (their weight
rides along for free) are charged as point-units; standalone reals (e.g.
local solution costs) as scalar-units. The two currencies are kept separate
in :class:`CommLedger`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Topology:
    """Undirected connected graph over n sites."""

    n: int
    edges: tuple[tuple[int, int], ...]  # sorted (u, v) pairs with u < v
    kind: str = "custom"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("topology needs at least one site")
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at site {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u},{v}) out of range for n={self.n}")
            if u > v:
                raise ValueError(f"edge ({u},{v}) not normalized (u < v required)")
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u},{v})")
            seen.add((u, v))
        if not _connected(self.n, self.edges):
            raise ValueError("topology is not connected")

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self) -> list[list[int]]:
        """Adjacency lists, each sorted ascending."""
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for lst in adj:
            lst.sort()
        return adj

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg


@dataclass(frozen=True)
class RootedTree:
    """Spanning tree given by a parent map; height is the maximum depth."""

    root: int
    parent: dict[int, int]  # site -> parent, for every non-root site
    n: int

    def depths(self) -> np.ndarray:
        d = np.zeros(self.n, dtype=int)
        for v in range(self.n):
            u, steps = v, 0
            while u != self.root:
                u = self.parent[u]
                steps += 1
                if steps > self.n:
                    raise ValueError("parent map contains a cycle")
            d[v] = steps
        return d

    @property
    def height(self) -> int:
        return int(self.depths().max())

    def path_to_root(self, v: int) -> list[tuple[int, int]]:
        """Edges crossed by a payload travelling from v to the root."""
        edges = []
        while v != self.root:
            p = self.parent[v]
            edges.append((min(v, p), max(v, p)))
            v = p
        return edges


@dataclass
class CommLedger:
    """Exact transmission counts, split by unit and by edge."""

    point_units: int = 0
    scalar_units: int = 0
    per_edge: dict[tuple[int, int], list[int]] = field(default_factory=dict)
    # per_edge values are [point_units, scalar_units] for that edge

    def charge_points(self, edge: tuple[int, int], units: int) -> None:
        if units < 0:
            raise ValueError("cannot charge negative units")
        self.point_units += units
        self.per_edge.setdefault(edge, [0, 0])[0] += units

    def charge_scalars(self, edge: tuple[int, int], units: int) -> None:
        if units < 0:
            raise ValueError("cannot charge negative units")
        self.scalar_units += units
        self.per_edge.setdefault(edge, [0, 0])[1] += units

    def combined(self, d: int) -> float:
        """Single-number total using 1 scalar = 1/(d+1) point-units."""
        return self.point_units + self.scalar_units / (d + 1)


def _connected(n: int, edges) -> bool:
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = [False] * n
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if not seen[w]:
                seen[w] = True
                count += 1
                stack.append(w)
    return count == n


def _normalize(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


def random_topology(n: int, p: float, rng: np.random.Generator, max_tries: int = 1000) -> Topology:
    """Erdos-Renyi G(n, p), redrawn until connected (bounded retries)."""
    if n < 2:
        raise ValueError("random topology needs n >= 2")
    if not 0 < p <= 1:
        raise ValueError("edge probability must be in (0, 1]")
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    for _ in range(max_tries):
        mask = rng.random(len(pairs)) < p
        edges = tuple(e for e, keep in zip(pairs, mask) if keep)
        if _connected(n, edges):
            return Topology(n, edges, kind="random")
    raise RuntimeError(f"no connected G({n},{p}) draw in {max_tries} attempts")


def grid_topology(rows: int, cols: int) -> Topology:
    """4-neighbor lattice of rows x cols sites, row-major ids."""
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise ValueError("grid needs at least two sites")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Topology(rows * cols, tuple(sorted(edges)), kind="grid")


def preferential_topology(n: int, attach: int, rng: np.random.Generator) -> Topology:
    """Preferential-attachment graph.

    Seeding convention: the first `attach + 1` sites form a clique; each
    later site attaches to `attach` distinct existing sites drawn with
    probability proportional to current degree. Always connected;
    m = attach*(attach+1)/2 + (n - attach - 1)*attach.
    """
    if attach < 1:
        raise ValueError("attachment count must be >= 1")
    if n < attach + 2:
        raise ValueError(f"preferential topology needs n >= {attach + 2}")
    edges = [(u, v) for u in range(attach + 1) for v in range(u + 1, attach + 1)]
    deg = np.zeros(n)
    deg[: attach + 1] = attach
    for v in range(attach + 1, n):
        probs = deg[:v] / deg[:v].sum()
        targets = rng.choice(v, size=attach, replace=False, p=probs)
        for u in sorted(int(t) for t in targets):
            edges.append((u, v))
            deg[u] += 1
        deg[v] = attach
    return Topology(n, tuple(sorted(edges)), kind="preferential")


def spanning_tree(g: Topology, rng: np.random.Generator) -> RootedTree:
    """BFS spanning tree from a uniformly chosen root.

    Neighbor exploration follows ascending site id, so the tree is a
    deterministic function of (topology, root).
    """
    root = int(rng.integers(g.n))
    adj = g.neighbors()
    parent: dict[int, int] = {}
    seen = [False] * g.n
    seen[root] = True
    frontier = [root]
    while frontier:
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    parent[w] = u
                    nxt.append(w)
        frontier = nxt
    return RootedTree(root=root, parent=parent, n=g.n)


@dataclass
class FloodResult:
    delivered: list[set[int]]  # per site: origins of items held
    rounds: int


def flood(
    g: Topology,
    item_sizes: list[int],
    ledger: CommLedger,
    unit: str = "points",
) -> FloodResult:
    """Flood one item per site to every site; charge each transmission.

    On first acquiring an item (its own at round zero, or via a receive) a
    site sends it once to *all* neighbors, including the one it came from.
    Every site therefore transmits every item exactly once per incident
    edge: 2m transmissions per item in total.
    """
    if len(item_sizes) != g.n:
        raise ValueError("need one payload size per site")
    if unit not in ("points", "scalars"):
        raise ValueError(f"unknown unit {unit!r}")
    charge = ledger.charge_points if unit == "points" else ledger.charge_scalars
    adj = g.neighbors()
    held = [{i} for i in range(g.n)]
    fresh = [[i] for i in range(g.n)]  # items acquired last round, per site
    rounds = 0
    while any(fresh):
        incoming: list[list[int]] = [[] for _ in range(g.n)]
        for u in range(g.n):
            for item in fresh[u]:
                for w in adj[u]:
                    charge(_normalize(u, w), item_sizes[item])
                    incoming[w].append(item)
        fresh = [[] for _ in range(g.n)]
        for w in range(g.n):
            for item in incoming[w]:
                if item not in held[w]:
                    held[w].add(item)
                    fresh[w].append(item)
        rounds += 1
    return FloodResult(delivered=held, rounds=rounds)


def broadcast_scalars(g: Topology, values, ledger: CommLedger) -> list[float]:
    """Share one scalar per site with every site by flooding (2mn scalar-units)."""
    values = [float(v) for v in values]
    flood(g, [1] * g.n, ledger, unit="scalars")
    return values


def tree_upcast(tree: RootedTree, payload_sizes: list[int], ledger: CommLedger) -> int:
    """Send every site's payload to the root along tree edges.

    A payload at depth l crosses l edges, so the total charge is
    sum(depth(i) * size_i) point-units. Returns the total charged.
    """
    if len(payload_sizes) != tree.n:
        raise ValueError("need one payload size per site")
    total = 0
    for v in range(tree.n):
        for edge in tree.path_to_root(v):
            ledger.charge_points(edge, payload_sizes[v])
            total += payload_sizes[v]
    return total


def tree_scalar_roundtrip(tree: RootedTree, values, ledger: CommLedger) -> list[float]:
    """Converge-cast one scalar per site to the root, then broadcast the sum back.

    Charges sum(depth(i)) scalar-units upward plus one scalar per tree edge
    (n - 1) downward.
    """
    values = [float(v) for v in values]
    for v in range(tree.n):
        for edge in tree.path_to_root(v):
            ledger.charge_scalars(edge, 1)
    for v in range(tree.n):
        if v != tree.root:
            ledger.charge_scalars(_normalize(v, tree.parent[v]), 1)
    return values


class GraphComm:
    """Flooding communicator over a connected topology."""

    def __init__(self, graph: Topology, ledger: CommLedger | None = None):
        self.graph = graph
        self.ledger = ledger if ledger is not None else CommLedger()

    def broadcast_scalars(self, values) -> list[float]:
        return broadcast_scalars(self.graph, values, self.ledger)

    def share_portions(self, sizes: list[int]) -> None:
        flood(self.graph, sizes, self.ledger, unit="points")


class TreeComm:
    """Converge-cast communicator over a rooted spanning tree."""

    def __init__(self, tree: RootedTree, ledger: CommLedger | None = None):
        self.tree = tree
        self.ledger = ledger if ledger is not None else CommLedger()

    def broadcast_scalars(self, values) -> list[float]:
        return tree_scalar_roundtrip(self.tree, values, self.ledger)

    def share_portions(self, sizes: list[int]) -> None:
        tree_upcast(self.tree, sizes, self.ledger)


class NullComm:
    """No-op communicator for centralized runs; the ledger stays at zero."""

    def __init__(self):
        self.ledger = CommLedger()

    def broadcast_scalars(self, values) -> list[float]:
        return [float(v) for v in values]

    def share_portions(self, sizes: list[int]) -> None:
        pass


def save_topology(g: Topology, path) -> None:
    """Write the edge-list format: first line "n m", then "u v" per edge."""
    with open(path, "w") as fh:
        fh.write(f"{g.n} {g.m}\n")
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")


def load_topology(path) -> Topology:
    """Read the edge-list format written by :func:`save_topology`."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty topology file")
    try:
        n, m = (int(x) for x in lines[0].split())
    except ValueError as exc:
        raise ValueError(f"{path}: bad header line {lines[0]!r}") from exc
    if len(lines) - 1 != m:
        raise ValueError(f"{path}: header promises {m} edges, found {len(lines) - 1}")
    edges = []
    for ln in lines[1:]:
        u, v = (int(x) for x in ln.split())
        edges.append(_normalize(u, v))
    return Topology(n, tuple(sorted(edges)), kind="custom")
