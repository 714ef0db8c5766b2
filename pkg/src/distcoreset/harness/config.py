"""Experiment configuration: flat key=value files and spec-string parsing."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields

import numpy as np

from ..network import (
    Topology,
    grid_topology,
    load_topology,
    preferential_topology,
    random_topology,
)
from ..solvers import SolverParams

METHODS = ("distributed", "combine", "zhang")
COMM_MODES = ("graph-flood", "tree-upcast")
OBJECTIVES = ("kmeans", "kmedian")


@dataclass
class ExperimentConfig:
    dataset: str = "synthetic:k_true=5,d=10,per_center=400,spread=0.2"
    objective: str = "kmeans"
    k: int = 5
    topology: str = "random:10:0.3"
    partition: str = "uniform"
    bandwidth: float | None = None  # similarity kernel; None = median heuristic
    method: str = "distributed"
    comm_mode: str = "graph-flood"
    sweep: list[int] = field(default_factory=lambda: [500])
    repetitions: int = 10
    seed: int | None = None
    out: str = "results.csv"
    max_iters: int = 100
    rel_tol: float = 1e-4
    weiszfeld_iters: int = 50
    weiszfeld_eps: float = 1e-10

    def solver_params(self) -> SolverParams:
        return SolverParams(
            max_iters=self.max_iters,
            rel_tol=self.rel_tol,
            weiszfeld_iters=self.weiszfeld_iters,
            weiszfeld_eps=self.weiszfeld_eps,
        )

    def validate(self) -> None:
        if self.seed is None:
            raise ValueError("a master seed is required (set seed=... or --seed)")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.comm_mode not in COMM_MODES:
            raise ValueError(f"unknown comm mode {self.comm_mode!r}; choose from {COMM_MODES}")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.method == "zhang" and self.comm_mode != "tree-upcast":
            raise ValueError("the tree-merge baseline only runs in tree-upcast mode")
        if not self.sweep:
            raise ValueError("sweep must contain at least one size")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


def parse_sweep(text: str) -> list[int]:
    values = [int(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]
    if not values:
        raise ValueError(f"empty sweep spec {text!r}")
    return values


_INT_KEYS = {"k", "repetitions", "seed", "max_iters", "weiszfeld_iters"}
_FLOAT_KEYS = {"bandwidth", "rel_tol", "weiszfeld_eps"}


def load_config(path) -> ExperimentConfig:
    """Parse a flat key=value config file (# starts a comment line)."""
    known = {f.name for f in fields(ExperimentConfig)}
    cfg = ExperimentConfig()
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}: line {lineno}: expected key=value")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in known:
                raise ValueError(f"{path}: line {lineno}: unknown key {key!r}")
            if key == "sweep":
                setattr(cfg, key, parse_sweep(value))
            elif key in _INT_KEYS:
                setattr(cfg, key, int(value))
            elif key in _FLOAT_KEYS:
                setattr(cfg, key, float(value))
            else:
                setattr(cfg, key, value)
    return cfg


def parse_kv_spec(spec: str) -> dict[str, str]:
    out = {}
    for item in spec.split(","):
        if not item.strip():
            continue
        key, _, value = item.partition("=")
        out[key.strip()] = value.strip()
    return out


def make_topology(spec: str, rng: np.random.Generator) -> Topology:
    """Build a topology from a spec string or an edge-list file path.

    Specs: "random:N:P" (connected Erdos-Renyi draw), "grid:RxC"
    (4-neighbor lattice), "preferential:N:ATTACH" (degree-proportional
    attachment). Anything naming an existing file is loaded instead.
    """
    if os.path.exists(spec):
        return load_topology(spec)
    parts = spec.split(":")
    kind = parts[0].lower()
    try:
        if kind == "random":
            n, p = int(parts[1]), float(parts[2])
            return random_topology(n, p, rng)
        if kind == "grid":
            rows, cols = (int(x) for x in parts[1].lower().split("x"))
            return grid_topology(rows, cols)
        if kind == "preferential":
            n, attach = int(parts[1]), int(parts[2])
            return preferential_topology(n, attach, rng)
    except (IndexError, ValueError) as exc:
        raise ValueError(f"bad topology spec {spec!r}: {exc}") from None
    raise ValueError(f"bad topology spec {spec!r} (no such file, unknown kind)")
