"""Experiment orchestration: build, communicate, evaluate, persist.

A run sweeps coreset sizes; every (size, repetition) cell derives its own
RNG from the master seed by counter, so reruns of the same config produce
byte-identical result CSVs. Wall times are kept on the in-memory rows but
never written, for the same reason.
"""

from __future__ import annotations

import csv
import os
import time
from dataclasses import dataclass

import numpy as np

from ..baselines import combine, zhang_tree_merge
from ..coreset import build_distributed_coreset, union_coreset
from ..geometry import Objective, WeightedPointSet, cost
from ..network import CommLedger, GraphComm, TreeComm, spanning_tree
from ..partition import median_heuristic_bandwidth, partition
from ..solvers import SolverParams, refine, seed
from .config import ExperimentConfig, make_topology, parse_kv_spec
from .data import gen_synthetic, load_dataset

CSV_COLUMNS = (
    "method",
    "objective",
    "k",
    "topology",
    "partition",
    "t",
    "rep",
    "point_units",
    "scalar_units",
    "cost_ratio",
    "status",
)


@dataclass
class ResultRow:
    method: str
    objective: str
    k: int
    topology: str
    partition: str
    t: int
    rep: int
    point_units: int
    scalar_units: int
    cost_ratio: float
    status: str
    wall_time: float = 0.0  # in-memory only; excluded from the CSV

    def csv_values(self) -> list[str]:
        return [
            self.method,
            self.objective,
            str(self.k),
            self.topology,
            self.partition,
            str(self.t),
            str(self.rep),
            str(self.point_units),
            str(self.scalar_units),
            repr(self.cost_ratio),
            self.status,
        ]


def resolve_dataset(spec: str, rng: np.random.Generator) -> tuple[WeightedPointSet, np.ndarray | None]:
    """Load a CSV dataset or generate the synthetic mixture a spec describes."""
    if spec.startswith("synthetic:"):
        kv = parse_kv_spec(spec.split(":", 1)[1])
        P, centers = gen_synthetic(
            k_true=int(kv.get("k_true", 5)),
            d=int(kv.get("d", 10)),
            points_per_center=int(kv.get("per_center", 400)),
            spread=float(kv.get("spread", 0.2)),
            rng=rng,
        )
        return P, centers
    return load_dataset(spec), None


def evaluate(
    coreset: WeightedPointSet,
    P: WeightedPointSet,
    k: int,
    obj: Objective,
    rng: np.random.Generator,
    params: SolverParams = SolverParams(),
) -> float:
    """Cost ratio of coreset-derived centers over full-data centers.

    Both center sets come from the same seed-and-refine pipeline and both
    costs are measured on the full data. The coreset side solves on its
    nonnegative-weight entries only (sampling is undefined for negative
    mass); negative entries change nothing about the ratio, which never
    touches coreset weights.
    """
    keep = coreset.weights >= 0
    solvable = coreset.subset(keep)
    if len(solvable) == 0 or solvable.weights.sum() <= 0:
        raise ValueError("degenerate coreset: no positive-weight entries to solve on")
    coreset_rng, global_rng = rng.spawn(2)
    x_coreset = refine(solvable, seed(solvable, k, obj, coreset_rng), obj, params)
    x_global = refine(P, seed(P, k, obj, global_rng), obj, params)
    num = cost(P, x_coreset, obj)
    den = cost(P, x_global, obj)
    if den <= 0:
        return 1.0 if num <= 0 else float("inf")
    return num / den


def _run_one(
    P: WeightedPointSet,
    cfg: ExperimentConfig,
    t: int,
    rng: np.random.Generator,
    bandwidth: float | None,
) -> tuple[int, int, float]:
    obj = Objective(cfg.objective)
    params = cfg.solver_params()
    topology = make_topology(cfg.topology, rng)
    tree = spanning_tree(topology, rng) if cfg.comm_mode == "tree-upcast" else None
    sites = partition(
        P, topology.n, cfg.partition, rng, g=topology, bandwidth=bandwidth
    )

    if cfg.method == "distributed":
        comm = TreeComm(tree) if tree is not None else GraphComm(topology)
        portions, ledger = build_distributed_coreset(
            sites, cfg.k, t, obj, rng, comm=comm, params=params
        )
        comm.share_portions([p.size() for p in portions])
        coreset = union_coreset(portions)
    elif cfg.method == "combine":
        comm = TreeComm(tree) if tree is not None else GraphComm(topology)
        portions = combine(sites, cfg.k, t, obj, rng, params=params)
        comm.share_portions([p.size() for p in portions])
        ledger = comm.ledger
        coreset = union_coreset(portions)
    else:  # zhang
        ledger = CommLedger()
        portion = zhang_tree_merge(
            tree, sites, cfg.k, t, obj, rng, ledger, params=params
        )
        coreset = portion.as_weighted_set()

    ratio = evaluate(coreset, P, cfg.k, obj, rng, params=params)
    return ledger.point_units, ledger.scalar_units, ratio


def run_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    """Execute the full sweep x repetitions grid and persist rows to cfg.out.

    Failures in one cell are recorded in that row's status and do not stop
    the run. Per-cell RNGs derive from (master seed, sweep index, rep), so
    the ordering of execution cannot change any result.
    """
    cfg.validate()
    data_rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0,)))
    P, _true_centers = resolve_dataset(cfg.dataset, data_rng)

    bandwidth = cfg.bandwidth
    if cfg.partition == "similarity" and bandwidth is None:
        bandwidth = median_heuristic_bandwidth(P, data_rng)

    rows: list[ResultRow] = []
    for si, t in enumerate(cfg.sweep):
        for rep in range(cfg.repetitions):
            rng = np.random.default_rng(
                np.random.SeedSequence(cfg.seed, spawn_key=(1, si, rep))
            )
            start = time.perf_counter()
            try:
                pu, su, ratio = _run_one(P, cfg, t, rng, bandwidth)
                status = "ok"
            except Exception as exc:  # recorded, run continues
                pu, su, ratio = 0, 0, float("nan")
                status = f"{type(exc).__name__}: {exc}"
            rows.append(
                ResultRow(
                    method=cfg.method,
                    objective=cfg.objective,
                    k=cfg.k,
                    topology=cfg.topology,
                    partition=cfg.partition,
                    t=t,
                    rep=rep,
                    point_units=pu,
                    scalar_units=su,
                    cost_ratio=ratio,
                    status=status,
                    wall_time=time.perf_counter() - start,
                )
            )
    persist_rows(rows, cfg.out)
    write_metadata(cfg, bandwidth, P.dim, cfg.out + ".meta")
    return rows


def persist_rows(rows: list[ResultRow], path: str) -> None:
    """Append rows to a CSV file, writing the header only when new."""
    new_file = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if new_file:
            writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.csv_values())


def write_metadata(cfg: ExperimentConfig, bandwidth: float | None, d: int, path: str) -> None:
    lines = [
        f"seed={cfg.seed}",
        f"dataset={cfg.dataset}",
        f"objective={cfg.objective}",
        f"k={cfg.k}",
        f"topology={cfg.topology}",
        f"partition={cfg.partition}",
        f"bandwidth={'' if bandwidth is None else repr(float(bandwidth))}",
        f"method={cfg.method}",
        f"comm_mode={cfg.comm_mode}",
        f"sweep={','.join(str(t) for t in cfg.sweep)}",
        f"repetitions={cfg.repetitions}",
        f"solver=d2_seeding+lloyd_weiszfeld,max_iters={cfg.max_iters},"
        f"rel_tol={cfg.rel_tol!r},weiszfeld_iters={cfg.weiszfeld_iters},"
        f"weiszfeld_eps={cfg.weiszfeld_eps!r}",
        f"dimension={d}",
        f"unit_convention=1 scalar-unit = 1/(d+1) point-units when combined; d={d}",
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_rows(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def aggregate_results(results_path: str, out_path: str, svg_path: str | None = None) -> list[dict]:
    """Per-sweep aggregates of a results CSV; optionally draw a line chart.

    Groups rows by every config column, averaging measured units and cost
    ratios over ok repetitions. When the run's .meta file is present the
    combined unit count (points + scalars/(d+1)) is included too.
    """
    rows = read_rows(results_path)
    dim = None
    meta_path = results_path + ".meta"
    if os.path.exists(meta_path):
        with open(meta_path) as fh:
            for line in fh:
                if line.startswith("dimension="):
                    dim = int(line.partition("=")[2])

    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        key = (row["method"], row["objective"], row["k"], row["topology"], row["partition"], int(row["t"]))
        groups.setdefault(key, []).append(row)

    out = []
    for key in sorted(groups):
        members = groups[key]
        ok = [r for r in members if r["status"] == "ok"]
        record = {
            "method": key[0],
            "objective": key[1],
            "k": key[2],
            "topology": key[3],
            "partition": key[4],
            "t": key[5],
            "reps": len(members),
            "ok": len(ok),
            "mean_point_units": _mean(ok, "point_units"),
            "mean_scalar_units": _mean(ok, "scalar_units"),
            "mean_cost_ratio": _mean(ok, "cost_ratio"),
            "median_cost_ratio": _median(ok, "cost_ratio"),
        }
        if dim is not None:
            record["mean_combined_units"] = (
                record["mean_point_units"] + record["mean_scalar_units"] / (dim + 1)
            )
        out.append(record)

    if out:
        with open(out_path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(out[0].keys()), lineterminator="\n")
            writer.writeheader()
            writer.writerows(out)
    if svg_path is not None:
        _plot(out, svg_path)
    return out


def _mean(rows: list[dict], col: str) -> float:
    return float(np.mean([float(r[col]) for r in rows])) if rows else float("nan")


def _median(rows: list[dict], col: str) -> float:
    return float(np.median([float(r[col]) for r in rows])) if rows else float("nan")


def _plot(aggregates: list[dict], svg_path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    methods = sorted({a["method"] for a in aggregates})
    for method in methods:
        pts = sorted(
            (a["mean_point_units"], a["mean_cost_ratio"])
            for a in aggregates
            if a["method"] == method and np.isfinite(a["mean_cost_ratio"])
        )
        if pts:
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=method)
    ax.set_xlabel("point-units transmitted")
    ax.set_ylabel("cost ratio")
    ax.legend()
    fig.tight_layout()
    fig.savefig(svg_path)
    plt.close(fig)
