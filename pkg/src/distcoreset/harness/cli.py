"""Command-line interface: data/topology generation, runs, checks, reports."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .. import verify as verify_mod
from ..coreset import build_centralized_coreset, build_distributed_coreset, union_coreset
from ..geometry import Objective, WeightedPointSet
from ..network import CommLedger, GraphComm, flood, grid_topology, save_topology
from ..partition import partition
from ..solvers import local_approximation
from .config import ExperimentConfig, load_config, make_topology, parse_sweep
from .data import gen_synthetic, save_dataset
from .experiment import aggregate_results, resolve_dataset, run_experiment


def _cmd_gen_data(args) -> int:
    rng = np.random.default_rng(args.seed)
    P, centers = resolve_dataset(args.spec, rng)
    save_dataset(P, args.out)
    if args.centers_out and centers is not None:
        save_dataset(WeightedPointSet.unit(centers), args.centers_out)
    print(f"wrote {len(P)} points of dimension {P.dim} to {args.out}")
    return 0


def _cmd_gen_topology(args) -> int:
    rng = np.random.default_rng(args.seed)
    g = make_topology(args.spec, rng)
    save_topology(g, args.out)
    print(f"wrote {g.kind} topology with n={g.n}, m={g.m} to {args.out}")
    return 0


def _cmd_run(args) -> int:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    for key in (
        "dataset",
        "objective",
        "k",
        "topology",
        "partition",
        "bandwidth",
        "method",
        "comm_mode",
        "repetitions",
        "seed",
        "out",
    ):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    if args.sweep is not None:
        cfg.sweep = parse_sweep(args.sweep)
    cfg.validate()
    rows = run_experiment(cfg)
    ok = sum(1 for r in rows if r.status == "ok")
    print(f"{len(rows)} rows ({ok} ok) appended to {cfg.out}; metadata in {cfg.out}.meta")
    return 0 if ok == len(rows) else 1


def _cmd_report(args) -> int:
    aggregates = aggregate_results(args.results, args.out, svg_path=args.svg)
    print(f"wrote {len(aggregates)} aggregate rows to {args.out}")
    print("unit convention: combined = point_units + scalar_units/(d+1)")
    if args.svg:
        print(f"chart written to {args.svg}")
    return 0


def _mirrored_instance(rng: np.random.Generator):
    """Two sites that are exact mirror images, so local costs tie exactly."""
    a = rng.standard_normal((25, 2))
    site = WeightedPointSet.unit(a)
    return [site, WeightedPointSet.unit(-a)]


def _cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    checks: list[tuple[str, bool, str]] = []

    report = verify_mod.check_tech_bound(args.trials, rng)
    checks.append(
        (
            "squared-distance bound",
            report.passed and report.hypothesis_cases > 0,
            f"{report.hypothesis_cases} premise hits / {report.trials} trials",
        )
    )

    sites = _mirrored_instance(rng)
    b0, _ = local_approximation(sites[0], 3, Objective.KMEANS, rng)
    solutions = [b0, -b0]
    X = rng.standard_normal((3, 2)) * 2.0
    for obj in (Objective.KMEANS, Objective.KMEDIAN):
        rep = verify_mod.check_unbiased(sites, solutions, X, t=20, obj=obj, reps=500, rng=rng)
        checks.append(
            (
                f"sampling unbiasedness ({obj.value})",
                rep.passed,
                f"mean {rep.mean:.6g} vs truth {rep.truth:.6g} (stderr {rep.stderr:.3g})",
            )
        )

    data, _ = gen_synthetic(5, 10, 200, 0.2, rng)
    g = grid_topology(2, 2)
    sites4 = partition(data, 4, "uniform", rng)
    portions, _ = build_distributed_coreset(sites4, 5, 500, Objective.KMEANS, rng, comm=GraphComm(g))
    total = sum(p.total_weight() for p in portions)
    drift = abs(total - data.total_weight()) / data.total_weight()
    checks.append(("weight conservation", drift <= 1e-6, f"relative drift {drift:.2e}"))

    err = verify_mod.check_coreset(union_coreset(portions), data, Objective.KMEANS, 100, 5, rng)
    checks.append(("coreset quality (t=500)", err <= 0.15, f"max relative error {err:.4f}"))

    g9 = grid_topology(3, 3)
    ledger = CommLedger()
    flood(g9, [2] * g9.n, ledger)
    expect = 2 * g9.m * 2 * g9.n
    checks.append(
        ("flooding closed form", ledger.point_units == expect, f"{ledger.point_units} = 2m*sum(sizes)")
    )

    seed_val = int(rng.integers(2**32))
    one_site = [data]
    p_dist, _ = build_distributed_coreset(
        one_site, 5, 200, Objective.KMEDIAN, np.random.default_rng(seed_val)
    )
    p_cent = build_centralized_coreset(data, 5, 200, Objective.KMEDIAN, np.random.default_rng(seed_val))
    same = np.array_equal(p_dist[0].sampled.points, p_cent.sampled.points) and np.array_equal(
        p_dist[0].centers.weights, p_cent.centers.weights
    )
    checks.append(("single-site reduction", same, "distributed(n=1) == centralized"))

    violations = 0
    for _ in range(20):
        pts = rng.standard_normal((int(rng.integers(4, 11)), 2))
        inst = WeightedPointSet.unit(pts)
        k = int(rng.integers(1, 4))
        for obj in (Objective.KMEANS, Objective.KMEDIAN):
            opt = verify_mod.brute_force_optimal(inst, k, obj)
            _, heur = local_approximation(inst, k, obj, rng)
            if opt > heur * (1 + 1e-9) + 1e-12:
                violations += 1
    checks.append(("exhaustive-optimum dominance", violations == 0, f"{violations} violations / 40"))

    width = max(len(name) for name, _, _ in checks)
    failed = 0
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}")
        failed += 0 if ok else 1
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="distcoreset",
        description="Distributed coreset construction benchmarks for k-means/k-median",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate or convert a dataset CSV")
    p.add_argument("--spec", default="synthetic:k_true=5,d=10,per_center=400,spread=0.2")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--centers-out", default=None, help="also write the true centers")
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("gen-topology", help="generate a topology edge-list file")
    p.add_argument("--spec", required=True, help="random:N:P | grid:RxC | preferential:N:A")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_topology)

    p = sub.add_parser("run", help="run an experiment sweep")
    p.add_argument("--config", default=None, help="flat key=value config file")
    p.add_argument("--dataset", default=None)
    p.add_argument("--objective", default=None, choices=["kmeans", "kmedian"])
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--topology", default=None)
    p.add_argument("--partition", default=None, choices=["uniform", "similarity", "weighted", "degree"])
    p.add_argument("--bandwidth", type=float, default=None)
    p.add_argument("--method", default=None, choices=["distributed", "combine", "zhang"])
    p.add_argument("--comm-mode", dest="comm_mode", default=None, choices=["graph-flood", "tree-upcast"])
    p.add_argument("--sweep", default=None, help="comma-separated sizes, e.g. 250,500,1000")
    p.add_argument("--repetitions", type=int, default=None)
    p.add_argument("--seed", type=int, default=None, help="master seed (required)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("verify", help="run the built-in correctness checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100_000)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("report", help="aggregate a results CSV")
    p.add_argument("--results", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", default=None, help="optional line chart output")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
