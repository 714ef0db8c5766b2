import numpy as np
import pytest

from distcoreset.geometry import Objective, WeightedPointSet, cost
from distcoreset.harness.cli import main as cli_main
from distcoreset.harness.config import ExperimentConfig, load_config, make_topology, parse_sweep
from distcoreset.harness.data import gen_synthetic, load_dataset, save_dataset
from distcoreset.harness.experiment import (
    CSV_COLUMNS,
    aggregate_results,
    evaluate,
    read_rows,
    run_experiment,
)
from distcoreset.solvers import seed


def test_gen_synthetic_degenerate_spread():
    P, centers = gen_synthetic(1, 3, 20, 0.0, np.random.default_rng(0))
    assert len(P) == 20
    assert np.allclose(P.points, centers[0])


def test_gen_synthetic_paper_scale_counts():
    P, centers = gen_synthetic(5, 10, 20_000, 1.0, np.random.default_rng(1))
    assert len(P) == 100_000
    assert centers.shape == (5, 10)


def test_true_centers_beat_one_seeding_round():
    wins = 0
    for s in range(10):
        rng = np.random.default_rng(s)
        P, centers = gen_synthetic(4, 8, 150, 0.2, rng)
        seeded = seed(P, 4, Objective.KMEANS, rng)
        wins += cost(P, centers, Objective.KMEANS) <= cost(P, seeded, Objective.KMEANS)
    assert wins >= 9


def test_load_dataset_round_trip(tmp_path):
    path = tmp_path / "pts.csv"
    path.write_text("0,0\n3,4\n")
    P = load_dataset(path)
    assert P.points.tolist() == [[0.0, 0.0], [3.0, 4.0]]
    assert P.weights.tolist() == [1.0, 1.0]

    out = tmp_path / "back.csv"
    save_dataset(P, out)
    again = load_dataset(out)
    assert np.array_equal(again.points, P.points)


def test_load_dataset_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ValueError, match="empty"):
        load_dataset(empty)

    header = tmp_path / "header.csv"
    header.write_text("x,y\n1,2\n")
    with pytest.raises(ValueError, match="line 1"):
        load_dataset(header)

    ragged = tmp_path / "ragged.csv"
    ragged.write_text("1,2\n3,4,5\n")
    with pytest.raises(ValueError, match="line 2"):
        load_dataset(ragged)

    infinite = tmp_path / "inf.csv"
    infinite.write_text("1,2\n3,inf\n")
    with pytest.raises(ValueError, match="line 2"):
        load_dataset(infinite)


def test_evaluate_self_comparison():
    rng = np.random.default_rng(2)
    P, _ = gen_synthetic(3, 5, 150, 1.0, rng)
    ratios = [
        evaluate(P, P, 3, Objective.KMEANS, np.random.default_rng(s)) for s in range(10)
    ]
    assert 0.95 <= float(np.median(ratios)) <= 1.05


def test_evaluate_rejects_degenerate_coreset():
    P = WeightedPointSet([[0.0, 0.0], [1.0, 1.0]], [1.0, 1.0])
    bad = WeightedPointSet([[0.0, 0.0]], [-1.0])
    with pytest.raises(ValueError, match="degenerate"):
        evaluate(bad, P, 1, Objective.KMEANS, np.random.default_rng(0))


def test_config_file_round_trip(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text(
        "# sample config\n"
        "dataset=synthetic:k_true=3,d=4,per_center=50,spread=0.5\n"
        "objective=kmedian\n"
        "k=3\n"
        "topology=grid:2x2\n"
        "partition=uniform\n"
        "method=combine\n"
        "comm_mode=graph-flood\n"
        "sweep=40,80\n"
        "repetitions=2\n"
        "seed=9\n"
    )
    cfg = load_config(path)
    assert cfg.objective == "kmedian"
    assert cfg.sweep == [40, 80]
    assert cfg.seed == 9
    cfg.validate()


def test_config_rejects_unknown_key(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("nonsense=1\n")
    with pytest.raises(ValueError, match="unknown key"):
        load_config(path)


def test_config_validation_rules():
    cfg = ExperimentConfig(seed=None)
    with pytest.raises(ValueError, match="seed"):
        cfg.validate()
    cfg = ExperimentConfig(seed=1, method="zhang", comm_mode="graph-flood")
    with pytest.raises(ValueError, match="tree-upcast"):
        cfg.validate()
    assert parse_sweep("10;20,30") == [10, 20, 30]


def test_make_topology_specs_and_files(tmp_path):
    rng = np.random.default_rng(3)
    assert make_topology("grid:3x4", rng).m == 17
    assert make_topology("random:8:1.0", rng).m == 28
    g = make_topology("preferential:10:2", rng)
    assert g.n == 10
    from distcoreset.network import save_topology

    path = tmp_path / "topo.txt"
    save_topology(g, str(path))
    loaded = make_topology(str(path), rng)
    assert loaded.edges == g.edges
    with pytest.raises(ValueError, match="topology spec"):
        make_topology("hexagon:9", rng)


def small_config(tmp_path, **overrides) -> ExperimentConfig:
    cfg = ExperimentConfig(
        dataset="synthetic:k_true=3,d=4,per_center=60,spread=0.8",
        objective="kmeans",
        k=3,
        topology="random:5:0.6",
        partition="uniform",
        method="distributed",
        comm_mode="graph-flood",
        sweep=[30, 60],
        repetitions=2,
        seed=123,
        out=str(tmp_path / "results.csv"),
    )
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg


def test_run_experiment_row_grid_and_determinism(tmp_path):
    cfg = small_config(tmp_path)
    rows = run_experiment(cfg)
    assert len(rows) == 4  # 2 sweep values x 2 repetitions
    assert all(r.status == "ok" for r in rows)
    assert all(r.cost_ratio > 0 for r in rows)

    first = (tmp_path / "results.csv").read_bytes()
    cfg2 = small_config(tmp_path, out=str(tmp_path / "again.csv"))
    run_experiment(cfg2)
    assert (tmp_path / "again.csv").read_bytes() == first
    meta = (tmp_path / "results.csv.meta").read_text()
    assert "seed=123" in meta
    assert "unit_convention" in meta


def test_run_experiment_records_stage_errors(tmp_path):
    # 3 points cannot cover 5 sites: the partition stage fails, the row
    # records it, and the run still completes
    data = tmp_path / "tiny.csv"
    data.write_text("0,0\n1,1\n2,2\n")
    cfg = small_config(tmp_path, dataset=str(data), topology="random:5:0.9", sweep=[10], repetitions=1)
    rows = run_experiment(cfg)
    assert len(rows) == 1
    assert rows[0].status != "ok"
    assert "RuntimeError" in rows[0].status


def test_csv_schema_and_aggregation(tmp_path):
    cfg = small_config(tmp_path)
    run_experiment(cfg)
    rows = read_rows(cfg.out)
    assert tuple(rows[0].keys()) == CSV_COLUMNS
    agg_path = tmp_path / "agg.csv"
    svg_path = tmp_path / "chart.svg"
    aggregates = aggregate_results(cfg.out, str(agg_path), svg_path=str(svg_path))
    assert len(aggregates) == 2
    assert {a["t"] for a in aggregates} == {30, 60}
    assert all(a["ok"] == 2 for a in aggregates)
    assert "mean_combined_units" in aggregates[0]
    assert svg_path.exists()


def test_ledger_matches_closed_forms_for_both_modes(tmp_path):
    from distcoreset.network import grid_topology

    cfg = small_config(tmp_path, topology="grid:2x3", sweep=[24], repetitions=1)
    rows = run_experiment(cfg)
    g = grid_topology(2, 3)
    # every portion floods once over every edge in graph mode
    assert rows[0].scalar_units == 2 * g.m * g.n
    assert rows[0].point_units % (2 * g.m) == 0

    cfg_tree = small_config(
        tmp_path, comm_mode="tree-upcast", topology="grid:2x3",
        sweep=[24], repetitions=1, out=str(tmp_path / "tree.csv"),
    )
    rows_tree = run_experiment(cfg_tree)
    assert rows_tree[0].status == "ok"
    assert rows_tree[0].point_units < rows[0].point_units  # upcast beats flooding


def test_run_experiment_zhang_method(tmp_path):
    cfg = small_config(
        tmp_path,
        method="zhang",
        comm_mode="tree-upcast",
        topology="grid:2x2",
        sweep=[20],
        repetitions=2,
        out=str(tmp_path / "zhang.csv"),
    )
    rows = run_experiment(cfg)
    assert all(r.status == "ok" for r in rows)
    assert all(r.point_units > 0 for r in rows)
    assert all(r.scalar_units == 0 for r in rows)  # merge needs no cost round


def test_cli_run_and_report(tmp_path, capsys):
    out = tmp_path / "cli.csv"
    rc = cli_main(
        [
            "run",
            "--dataset", "synthetic:k_true=2,d=3,per_center=40,spread=0.6",
            "--k", "2",
            "--topology", "random:4:0.8",
            "--partition", "uniform",
            "--method", "combine",
            "--sweep", "16",
            "--repetitions", "2",
            "--seed", "5",
            "--out", str(out),
        ]
    )
    assert rc == 0
    assert out.exists()
    rc = cli_main(["report", "--results", str(out), "--out", str(tmp_path / "agg.csv")])
    assert rc == 0
    assert "aggregate rows" in capsys.readouterr().out


def test_evaluate_solves_on_nonnegative_entries_of_signed_coreset():
    rng = np.random.default_rng(7)
    P, _ = gen_synthetic(3, 4, 120, 0.8, rng)
    pts = np.concatenate([P.points[:50], P.points[:3]])
    weights = np.concatenate([np.full(50, 2.0), [-1.0, -1.0, -1.0]])
    signed = WeightedPointSet(pts, weights)
    ratio = evaluate(signed, P, 3, Objective.KMEANS, np.random.default_rng(8))
    assert np.isfinite(ratio) and ratio > 0


def test_cli_clean_error_exit(tmp_path, capsys):
    rc = cli_main(["run", "--sweep", "10", "--out", str(tmp_path / "x.csv")])
    assert rc == 2  # missing seed is reported, not raised
    assert "seed" in capsys.readouterr().err


def test_cli_gen_commands(tmp_path):
    data = tmp_path / "d.csv"
    rc = cli_main(
        ["gen-data", "--spec", "synthetic:k_true=2,d=2,per_center=10,spread=0.1",
         "--seed", "1", "--out", str(data)]
    )
    assert rc == 0
    assert len(load_dataset(data)) == 20
    topo = tmp_path / "t.txt"
    rc = cli_main(["gen-topology", "--spec", "grid:2x2", "--seed", "1", "--out", str(topo)])
    assert rc == 0
    assert make_topology(str(topo), np.random.default_rng(0)).m == 4
