import csv
import json
from pathlib import Path

import numpy as np
import pytest

from proximix.cli import main
from proximix.harness import (
    CSV_COLUMNS,
    ExperimentConfig,
    cell_seed,
    load_results,
    prepare_data,
    run_and_report,
    run_experiment,
)
from proximix.synthetic import write_dataset


@pytest.fixture(scope="module")
def synth_files(tmp_path_factory):
    return write_dataset(tmp_path_factory.mktemp("synth"), n=400, seed=0)


def base_config(files, out, **kw):
    csv_path, schema_path = files
    return ExperimentConfig(dataset_path=str(csv_path), schema_path=str(schema_path), output_dir=str(out), **kw)


def test_config_validation(synth_files, tmp_path):
    with pytest.raises(ValueError):
        base_config(synth_files, tmp_path, d_grid=[1.5])
    with pytest.raises(ValueError):
        base_config(synth_files, tmp_path, model_families=["svm"])
    with pytest.raises(ValueError):
        base_config(synth_files, tmp_path, strategies=["C9"])
    cfg = base_config(synth_files, tmp_path, strategies=[{"name": "custom", "z": 0, "y": 1}])
    s = cfg.resolved_strategies()[0]
    assert s.partner_z == 1 and s.name == "custom"


def test_from_file_resolves_relative_paths(tmp_path):
    (tmp_path / "cfg.json").write_text(json.dumps({"dataset_path": "a.csv", "schema_path": "s.json", "d_grid": [0.5]}))
    cfg = ExperimentConfig.from_file(tmp_path / "cfg.json")
    assert cfg.dataset_path == str(tmp_path / "a.csv") and cfg.d_grid == [0.5]


def test_cell_seed_ignores_d_but_not_strategy():
    assert cell_seed(42, "C1C1p") == cell_seed(42, "C1C1p")
    assert cell_seed(42, "C1C1p") != cell_seed(42, "C2C1p")
    assert cell_seed(1, "C1C1p") != cell_seed(2, "C1C1p")


@pytest.fixture(scope="module")
def grid(synth_files, tmp_path_factory):
    out = tmp_path_factory.mktemp("grid")
    cfg = base_config(synth_files, out, d_grid=[0.0, 0.2, 0.4, 0.6, 0.8, 1.0], gen_count=30)
    return cfg, run_and_report(cfg)


def test_grid_shape(grid):
    cfg, results = grid
    assert len(results) == 1 + 4 * 6
    assert sum(r.baseline for r in results) == 1
    assert results[0].baseline and results[0].strategy is None
    assert all(r.error is None for r in results)
    assert {(r.strategy, r.d) for r in results if not r.baseline} == {
        (s, d) for s in ("C1C1p", "C2C1p", "C3C3p", "C4C3p") for d in cfg.d_grid
    }


def test_metric_ranges(grid):
    for r in grid[1]:
        f = r.fairness
        assert 0 <= f.acc <= 1 and 0 <= f.f1 <= 1
        assert -1 <= f.dp_diff <= 1 and -1 <= f.eodds_diff <= 1
        assert r.augmented_count == (0 if r.baseline else 30)


def test_csv_and_json(grid):
    cfg, results = grid
    with open(f"{cfg.output_dir}/results.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 26
    back = load_results(f"{cfg.output_dir}/results.json")
    assert [r.to_dict() for r in back] == [r.to_dict() for r in results]
    assert (Path(cfg.output_dir) / "summary_synthetic_logreg.txt").is_file()


def test_generation_uses_training_rows_only(grid):
    cfg, results = grid
    _, train_ds, _ = prepare_data(cfg)
    for r in results:
        for p in r.provenance:
            assert 0 <= p["anchor_index"] < len(train_ds)
            assert 0 <= p["partner_index"] < len(train_ds)


def test_same_pairs_across_d(grid):
    # mixing partners depend on the strategy only, not on d
    by = {}
    for r in grid[1]:
        if not r.baseline:
            pairs = [(p["anchor_index"], p["partner_index"], p["lambda"]) for p in r.provenance]
            by.setdefault(r.strategy, set()).add(tuple(pairs))
    assert all(len(v) == 1 for v in by.values())


def test_empty_d_grid_runs_baseline_only(synth_files, tmp_path):
    results = run_experiment(base_config(synth_files, tmp_path, d_grid=[]))
    assert len(results) == 1 and results[0].baseline


def test_byte_identical_reruns(synth_files, tmp_path):
    texts = []
    for run in ("a", "b"):
        cfg = base_config(synth_files, tmp_path / run, d_grid=[0.3], strategies=["C2C1p"], recourse=True)
        run_and_report(cfg)
        texts.append((tmp_path / run / "results.json").read_bytes())
    assert texts[0] == texts[1]


def test_failed_cell_is_recorded(tmp_path):
    # label_bias=1 leaves no positive unprivileged rows, so C2C1p has no anchors
    files = write_dataset(tmp_path / "data", n=300, label_bias=1.0, seed=0)
    results = run_experiment(base_config(files, tmp_path / "out", d_grid=[0.5], strategies=["C1C1p", "C2C1p"]))
    errs = {r.strategy: r.error for r in results}
    assert errs[None] is None and errs["C1C1p"] is None
    assert errs["C2C1p"] and "EmptySubgroup" in errs["C2C1p"]


def test_cli_run_with_overrides(synth_files, tmp_path, capsys):
    csv_path, schema_path = synth_files
    code = main([
        "run", "--dataset", str(csv_path), "--schema", str(schema_path), "--model", "tree",
        "--strategy", "C4C3p", "--d", "0.1,0.9", "--gen-count", "12", "--seed", "3", "--out", str(tmp_path),
    ])
    assert code == 0
    results = load_results(tmp_path / "results.json")
    assert [(r.model, r.strategy, r.d) for r in results] == [("tree", None, None), ("tree", "C4C3p", 0.1), ("tree", "C4C3p", 0.9)]
    assert all(r.augmented_count == 12 for r in results[1:])
    assert json.loads((tmp_path / "results.json").read_text())["meta"]["config"]["seed"] == 3
    assert "3 cells, 0 failed" in capsys.readouterr().out


def test_cli_config_file_and_exit_codes(tmp_path):
    files = write_dataset(tmp_path / "data", n=300, label_bias=1.0, seed=0)
    cfg = {"dataset_path": str(files[0]), "schema_path": str(files[1]), "d_grid": [0.5], "strategies": ["C2C1p"], "recourse": True}
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    assert main(["run", "--config", str(tmp_path / "cfg.json"), "--out", str(tmp_path / "o")]) == 2
    assert main(["run", "--config", str(tmp_path / "cfg.json"), "--strategy", "nope"]) == 1


def test_cli_synth(tmp_path):
    assert main(["synth", "--out", str(tmp_path), "--rows", "50"]) == 0
    assert len((tmp_path / "synthetic.csv").read_text().splitlines()) == 51


def test_parallel_matches_serial(synth_files, tmp_path, monkeypatch):
    cfg = base_config(synth_files, tmp_path, d_grid=[0.5], strategies=["C1C1p", "C3C3p"])
    serial = [r.to_dict() for r in run_experiment(cfg)]
    monkeypatch.setenv("PROXIMIX_THREADS", "2")
    parallel = [r.to_dict() for r in run_experiment(cfg)]
    assert serial == parallel
    assert np.isfinite([r["fairness"]["acc"] for r in serial]).all()
