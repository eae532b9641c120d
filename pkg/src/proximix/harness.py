"""Experiment grid: load, split, augment per (strategy, d), train, evaluate, report."""

from __future__ import annotations

import csv
import json
import logging
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .classifiers import FAMILIES, TrainSpec, train
from .data import DatasetSchema, EncodedDataset, concat, load_dataset, split
from .metrics import REPORT_KEYS, FairnessReport, full_report
from .mixing import STRATEGIES, GenerationLog, MixConfig, SamplingStrategy, generate, to_dataset
from .recourse import RECOURSE_KEYS, RecourseReport, group_recourse_report

log = logging.getLogger(__name__)

DEFAULT_D_GRID = tuple(round(0.1 * i, 1) for i in range(11))
CELL_KEYS = ("dataset", "model", "strategy", "d", "baseline", "augmented_count")
CSV_COLUMNS = (*CELL_KEYS, *REPORT_KEYS, *RECOURSE_KEYS, "error")


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one grid run.

    ``gen_count`` of ``None`` generates 10% of the training rows per cell.
    Strategies are names from :data:`proximix.mixing.STRATEGIES` or
    ``{"name": ..., "z": ..., "y": ...}`` mappings.
    """

    dataset_path: str
    schema_path: str
    model_families: list = field(default_factory=lambda: ["logreg"])
    strategies: list = field(default_factory=lambda: list(STRATEGIES))
    d_grid: list = field(default_factory=lambda: list(DEFAULT_D_GRID))
    alpha: float = 1.0
    pool_size_K: int = 25
    min_neighbors: int = 5
    gen_count: Optional[int] = None
    test_fraction: float = 0.3
    stratify: bool = False
    seed: int = 42
    recourse: bool = False
    output_dir: str = "results"
    train: dict = field(default_factory=dict)

    def __post_init__(self):
        for d in self.d_grid:
            if not 0 <= d <= 1:
                raise ValueError(f"d values must lie in [0, 1], got {d}")
        for m in self.model_families:
            if m not in FAMILIES:
                raise ValueError(f"unknown model family {m!r}")
        self.resolved_strategies()

    def resolved_strategies(self) -> list[SamplingStrategy]:
        out = []
        for s in self.strategies:
            if isinstance(s, str):
                if s not in STRATEGIES:
                    raise ValueError(f"unknown strategy {s!r}; known: {sorted(STRATEGIES)}")
                out.append(STRATEGIES[s])
            else:
                out.append(SamplingStrategy.from_anchor(int(s["z"]), int(s["y"]), s.get("name", "")))
        return out

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        """Read a JSON config; relative paths resolve against the file's directory."""
        path = Path(path)
        raw = json.loads(path.read_text())
        base = path.parent
        for key in ("dataset_path", "schema_path", "output_dir"):
            if key in raw and not Path(raw[key]).is_absolute():
                raw[key] = str(base / raw[key])
        return cls(**raw)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ExperimentResult:
    dataset: str
    model: str
    strategy: Optional[str]
    d: Optional[float]
    baseline: bool
    augmented_count: int
    fairness: Optional[FairnessReport] = None
    recourse: Optional[RecourseReport] = None
    anchors_drawn: int = 0
    provenance: list = field(default_factory=list)
    error: Optional[str] = None

    @property
    def key(self):
        return (self.dataset, self.model, not self.baseline, self.strategy or "", -1.0 if self.d is None else self.d)

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "model": self.model,
            "strategy": self.strategy,
            "d": self.d,
            "baseline": self.baseline,
            "augmented_count": self.augmented_count,
            "fairness": None if self.fairness is None else self.fairness.to_dict(),
            "recourse": None if self.recourse is None else self.recourse.to_dict(),
            "anchors_drawn": self.anchors_drawn,
            "provenance": self.provenance,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentResult":
        return cls(
            dataset=d["dataset"],
            model=d["model"],
            strategy=d["strategy"],
            d=d["d"],
            baseline=d["baseline"],
            augmented_count=d["augmented_count"],
            fairness=None if d["fairness"] is None else FairnessReport.from_dict(d["fairness"]),
            recourse=None if d["recourse"] is None else RecourseReport.from_dict(d["recourse"]),
            anchors_drawn=d.get("anchors_drawn", 0),
            provenance=d.get("provenance", []),
            error=d.get("error"),
        )

    def csv_row(self) -> list:
        f = self.fairness.to_dict() if self.fairness else {}
        r = self.recourse.to_dict() if self.recourse else {}
        cells = {
            "dataset": self.dataset,
            "model": self.model,
            "strategy": self.strategy or "baseline",
            "d": "" if self.d is None else self.d,
            "baseline": int(self.baseline),
            "augmented_count": self.augmented_count,
            "error": self.error or "",
        }
        return [cells.get(k, f.get(k, r.get(k, ""))) for k in CSV_COLUMNS]


def cell_seed(seed: int, strategy_name: str) -> int:
    """Augmentation seed shared by every d of one strategy, so d sweeps reuse the same pairs."""
    ss = np.random.SeedSequence([seed, zlib.crc32(strategy_name.encode())])
    return int(ss.generate_state(1)[0])


def _train_spec(cfg: ExperimentConfig, family: str) -> TrainSpec:
    extra = dict(cfg.train.get(family, {}))
    extra.setdefault("seed", cfg.seed)
    if "hidden_layers" in extra:
        extra["hidden_layers"] = tuple(extra["hidden_layers"])
    return TrainSpec(family=family, **extra)


def _evaluate(result, model, train_ds, test, recourse):
    result.fairness = full_report(model, test)
    if recourse:
        result.recourse = group_recourse_report(model, test, train_ds)


def run_cell(task) -> ExperimentResult:
    """Run one grid cell. Errors are captured on the result rather than raised."""
    cfg, dataset_name, family, strategy, d, train_ds, test = task
    baseline = strategy is None
    result = ExperimentResult(dataset_name, family, None if baseline else strategy.name, d, baseline, 0)
    try:
        fit_on = train_ds
        if not baseline:
            mix = MixConfig(
                d=d,
                alpha=cfg.alpha,
                pool_size_K=cfg.pool_size_K,
                min_neighbors=cfg.min_neighbors,
                gen_count_M=cfg.gen_count or max(1, len(train_ds) // 10),
                seed=cell_seed(cfg.seed, strategy.name),
            )
            glog = GenerationLog()
            samples = generate(train_ds, strategy, mix, glog)
            fit_on = concat(train_ds, to_dataset(samples, train_ds))
            result.augmented_count = len(samples)
            result.anchors_drawn = glog.anchors_drawn
            result.provenance = [s.provenance() for s in samples]
        model = train(fit_on, _train_spec(cfg, family))
        _evaluate(result, model, train_ds, test, cfg.recourse)
    except Exception as exc:  # noqa: BLE001 - a failed cell must not stop the grid
        log.warning("cell %s/%s/%s/%s failed: %s", dataset_name, family, result.strategy, d, exc)
        result.error = f"{type(exc).__name__}: {exc}"
    return result


def prepare_data(cfg: ExperimentConfig):
    schema = DatasetSchema.load(cfg.schema_path)
    ds = load_dataset(cfg.dataset_path, schema)
    train_ds, test = split(ds, cfg.test_fraction, cfg.seed, stratify=cfg.stratify)
    return schema, train_ds, test


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("PROXIMIX_THREADS", "1")))
    except ValueError:
        return 1


def run_experiment(cfg: ExperimentConfig, data: Optional[tuple] = None) -> list[ExperimentResult]:
    """Run the baseline and every (model, strategy, d) cell of ``cfg``.

    Cells are independent and may run in parallel (``PROXIMIX_THREADS``);
    results are returned sorted by cell key either way.
    """
    schema, train_ds, test = data if data is not None else prepare_data(cfg)
    name = schema.name
    tasks = []
    for family in cfg.model_families:
        tasks.append((cfg, name, family, None, None, train_ds, test))
        for strategy in cfg.resolved_strategies():
            for d in cfg.d_grid:
                tasks.append((cfg, name, family, strategy, float(d), train_ds, test))
    workers = min(_workers(), len(tasks))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_cell, tasks))
    else:
        results = [run_cell(t) for t in tasks]
    return sorted(results, key=lambda r: r.key)


def _fmt(v):
    if v is None or v == "":
        return "-"
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def summary_table(results: list[ExperimentResult]) -> str:
    header = ["strategy", "d", "n_aug", *REPORT_KEYS]
    lines = [header]
    for r in results:
        f = r.fairness.to_dict() if r.fairness else {}
        lines.append([
            r.strategy or "baseline",
            _fmt(r.d),
            str(r.augmented_count),
            *(_fmt(f.get(k)) if not r.error else "ERR" for k in REPORT_KEYS),
        ])
    widths = [max(len(row[i]) for row in lines) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in lines) + "\n"


def emit_reports(results: list[ExperimentResult], output_dir, meta: Optional[dict] = None) -> list[Path]:
    """Write ``results.json``, ``results.csv`` and one summary table per (dataset, model)."""
    if not results:
        raise ValueError("no results to write")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    doc = {"meta": meta or {}, "results": [r.to_dict() for r in results]}
    p = out / "results.json"
    p.write_text(json.dumps(doc, indent=1, sort_keys=False) + "\n")
    written.append(p)

    p = out / "results.csv"
    with open(p, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in results:
            w.writerow(r.csv_row())
    written.append(p)

    groups: dict = {}
    for r in results:
        groups.setdefault((r.dataset, r.model), []).append(r)
    for (ds_name, model), rs in groups.items():
        p = out / f"summary_{ds_name}_{model}.txt"
        p.write_text(f"dataset: {ds_name}   model: {model}\n\n" + summary_table(rs))
        written.append(p)
    return written


def load_results(path) -> list[ExperimentResult]:
    doc = json.loads(Path(path).read_text())
    return [ExperimentResult.from_dict(d) for d in doc["results"]]


def run_and_report(cfg: ExperimentConfig) -> list[ExperimentResult]:
    schema, train_ds, test = prepare_data(cfg)
    results = run_experiment(cfg, (schema, train_ds, test))
    meta = {
        "config": {k: v for k, v in cfg.to_dict().items() if k != "output_dir"},
        "n_train": len(train_ds),
        "n_test": len(test),
        "feature_names": train_ds.feature_names,
    }
    emit_reports(results, cfg.output_dir, meta)
    return results
