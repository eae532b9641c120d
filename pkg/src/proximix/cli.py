"""Command line entry point: ``proximix run`` and ``proximix synth``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .classifiers import FAMILIES
from .harness import ExperimentConfig, run_and_report
from .mixing import STRATEGIES


def _parse_d(text):
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="proximix", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an augmentation / evaluation grid")
    run.add_argument("--config", help="JSON experiment config")
    run.add_argument("--dataset", help="CSV file")
    run.add_argument("--schema", help="JSON schema file")
    run.add_argument("--model", choices=[*FAMILIES, "all"])
    run.add_argument("--strategy", help="strategy name or 'all'")
    run.add_argument("--d", type=_parse_d, help="comma separated balancing degrees")
    run.add_argument("--gen-count", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--recourse", action="store_true", default=None)
    run.add_argument("--out")
    run.add_argument("-v", "--verbose", action="store_true")

    synth = sub.add_parser("synth", help="write the synthetic biased dataset and its schema")
    synth.add_argument("--out", required=True, help="output directory")
    synth.add_argument("--rows", type=int, default=2000)
    synth.add_argument("--label-bias", type=float, default=0.5)
    synth.add_argument("--seed", type=int, default=0)
    return parser


def config_from_args(args) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_file(args.config)
    else:
        if not (args.dataset and args.schema):
            raise SystemExit("either --config or both --dataset and --schema are required")
        cfg = ExperimentConfig(dataset_path=args.dataset, schema_path=args.schema)
    over = {}
    if args.dataset:
        over["dataset_path"] = args.dataset
    if args.schema:
        over["schema_path"] = args.schema
    if args.model:
        over["model_families"] = list(FAMILIES) if args.model == "all" else [args.model]
    if args.strategy:
        over["strategies"] = list(STRATEGIES) if args.strategy == "all" else [args.strategy]
    if args.d is not None:
        over["d_grid"] = args.d
    if args.gen_count is not None:
        over["gen_count"] = args.gen_count
    if args.seed is not None:
        over["seed"] = args.seed
    if args.recourse:
        over["recourse"] = True
    if args.out:
        over["output_dir"] = args.out
    return replace(cfg, **over)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "synth":
        from .synthetic import write_dataset

        csv_path, schema_path = write_dataset(args.out, args.rows, args.label_bias, args.seed)
        print(f"wrote {csv_path} and {schema_path}")
        return 0

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        print(f"proximix: {exc}", file=sys.stderr)
        return 1
    results = run_and_report(cfg)
    failed = [r for r in results if r.error]
    print(f"{len(results)} cells, {len(failed)} failed; reports in {cfg.output_dir}")
    return 2 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
