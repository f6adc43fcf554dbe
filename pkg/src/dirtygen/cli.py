"""Command-line front end: generate, validate, evaluate.

Exit codes: 0 success, 1 configuration error, 2 generation or evaluation
error, 3 I/O error. Human-readable output goes to stdout, machine artifacts
to files, error messages to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .config import load_config
from .datagen import generate_clean_dataset
from .errorplan import applicable_population, format_plan, plan_errors, spec_target_count
from .evalkit import score
from .exceptions import ConfigError, DirtygenError, EvaluationError, GenerationError
from .inject import inject_stream, realized_counts
from .output import (
    DatasetWriter,
    ErrorLogWriter,
    read_dataset,
    read_error_log,
    write_manifest,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_GENERATION = 2
EXIT_IO = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirtygen",
        description=(
            "Generate clean and deliberately dirtied tabular datasets with a "
            "cell-level error log, and score cleaning tools against them."
        ),
    )
    parser.add_argument("--version", action="version", version=f"dirtygen {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate clean, dirty, errors.log, run-manifest.json")
    gen.add_argument("--config", required=True, help="path to the JSON run configuration")
    gen.add_argument("--seed", type=int, default=None, help="override the config seed")
    gen.add_argument("--out", default=None, help="override the output directory")
    gen.add_argument(
        "--emit-plan", action="store_true", help="print the error plan, one entry per line"
    )

    val = sub.add_parser("validate", help="parse the config and print target counts")
    val.add_argument("--config", required=True, help="path to the JSON run configuration")

    ev = sub.add_parser("evaluate", help="score a repaired dataset against the ground truth")
    ev.add_argument("--clean", required=True, help="clean dataset file")
    ev.add_argument("--dirty", required=True, help="dirty dataset file")
    ev.add_argument("--repaired", required=True, help="repaired dataset file (null line = deleted row)")
    ev.add_argument("--log", required=True, help="error log file")
    ev.add_argument("--report", default=None, help="write the metrics report to this JSON file")
    return parser


def cmd_generate(args) -> int:
    started = time.monotonic()
    try:
        config = load_config(args.config, seed_override=args.seed, output_dir_override=args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        plan = plan_errors(config)
        if args.emit_plan:
            text = format_plan(plan)
            if text:
                print(text)
        for warning in plan.warnings:
            print(f"warning: {warning}", file=sys.stderr)

        out = config.output
        out.directory.mkdir(parents=True, exist_ok=True)
        clean_writer = DatasetWriter(out, "clean", config.tuple_count)
        dirty_writer = DatasetWriter(out, "dirty", config.tuple_count + plan.inserted_count)
        counts: dict[str, int] = {}

        def clean_and_tee():
            for record in generate_clean_dataset(config):
                clean_writer.write(record)
                yield record

        with open(out.log_path, "w", encoding="utf-8", newline="\n") as log_file:
            log_writer = ErrorLogWriter(log_file, seed=config.seed, config_hash=config.config_hash)
            for dirty_record, entries in inject_stream(clean_and_tee(), plan, config):
                dirty_writer.write(dirty_record)
                for entry in entries:
                    log_writer.write(entry)
                for error_type, amount in realized_counts(entries).items():
                    counts[error_type] = counts.get(error_type, 0) + amount
        clean_paths = clean_writer.close()
        dirty_paths = dirty_writer.close()

        manifest = {
            "tool": "dirtygen",
            "version": __version__,
            "config_hash": config.config_hash,
            "seed": config.seed,
            "tuple_count": config.tuple_count,
            "inserted_count": plan.inserted_count,
            "dirty_count": config.tuple_count + plan.inserted_count,
            "error_counts": dict(sorted(counts.items())),
            "duration_seconds": round(time.monotonic() - started, 3),
        }
        write_manifest(out, manifest)
    except GenerationError as exc:
        print(f"generation error: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO

    print(f"clean:    {', '.join(str(p) for p in clean_paths)} ({config.tuple_count} records)")
    print(
        f"dirty:    {', '.join(str(p) for p in dirty_paths)} "
        f"({config.tuple_count + plan.inserted_count} records)"
    )
    print(f"log:      {out.log_path}")
    print(f"manifest: {out.manifest_path}")
    if counts:
        print("realized error counts:")
        for error_type, amount in sorted(counts.items()):
            print(f"  {error_type:<40} {amount}")
    else:
        print("realized error counts: none (empty plan)")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"config ok: {len(config.schema)} attributes, {config.tuple_count} tuples, seed {config.seed}")
    print(f"config hash: sha256:{config.config_hash}")
    if config.errors:
        print(f"{'error type':<40} {'attributes':<28} {'population':>10} {'target':>8}")
        for spec in config.errors:
            targets = ",".join(spec.target_attributes) if spec.target_attributes else "-"
            if spec.error_type == "bias":
                targets = spec.params["target_attribute"]
            population = applicable_population(spec, config)
            print(
                f"{spec.error_type:<40} {targets:<28} {population:>10} "
                f"{spec_target_count(spec, config):>8}"
            )
    else:
        print("no error specs declared")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    try:
        clean = [r for r in read_dataset(args.clean)]
        dirty = [r for r in read_dataset(args.dirty)]
        repaired = [r for r in read_dataset(args.repaired, allow_deleted=True)]
        log = read_error_log(args.log)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DirtygenError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_GENERATION

    try:
        metrics = score(clean, dirty, repaired, log)
    except EvaluationError as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return EXIT_GENERATION

    if args.report:
        try:
            report_path = Path(args.report)
            report_path.parent.mkdir(parents=True, exist_ok=True)
            with open(report_path, "w", encoding="utf-8", newline="\n") as fh:
                json.dump(metrics.to_dict(), fh, indent=2, sort_keys=True)
                fh.write("\n")
        except OSError as exc:
            print(f"i/o error: {exc}", file=sys.stderr)
            return EXIT_IO

    overall = metrics.overall
    print(f"{'metric':<24} {'value':>8}")
    for name, value in overall.to_dict().items():
        print(f"{name:<24} {value:>8.4f}")
    counts = metrics.counts
    print(
        f"units={counts['units']} flagged={counts['flagged']} logged={counts['logged']} "
        f"tp={counts['true_positives']} fp={counts['false_positives']} "
        f"fn={counts['false_negatives']} correct={counts['correct_repairs']}"
    )
    if metrics.per_error_type:
        print(f"{'error type':<40} {'recall':>8} {'repair':>8}")
        for error_type, m in sorted(metrics.per_error_type.items()):
            print(f"{error_type:<40} {m.detection_recall:>8.4f} {m.repair_recall:>8.4f}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "generate":
        return cmd_generate(args)
    if args.command == "validate":
        return cmd_validate(args)
    return cmd_evaluate(args)


if __name__ == "__main__":
    sys.exit(main())
