"""Command-line entry point.

Exit status: 0 on success, 1 on a configuration or usage error, 2 on a
runtime failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from .config import EXPERIMENTS, ConfigError, load_config
from .harness import emit_report, run_experiment, version_string

log = logging.getLogger("fdagodec")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fdagodec", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=version_string())
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run an experiment and write its report")
    run.add_argument("--config", required=True, help="experiment config (JSON)")
    run.add_argument("--trials", type=int, help="override the trial count")
    run.add_argument("--seed", type=int, help="override the base seed")
    run.add_argument("--out", help="override the output directory")
    run.add_argument("--experiment", choices=EXPERIMENTS, help="override the experiment type")
    run.add_argument("--workers", type=int, default=1, help="parallel worker processes")

    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("--config", required=True, help="experiment config (JSON)")
    return p


def _apply_overrides(cfg, args):
    changes = {}
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.out is not None:
        changes["output_dir"] = args.out
    if args.experiment is not None:
        changes["experiment"] = args.experiment
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("seed must be non-negative")
        changes["scene"] = dataclasses.replace(cfg.scene, seed=args.seed)
    try:
        return dataclasses.replace(cfg, **changes)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "validate":
            print(f"{args.config}: ok ({cfg.experiment}, {cfg.trials} trials)")
            return EXIT_OK
        cfg = _apply_overrides(cfg, args)
        if args.workers < 1:
            raise ConfigError("workers must be >= 1")
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG

    try:
        Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        log.error("output directory %s is not writable: %s", cfg.output_dir, exc)
        return EXIT_RUNTIME

    try:
        report = emit_report(run_experiment(cfg, workers=args.workers), cfg.output_dir)
    except Exception as exc:  # surfaced as a runtime failure, not a traceback
        log.error("run failed: %s", exc)
        return EXIT_RUNTIME
    for path in report:
        log.info("wrote %s", path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
