"""Command line entry point.

    conndecode run <config.yaml> [-o DIR] [--no-plots]
    conndecode validate <config.yaml>
    conndecode synth <genspec.yaml> <out_dir>

Exit codes: 0 success, 1 some queue entries failed, 2 invalid config.
"""

import argparse
import logging
import sys
from pathlib import Path

import yaml

from .config import ConfigError, load_config
from .ingest import IngestError

EXIT_OK, EXIT_PARTIAL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("conndecode")


def _cmd_validate(args):
    from .runner import check_outcomes, load_data

    cfg = load_config(args.config)
    _, sheet = load_data(cfg)
    check_outcomes(cfg, sheet)
    print(f"{args.config}: ok ({len(cfg.outcomes)} outcome(s) x "
          f"{len(cfg.threshold_specs())} threshold(s))")
    return EXIT_OK


def _cmd_run(args):
    from .export import export_results
    from .plots import render_plots
    from .runner import run_config

    cfg = load_config(args.config)
    if args.output:
        cfg.output = str(Path(args.output).resolve())
    if args.workers:
        cfg.workers = args.workers
    bundle = run_config(cfg)
    export_results(bundle, cfg.output)
    if not args.no_plots:
        render_plots(bundle, cfg.output)
    for e in bundle.entries:
        status = "ok" if e.ok else f"FAILED ({e.error})"
        print(f"{e.outcome} / {e.label}: {status}")
    return EXIT_PARTIAL if bundle.failed else EXIT_OK


def _cmd_synth(args):
    from .synth import write_synthetic

    spec = yaml.safe_load(Path(args.spec).read_text())
    try:
        manifest, sheet = write_synthetic(spec, args.out_dir)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(f"wrote {manifest} and {sheet}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="conndecode", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a configuration and export results")
    r.add_argument("config")
    r.add_argument("-o", "--output", help="override the output directory")
    r.add_argument("-j", "--workers", type=int, help="override the worker pool size")
    r.add_argument("--no-plots", action="store_true")
    r.set_defaults(func=_cmd_run)

    v = sub.add_parser("validate", help="parse and validate a configuration")
    v.add_argument("config")
    v.set_defaults(func=_cmd_validate)

    s = sub.add_parser("synth", help="write a synthetic dataset")
    s.add_argument("spec")
    s.add_argument("out_dir")
    s.set_defaults(func=_cmd_synth)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, IngestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
