"""walkersim command line.

    walkersim run     [--config scenario.json] --out DIR [--seed N] [--exclude-steps N]
    walkersim batch   [--config batch.json] --out DIR [--seed N] [--variant student|welch|paired] [--jobs N]
    walkersim analyze --left L.csv --right R.csv [--path-length 8] [--out features.json]
    walkersim plot    --report report.json --out DIR

Exit codes: 0 ok, 2 configuration or usage error, 3 simulation did not
complete (or a batch run failed), 4 input format error, 1 anything else.
Errors are printed to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import analyze_traces
from .batch import default_batch, load_batch, run_batch
from .config import SCHEMA_VERSION, ScenarioConfig, load_scenario
from .errors import ConfigError, FormatError, WalkerSimError
from .gaitgen import Foot
from .io import dumps, read_force_csv, read_json, write_json, write_run_outputs
from .kernel import run_scenario
from .plots import write_plots
from .pwad import ContactSensorParams
from .stats import TTestVariant

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_INCOMPLETE, EXIT_FORMAT = 0, 1, 2, 3, 4

log = logging.getLogger("walkersim")


def _error(kind: str, message: str, **extra) -> dict:
    err = {"type": kind, "message": message}
    err.update({k: v for k, v in extra.items() if v is not None})
    return {"schema_version": SCHEMA_VERSION, "error": err}


def _fail(code: int, kind: str, message: str, **extra) -> int:
    sys.stderr.write(json.dumps(_error(kind, message, **extra), sort_keys=True) + "\n")
    return code


def cmd_run(args) -> int:
    cfg = load_scenario(args.config) if args.config else ScenarioConfig()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    rec = run_scenario(cfg)
    feats = None
    analysis_error = None
    try:
        feats, _, _ = analyze_traces(rec.left_trace, rec.right_trace, cfg.target_distance, cfg.sensor,
                                     args.exclude_steps)
    except WalkerSimError as exc:
        analysis_error = str(exc)
    paths = write_run_outputs(rec, feats, args.out)
    for p in paths.values():
        log.info("wrote %s", p)
    if not rec.complete:
        return _fail(EXIT_INCOMPLETE, "IncompleteRun", f"run ended with status {rec.status!r}",
                     status=rec.status, final_position=rec.final_position)
    if analysis_error:
        return _fail(EXIT_INCOMPLETE, "AnalysisError", analysis_error)
    return EXIT_OK


def cmd_batch(args) -> int:
    spec = load_batch(args.config) if args.config else default_batch()
    if args.seed is not None:
        spec = spec.with_seed_offset(args.seed)
    result = run_batch(spec, args.out, jobs=args.jobs, variant=args.variant, exclude_steps=args.exclude_steps)
    if result.failed:
        return _fail(EXIT_INCOMPLETE, "BatchRunFailed", "; ".join(result.warnings),
                     failed=[o.label for o in result.failed])
    return EXIT_OK


def cmd_analyze(args) -> int:
    left = read_force_csv(args.left, Foot.LEFT)
    right = read_force_csv(args.right, Foot.RIGHT)
    feats, _, _ = analyze_traces(left, right, args.path_length, ContactSensorParams(), args.exclude_steps)
    payload = {"path_length": args.path_length, "features": feats.to_dict()}
    if args.out:
        write_json(payload, args.out)
    else:
        sys.stdout.write(dumps({"schema_version": SCHEMA_VERSION, **payload}))
    return EXIT_OK


def cmd_plot(args) -> int:
    data = read_json(args.report)
    report = data.get("report", data)
    if not report or "trials_a" not in report:
        raise FormatError("report has no comparison section to plot")
    for spec in write_plots(report, args.out):
        log.info("wrote %s", spec.path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="walkersim", description="Walker and assist-device gait simulator")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="verb", required=True)

    r = sub.add_parser("run", help="simulate one scenario")
    r.add_argument("--config", help="scenario JSON (default: condition A, 8 m at 0.5 m/s)")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--seed", type=int, help="override rng_seed")
    r.add_argument("--exclude-steps", type=int, default=2, help="initial steps left out of features")
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("batch", help="run a batch and compare conditions")
    b.add_argument("--config", help="batch JSON (default: 2 x A + 2 x B)")
    b.add_argument("--out", required=True, help="output directory")
    b.add_argument("--seed", type=int, help="offset added to every run's seed")
    b.add_argument("--variant", choices=[v.value for v in TTestVariant], default="student")
    b.add_argument("--exclude-steps", type=int, default=2)
    b.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    b.set_defaults(func=cmd_batch)

    a = sub.add_parser("analyze", help="gait features from exported force traces")
    a.add_argument("--left", required=True)
    a.add_argument("--right", required=True)
    a.add_argument("--path-length", type=float, default=8.0, help="walked distance [m]")
    a.add_argument("--exclude-steps", type=int, default=2)
    a.add_argument("--out", help="features JSON path (default: stdout)")
    a.set_defaults(func=cmd_analyze)

    pl = sub.add_parser("plot", help="SVG figures from a batch report.json")
    pl.add_argument("--report", required=True)
    pl.add_argument("--out", required=True)
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    level = os.environ.get("WALKERSIM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_CONFIG
    if getattr(args, "exclude_steps", 0) < 0:
        return _fail(EXIT_CONFIG, "ConfigError", "--exclude-steps must be >= 0", field="exclude_steps")
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "ConfigError", str(exc), field=exc.field)
    except FormatError as exc:
        return _fail(EXIT_FORMAT, "FormatError", str(exc), row=exc.row)
    except WalkerSimError as exc:
        return _fail(EXIT_ERROR, type(exc).__name__, str(exc))
    except OSError as exc:
        return _fail(EXIT_ERROR, "OSError", str(exc))


if __name__ == "__main__":
    sys.exit(main())
