"""Command line entry point: ``magtrans run | decay | validate``.

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from magtrans.config import ConfigError, schema_json, validate_config
from magtrans.suites import SUITES, UnknownSuite, emit_decay_table, run_suite, write_atomic

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="magtrans", description="Verification suites for magnetic translation cocycles.")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a verification suite and write a JSON report")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--suite", required=True, choices=[*SUITES, "all"])
    run.add_argument("--out", type=Path, default=None, help="output directory for report.json (and decay.csv)")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--timings", action="store_true", help="include per-check runtimes in the report")

    dec = sub.add_parser("decay", help="write the HS decay table as CSV")
    dec.add_argument("--config", required=True, type=Path)
    dec.add_argument("--out", required=True, type=Path)

    val = sub.add_parser("validate", help="validate a config file")
    val.add_argument("--config", type=Path, default=None)
    val.add_argument("--schema", action="store_true", help="print the JSON schema and exit")
    return ap


def _err(msg: str) -> None:
    print(f"magtrans: {msg}", file=sys.stderr)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)

    if args.command == "validate" and args.schema:
        sys.stdout.write(schema_json())
        return EXIT_PASS
    if args.command == "validate" and args.config is None:
        _err("validate needs --config or --schema")
        return EXIT_CONFIG

    try:
        cfg = validate_config(args.config)
        if getattr(args, "seed", None) is not None:
            if args.seed < 1:
                raise ConfigError(f"seed: must be positive, got {args.seed}")
            cfg = dataclasses.replace(cfg, seed=args.seed)
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG

    if args.command == "validate":
        print(f"ok: n={cfg.n} backend={cfg.backend} seed={cfg.seed} window={list(cfg.window)}")
        return EXIT_PASS

    if args.command == "decay":
        try:
            emit_decay_table(cfg, args.out)
        except OSError as exc:
            _err(f"cannot write {args.out}: {exc.strerror}")
            return EXIT_FAIL
        print(f"wrote {args.out}")
        return EXIT_PASS

    try:
        report = run_suite(cfg, args.suite)
    except UnknownSuite as exc:
        _err(str(exc))
        return EXIT_CONFIG
    except ValueError as exc:
        # parameter combinations the modules reject (window, margin, dimension)
        _err(f"config error: {exc}")
        return EXIT_CONFIG

    for rec in report.records:
        print(f"{rec.status.upper():4}  {rec.name}")
    print(f"{report.status.upper()}  {args.suite}")

    out_dir = args.out or (Path(cfg.outputs["report"]).parent if "report" in cfg.outputs else None)
    if out_dir is not None:
        report_name = Path(cfg.outputs.get("report", "report.json")).name
        write_atomic(Path(out_dir) / report_name, report.to_json(args.timings))
        if args.suite in ("hs-decay", "all"):
            table = Path(cfg.outputs.get("decay_table", "decay.csv")).name
            emit_decay_table(cfg, Path(out_dir) / table)
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
