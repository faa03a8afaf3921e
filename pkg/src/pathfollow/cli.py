"""Command-line interface: ``pf run | batch | list-methods | validate``.

Exit codes: 0 success, 1 scenario parse/validation error, 2 runtime abort or
I/O error.  The ``PF_LOG`` environment variable sets the log level
(``DEBUG``, ``INFO``, ``WARNING`` (default) or ``ERROR``).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path as FsPath

from .exceptions import ParseError, ValidationError
from .harness import METHODS, Metrics, load_scenario_file, run, summarize, write_csv

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2
log = logging.getLogger("pathfollow")


def _setup_logging():
    level = getattr(logging, os.environ.get("PF_LOG", "WARNING").upper(), logging.WARNING)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    log.setLevel(level)


def _run_one(scenario_path: str, out: str | None):
    """Worker for ``run`` and ``batch``; returns ``(name, code, metrics dict, message)``."""
    try:
        sc = load_scenario_file(scenario_path)
    except (ParseError, ValidationError) as exc:
        return FsPath(scenario_path).stem, EXIT_INVALID, None, f"{scenario_path}: {exc}"
    except OSError as exc:
        return FsPath(scenario_path).stem, EXIT_RUNTIME, None, str(exc)
    log.info("running %s (%s, %d steps)", sc.name, sc.method, sc.n_steps)
    trace, metrics = run(sc)
    if out is not None:
        try:
            write_csv(trace, out)
        except OSError as exc:
            return sc.name, EXIT_RUNTIME, asdict(metrics), str(exc)
    code = EXIT_RUNTIME if trace.aborted else EXIT_OK
    return sc.name, code, asdict(metrics), trace.aborted


def cmd_run(args) -> int:
    name, code, metrics, msg = _run_one(args.scenario, args.out)
    if msg:
        print(msg, file=sys.stderr)
    if metrics is not None:
        text, _ = summarize({name: Metrics(**metrics)})
        print(text, end="")
    return code


def cmd_batch(args) -> int:
    folder = FsPath(args.directory)
    if not folder.is_dir():
        print(f"not a directory: {folder}", file=sys.stderr)
        return EXIT_RUNTIME
    files = sorted(str(p) for p in folder.glob("*.json"))
    out_dir = FsPath(args.out_dir) if args.out_dir else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    outs = [str(out_dir / (FsPath(f).stem + ".csv")) if out_dir else None for f in files]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, files, outs))
    else:
        results = [_run_one(f, o) for f, o in zip(files, outs)]
    code, table = EXIT_OK, {}
    for name, c, metrics, msg in results:
        if msg:
            print(msg, file=sys.stderr)
        code = max(code, c)
        if metrics is not None:
            table[name] = Metrics(**metrics)
    text, js = summarize(table)
    print(text, end="")
    if args.summary:
        with open(args.summary, "w", encoding="utf-8") as fh:
            fh.write(js + "\n")
    return code


def cmd_list(args) -> int:
    width = max(map(len, METHODS))
    for name, desc in METHODS.items():
        print(f"{name.ljust(width)}  {desc}")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        sc = load_scenario_file(args.scenario)
    except (ParseError, ValidationError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_RUNTIME
    print(f"ok: {sc.name} ({sc.method}, {sc.path.kind}, {sc.n_steps} steps)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pf", description="Path-following scenario simulator")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="simulate one scenario")
    r.add_argument("scenario")
    r.add_argument("--out", help="write the trace CSV here")
    r.set_defaults(func=cmd_run)
    b = sub.add_parser("batch", help="simulate every *.json scenario in a directory")
    b.add_argument("directory")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--summary", help="write the JSON summary here")
    b.add_argument("--out-dir", help="write one trace CSV per scenario here")
    b.set_defaults(func=cmd_batch)
    ls = sub.add_parser("list-methods", help="list guidance method selectors")
    ls.set_defaults(func=cmd_list)
    v = sub.add_parser("validate", help="check a scenario document")
    v.add_argument("scenario")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
