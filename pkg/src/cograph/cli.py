"""Command line entry point.

    cograph run CONFIG [--out DIR]
    cograph preset NAME [--out DIR]
    cograph scaffold NAME [-o FILE]
    cograph verify CONFIG_OR_PRESET

Exit codes: 0 success, 2 config error, 3 blow-up, 4 invariant violation.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .config import ALIASES, PRESETS, parse_config
from .errors import ConfigError, ContractViolation, HorizonTooLongError
from .scenarios import execute

EXIT_OK, EXIT_PARSE, EXIT_BLOWUP, EXIT_INVARIANT = 0, 2, 3, 4


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def write_outputs(result, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = [",".join(result.columns)] + [",".join(row) for row in result.rows]
    (out / "trajectory.csv").write_text("\n".join(lines) + "\n")
    summary = dict(result.summary)
    summary["checks"] = {name: c.passed for name, c in result.report.checks.items()}
    (out / "summary.json").write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    return out


def _preset_name(name):
    return ALIASES.get(name, name)


def _load(source):
    path = Path(source)
    if path.is_file():
        return parse_config(path.read_text())
    source = _preset_name(source)
    if source in PRESETS:
        return parse_config(PRESETS[source])
    raise FileNotFoundError(f"no config file or preset named {source!r}")


def _run(cfg, out_dir, verbose=True):
    start = time.perf_counter()
    try:
        result = execute(cfg)
    except (ContractViolation, HorizonTooLongError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    out = write_outputs(result, out_dir)
    if result.blowup:
        print(f"blow-up: {result.blowup}; {len(result.rows)} rows written to {out}", file=sys.stderr)
        return EXIT_BLOWUP
    if verbose:
        print(f"wrote {len(result.rows)} rows to {out / 'trajectory.csv'} "
              f"({time.perf_counter() - start:.2f} s)")
        print(result.report.table())
    return EXIT_OK if result.report.passed else EXIT_INVARIANT


def cmd_run(args):
    cfg = _load(args.config)
    return _run(cfg, args.out or cfg.outputs.path)


def cmd_preset(args):
    args.name = _preset_name(args.name)
    if args.name not in PRESETS:
        print(f"unknown preset {args.name!r}; choose from {', '.join(sorted(PRESETS))}", file=sys.stderr)
        return EXIT_PARSE
    cfg = parse_config(PRESETS[args.name])
    return _run(cfg, args.out or str(Path("out") / args.name))


def cmd_scaffold(args):
    if args.list or not args.name:
        print("\n".join(sorted(PRESETS)))
        return EXIT_OK
    args.name = _preset_name(args.name)
    if args.name not in PRESETS:
        print(f"unknown preset {args.name!r}; choose from {', '.join(sorted(PRESETS))}", file=sys.stderr)
        return EXIT_PARSE
    text = f"# preset {args.name}\n" + PRESETS[args.name]
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args):
    cfg = _load(args.config)
    try:
        result = execute(cfg)
    except (ContractViolation, HorizonTooLongError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    if result.blowup:
        print(f"blow-up: {result.blowup}", file=sys.stderr)
        return EXIT_BLOWUP
    print(result.report.table())
    return EXIT_OK if result.report.passed else EXIT_INVARIANT


def build_parser():
    p = argparse.ArgumentParser(prog="cograph", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a config file")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (default: outputs.path)")
    r.set_defaults(func=cmd_run)
    pr = sub.add_parser("preset", help="run a built-in preset")
    pr.add_argument("name")
    pr.add_argument("--out", help="output directory (default: out/NAME)")
    pr.set_defaults(func=cmd_preset)
    s = sub.add_parser("scaffold", help="print a preset as an editable config")
    s.add_argument("name", nargs="?")
    s.add_argument("-o", "--output", help="write to this file instead of stdout")
    s.add_argument("--list", action="store_true", help="list preset names")
    s.set_defaults(func=cmd_scaffold)
    v = sub.add_parser("verify", help="run the invariant suites and print a pass/fail table")
    v.add_argument("config")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error:\n{exc}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
