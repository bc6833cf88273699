"""Run every built-in preset, write its outputs and print one status line each.

    python3 scripts/run_presets.py [--out DIR] [NAME ...]
"""
import argparse
import time
from pathlib import Path

from cograph.cli import write_outputs
from cograph.config import PRESETS, preset_config
from cograph.scenarios import execute


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("names", nargs="*", default=sorted(PRESETS))
    p.add_argument("--out", default="out")
    args = p.parse_args()
    failed = 0
    for name in args.names:
        start = time.perf_counter()
        result = execute(preset_config(name))
        elapsed = time.perf_counter() - start
        write_outputs(result, Path(args.out) / name)
        bad = [c.name for c in result.report.checks.values() if not c.passed]
        status = "BLOWUP" if result.blowup else ("FAIL" if bad else "ok")
        failed += status != "ok"
        print(f"{name:<16} {status:<6} {elapsed:6.2f} s  {len(result.report.checks)} checks"
              + (f"  failing: {', '.join(bad)}" if bad else ""))
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
