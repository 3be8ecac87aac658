"""cochain-lab <task> --config FILE [--mode exact|float] [--seed N] [--out FILE] [--format json|table]"""

from __future__ import annotations

import argparse
import json
import sys

from .config import TASKS, ConfigError, parse_config
from .reports import emit_report
from .tasks import run_task

EXIT = {"pass": 0, "fail": 1, "budget-exhausted": 3}
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cochain-lab", description="cohomology of finite group actions")
    ap.add_argument("task", help="one of: " + ", ".join(TASKS))
    ap.add_argument("--config", required=True, help="JSON or TOML task file")
    ap.add_argument("--mode", choices=("exact", "float"))
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", help="write the report here instead of stdout")
    ap.add_argument("--format", choices=("json", "table"), default="json")
    ap.add_argument("--timing", action="store_true", help="include wall-clock time in the report")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        print(json.dumps({"error": {"code": "E_PARSE", "message": str(e)}}), file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = parse_config(text, mode=args.mode, seed=args.seed)
        if cfg.task != args.task:
            raise ConfigError("E_TASK", f"command line task {args.task!r} differs from config task {cfg.task!r}")
        report = run_task(cfg)
    except ConfigError as e:
        print(json.dumps({"error": e.payload()}, sort_keys=True), file=sys.stderr)
        return EXIT_CONFIG
    text = emit_report(report, args.format, include_timing=args.timing)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT[report.status]


if __name__ == "__main__":
    sys.exit(main())
