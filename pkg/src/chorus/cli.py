"""Command-line front end.

    chorus simulate --config run.json [--seed N] --out DIR
    chorus sweep --spec sweep.json --out DIR [--jobs N]

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .engine import run
from .sweep import Point, load_sweep, result_row, run_sweep, write_csv

log = logging.getLogger("chorus")


def _setup_logging() -> None:
    level = os.environ.get("CHORUS_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    probe = out / ".write-test"
    probe.write_text("")                 # surfaces permission problems before the run
    probe.unlink()
    return out


def cmd_simulate(config_path: str, seed: int | None, out_dir: str) -> int:
    try:
        cfg = load_config(config_path)
        if seed is not None:
            cfg.seed = seed
            cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        out = _out_dir(out_dir)
    except OSError as exc:
        print(f"cannot write to {out_dir}: {exc}", file=sys.stderr)
        return 2
    log.info("simulating %s (seed %d, %.0f s)", config_path, cfg.seed, cfg.duration)
    res = run(cfg)
    try:
        write_csv([result_row(Point((), cfg.seed), cfg, res)], out / "kpi.csv")
        (out / "events.jsonl").write_text(res.events_jsonl(), encoding="utf-8")
        (out / "offsets.json").write_text(res.offset_table_final.to_json(), encoding="utf-8")
    except OSError as exc:
        print(f"cannot write results: {exc}", file=sys.stderr)
        return 2
    return 0


def cmd_sweep(spec_path: str, out_dir: str, jobs: int = 1) -> int:
    try:
        spec = load_sweep(spec_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        out = _out_dir(out_dir)
    except OSError as exc:
        print(f"cannot write to {out_dir}: {exc}", file=sys.stderr)
        return 2
    rows = run_sweep(spec, jobs=jobs)
    try:
        write_csv(rows, out / "sweep.csv")
    except OSError as exc:
        print(f"cannot write results: {exc}", file=sys.stderr)
        return 2
    bad = [r for r in rows if r.get("status") != "ok"]
    if bad:
        log.warning("%d of %d runs failed", len(bad), len(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chorus", description="FR2 mobility simulator")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", help="run one configuration")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True)
    w = sub.add_parser("sweep", help="run a parameter grid")
    w.add_argument("--spec", required=True)
    w.add_argument("--out", required=True)
    w.add_argument("--jobs", type=int, default=1)
    sub.add_parser("defaults", help="print the default configuration as JSON")
    return p


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    if args.command == "simulate":
        return cmd_simulate(args.config, args.seed, args.out)
    if args.command == "sweep":
        return cmd_sweep(args.spec, args.out, max(1, args.jobs))
    from .config import SimConfig
    print(json.dumps(SimConfig().to_dict(), indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
