"""Parameter sweeps: Cartesian grids over config paths, run in lockstep
batches that share one radio trace per seed, written to a stable CSV."""
from __future__ import annotations

import copy
import csv
import hashlib
import itertools
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .config import ConfigError, SimConfig, format_float, load_config, parse_float, set_path
from .engine import RunResult, run_batch, trace_key

log = logging.getLogger(__name__)

COLUMNS = ("run_id", "mode", "rach_variant", "bell_enabled", "n_b", "xi_access_dbm", "seed",
           "n_cbra", "n_cfra", "r_cbra_pct", "n_hof", "n_rlf", "hof_per_ue_min", "rlf_per_ue_min",
           "total_per_ue_min", "hof_wrong_beam", "hof_coverage_hole", "hof_early_exec",
           "hof_wrong_cell", "status")

INT_COLUMNS = {"n_b", "seed", "n_cbra", "n_cfra", "n_hof", "n_rlf", "hof_wrong_beam",
               "hof_coverage_hole", "hof_early_exec", "hof_wrong_cell"}
FLOAT_COLUMNS = {"xi_access_dbm", "r_cbra_pct", "hof_per_ue_min", "rlf_per_ue_min", "total_per_ue_min"}


@dataclass
class SweepSpec:
    base: dict
    axes: dict[str, list]
    seeds: list[int] = field(default_factory=lambda: [1])
    max_points: int = 10_000

    def validate(self) -> "SweepSpec":
        if not self.axes:
            raise ConfigError("sweep needs at least one axis")
        for path, values in self.axes.items():
            if not isinstance(values, list) or not values:
                raise ConfigError(f"axis {path!r} needs a non-empty list of values")
        if not self.seeds:
            raise ConfigError("sweep needs at least one seed")
        n = math.prod(len(v) for v in self.axes.values()) * len(self.seeds)
        if n > self.max_points:
            raise ConfigError(f"sweep has {n} runs, above the cap of {self.max_points}")
        return self


def load_sweep(path: str | Path) -> SweepSpec:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"sweep spec not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"sweep spec is not valid JSON: {exc}") from None
    if "base_config" in doc:
        base_path = (path.parent / doc["base_config"]).resolve()
        base = load_config(base_path).to_dict()
    else:
        base = SimConfig.from_dict(doc.get("base", {})).to_dict()
    unknown = set(doc) - {"base_config", "base", "axes", "seeds", "max_points"}
    if unknown:
        raise ConfigError(f"unknown sweep keys: {sorted(unknown)}")
    return SweepSpec(base, doc.get("axes", {}), list(doc.get("seeds", [1])),
                     int(doc.get("max_points", 10_000))).validate()


@dataclass(frozen=True)
class Point:
    overrides: tuple[tuple[str, object], ...]
    seed: int

    @property
    def run_id(self) -> str:
        key = json.dumps([list(self.overrides), self.seed], sort_keys=True, default=str)
        return hashlib.sha1(key.encode()).hexdigest()[:12]


def expand_grid(spec: SweepSpec) -> list[Point]:
    """Grid points in deterministic order: seeds outermost, then axes in spec order."""
    names = list(spec.axes)
    points = []
    for seed in spec.seeds:
        for combo in itertools.product(*(spec.axes[n] for n in names)):
            points.append(Point(tuple(zip(names, combo)), int(seed)))
    return points


def point_config(base: dict, point: Point) -> SimConfig:
    d = copy.deepcopy(base)
    for path, value in point.overrides:
        set_path(d, path, value)
    d["seed"] = point.seed
    return SimConfig.from_dict(d)


def result_row(point: Point, cfg: SimConfig, res: RunResult | None, status: str = "ok") -> dict:
    row = {"run_id": point.run_id, "mode": cfg.handover.mode, "rach_variant": cfg.rach.variant,
           "bell_enabled": cfg.bell.enabled, "n_b": cfg.rach.n_b,
           "xi_access_dbm": cfg.rach.xi_access_dbm, "seed": cfg.seed, "status": status}
    if res is None:
        return row
    k = res.kpi_report
    row.update(n_cbra=k.n_cbra, n_cfra=k.n_cfra, r_cbra_pct=k.r_cbra_pct, n_hof=k.n_hof,
               n_rlf=k.n_rlf, hof_per_ue_min=k.hof_per_ue_min, rlf_per_ue_min=k.rlf_per_ue_min,
               total_per_ue_min=k.total_per_ue_min,
               hof_wrong_beam=k.hof_by_class["wrong_beam_prepared"],
               hof_coverage_hole=k.hof_by_class["coverage_hole"],
               hof_early_exec=k.hof_by_class["early_execution"],
               hof_wrong_cell=k.hof_by_class["wrong_cell_prepared"])
    return row


def _run_group(items: list[tuple[Point, SimConfig]]) -> list[dict]:
    cfgs = [c for _, c in items]
    try:
        results = run_batch(cfgs)
    except Exception as exc:                          # isolate the failing point(s)
        log.warning("batch failed (%s); retrying points one by one", exc)
        rows = []
        for p, c in items:
            try:
                rows.append(result_row(p, c, run_batch([c])[0]))
            except Exception as exc1:
                rows.append(result_row(p, c, None, f"error: {exc1}"))
        return rows
    return [result_row(p, c, r) for (p, c), r in zip(items, results)]


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[dict]:
    """Run every grid point; rows come back in grid order whatever ``jobs`` is."""
    points = expand_grid(spec)
    rows: dict[int, dict] = {}
    groups: dict[str, list[int]] = {}
    configs = {}
    for i, p in enumerate(points):
        try:
            configs[i] = point_config(spec.base, p)
        except ConfigError as exc:
            rows[i] = {"run_id": p.run_id, "seed": p.seed, "status": f"config error: {exc}"}
            continue
        groups.setdefault(trace_key(configs[i]), []).append(i)
    batches = [[(points[i], configs[i]) for i in idx] for idx in groups.values()]
    index = list(groups.values())
    log.info("sweep: %d runs in %d shared-trace batches", len(points), len(batches))
    if jobs > 1 and len(batches) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outs = list(pool.map(_run_group, batches))
    else:
        outs = [_run_group(b) for b in batches]
    for idx, out in zip(index, outs):
        for i, row in zip(idx, out):
            rows[i] = row
    return [rows[i] for i in range(len(points))]


def _cell(name: str, value) -> str:
    if value is None:
        return ""
    if name == "xi_access_dbm":
        return str(format_float(float(value)))
    if name == "bell_enabled":
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(COLUMNS)
        for row in rows:
            w.writerow([_cell(c, row.get(c)) for c in COLUMNS])


def read_csv(path: str | Path) -> list[dict]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for raw in csv.DictReader(fh):
            row = {}
            for k, v in raw.items():
                if v == "":
                    row[k] = None
                elif k in INT_COLUMNS:
                    row[k] = int(v)
                elif k == "xi_access_dbm":
                    row[k] = parse_float(v)
                elif k in FLOAT_COLUMNS:
                    row[k] = float(v)
                elif k == "bell_enabled":
                    row[k] = v == "true"
                else:
                    row[k] = v
            out.append(row)
    return out
