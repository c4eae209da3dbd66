"""Run the desk-scale CHO/BHO grid and print per-ξ summaries.

    python3 scripts/run_desk_sweep.py --out results/ [--seeds 1 2 3] [--duration 60]

Writes sweep.csv (same schema as `chorus sweep`) and prints pooled
R_CBRA and HOF/RLF totals per configuration.
"""
import argparse
import math
from collections import defaultdict
from pathlib import Path

from chorus import desk_scale
from chorus.sweep import SweepSpec, run_sweep, write_csv

XI = ["-inf", -110, -105, -100, -95, -90, -85, -80, -75, -70, "inf"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results")
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    ap.add_argument("--duration", type=float, default=60.0)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    base = desk_scale(duration=args.duration).to_dict()
    cho = SweepSpec(base, {"handover.mode": ["cho"], "rach.variant": ["threegpp", "re_rach"],
                           "rach.n_b": [1, 4], "bell.enabled": [False, True],
                           "rach.xi_access_dbm": XI}, seeds=args.seeds).validate()
    bho = SweepSpec(base, {"handover.mode": ["bho"], "rach.variant": ["threegpp", "re_rach"],
                           "rach.n_b": [1, 4], "rach.xi_access_dbm": XI}, seeds=args.seeds).validate()
    rows = run_sweep(cho, args.jobs) + run_sweep(bho, args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(rows, out / "sweep.csv")

    pooled = defaultdict(lambda: [0, 0, 0, 0])
    for r in rows:
        if r["status"] != "ok":
            continue
        key = (r["mode"], r["rach_variant"], r["n_b"], r["bell_enabled"], r["xi_access_dbm"])
        acc = pooled[key]
        acc[0] += r["n_cbra"]
        acc[1] += r["n_cfra"]
        acc[2] += r["n_hof"]
        acc[3] += r["n_rlf"]
    print(f"{'mode':4} {'variant':9} {'N_B':>3} {'bell':5} {'xi':>6} {'R_CBRA%':>8} {'HOF':>5} {'RLF':>5}")
    for key in sorted(pooled, key=lambda k: (k[:4], k[4])):
        cb, cf, h, rl = pooled[key]
        ratio = 100.0 * cb / (cb + cf) if cb + cf else 0.0
        mode, var, nb, bell, xi = key
        xs = ("-inf" if xi < 0 else "inf") if math.isinf(xi) else f"{xi:.0f}"
        print(f"{mode:4} {var:9} {nb:>3} {str(bell):5} {xs:>6} {ratio:8.2f} {h:5d} {rl:5d}")


if __name__ == "__main__":
    main()
