"""BELL learning curve: HOFs with offsets off/on for increasing run lengths.

    python3 scripts/bell_learning.py --durations 60 300 --seeds 1 2 --delta 1

All runs of one (seed, duration) share a radio trace, so the difference is
the offset learning alone.
"""
import argparse

from chorus import desk_scale, run_batch


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--durations", type=float, nargs="+", default=[60.0, 300.0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    ap.add_argument("--delta", type=float, nargs="+", default=[1.0])
    args = ap.parse_args()
    for dur in args.durations:
        tot = [0] * (1 + len(args.delta))
        wb = 0
        for seed in args.seeds:
            cfgs = [desk_scale(duration=dur, seed=seed)]
            for d in args.delta:
                c = desk_scale(duration=dur, seed=seed)
                c.bell.enabled, c.bell.delta_db = True, d
                cfgs.append(c)
            res = run_batch(cfgs)
            hof = [r.kpi_report.n_hof for r in res]
            wb += res[0].kpi_report.hof_by_class["wrong_beam_prepared"]
            tot = [a + b for a, b in zip(tot, hof)]
            print(f"T={dur:.0f}s seed {seed}: HOF off {hof[0]}, on {hof[1:]}", flush=True)
        ratios = ", ".join(f"delta {d:g}: {t / max(tot[0], 1):.2f}" for d, t in zip(args.delta, tot[1:]))
        print(f"T={dur:.0f}s total HOF off {tot[0]} (wrong-beam {wb}); on/off {ratios}")


if __name__ == "__main__":
    main()
