"""Desk-scale trend checks: 3x3 grid, 60 UEs, 60 s, five shared seeds.

One lockstep batch per seed covers the CHO grid (variant x N_B x BELL x xi)
and the BHO grid (variant x N_B x xi). Each test records a PASS/FAIL line that the
terminal summary prints.
"""
import math
from collections import defaultdict

import pytest

from chorus import desk_scale, run_batch
from chorus.sweep import SweepSpec, expand_grid, point_config
from conftest import ACCEPTANCE_LINES

SEEDS = [1, 2, 3, 4, 5]
# the standard grid plus -85..-70 dBm, where target-beam RSRP at access lies in this layout
XI = [-math.inf, -110.0, -105.0, -100.0, -95.0, -90.0, -85.0, -80.0, -75.0, -70.0, math.inf]
FINITE_XI = [x for x in XI if math.isfinite(x)]
VARIANTS = ["threegpp", "re_rach"]


def _grid(mode, n_b, bell):
    return SweepSpec(desk_scale().to_dict(), {
        "handover.mode": [mode], "rach.variant": VARIANTS, "rach.n_b": n_b,
        "bell.enabled": bell, "rach.xi_access_dbm": XI}, seeds=SEEDS).validate()


@pytest.fixture(scope="session")
def runs():
    """(mode, variant, n_b, bell, xi, seed) -> RunResult"""
    points = expand_grid(_grid("cho", [1, 4], [False, True])) + expand_grid(_grid("bho", [1, 4], [False]))
    base = desk_scale().to_dict()
    by_seed = defaultdict(list)
    for p in points:
        by_seed[p.seed].append(point_config(base, p))
    out = {}
    for seed in SEEDS:
        cfgs = by_seed[seed]
        for cfg, res in zip(cfgs, run_batch(cfgs)):
            key = (cfg.handover.mode, cfg.rach.variant, cfg.rach.n_b, cfg.bell.enabled,
                   cfg.rach.xi_access_dbm, cfg.seed)
            out[key] = res
    return out


def verdict(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def kpi(runs, mode="cho", variant="threegpp", n_b=1, bell=False, xi=-math.inf, seed=None):
    seeds = SEEDS if seed is None else [seed]
    return [runs[(mode, variant, n_b, bell, xi, s)].kpi_report for s in seeds]


def pooled_ratio(reports):
    cb = sum(k.n_cbra for k in reports)
    total = cb + sum(k.n_cfra for k in reports)
    return 100.0 * cb / total if total else 0.0


def test_c02_no_cbra_without_threshold(runs):
    bad = [(v, nb, b, s) for v in VARIANTS for nb in (1, 4) for b in (False, True) for s in SEEDS
           if kpi(runs, variant=v, n_b=nb, bell=b, seed=s)[0].r_cbra_pct != 0.0]
    verdict(2, not bad, f"R_CBRA at xi=-inf is 0 in all CHO runs; offenders: {bad}")


def test_c03_re_rach_uses_less_cbra(runs):
    worse, strict = [], False
    for nb in (1, 4):
        for b in (False, True):
            for xi in XI:
                for s in SEEDS:
                    r3 = kpi(runs, variant="threegpp", n_b=nb, bell=b, xi=xi, seed=s)[0].r_cbra_pct
                    rr = kpi(runs, variant="re_rach", n_b=nb, bell=b, xi=xi, seed=s)[0].r_cbra_pct
                    if rr > r3:
                        worse.append((nb, b, xi, s))
                    if math.isfinite(xi) and rr < r3:
                        strict = True
    verdict(3, not worse and strict, f"violations {worse}, strictly lower somewhere: {strict}")


def test_c04_threegpp_ratio_monotone(runs):
    bad = []
    for nb in (1, 4):
        for b in (False, True):
            for s in SEEDS:
                r = [kpi(runs, n_b=nb, bell=b, xi=xi, seed=s)[0].r_cbra_pct for xi in XI]
                drops = [r[i] - r[i + 1] for i in range(len(r) - 1) if r[i + 1] < r[i]]
                if len(drops) > 1 or any(d > 0.5 for d in drops):
                    bad.append((nb, b, s, [round(x, 2) for x in r]))
    verdict(4, not bad, f"non-monotone curves: {bad}")


def test_c05_hof_identical_between_variants(runs):
    diff = [k[:1] + k[2:] for k, res in runs.items() if k[1] == "threegpp"
            and res.kpi_report.n_hof != runs[(k[0], "re_rach") + k[2:]].kpi_report.n_hof]
    verdict(5, not diff, f"runs with differing N_HOF: {diff}")


def test_c06_more_prepared_beams_fewer_hof(runs):
    h1 = [k.n_hof for k in kpi(runs, n_b=1)]
    h4 = [k.n_hof for k in kpi(runs, n_b=4)]
    wins = sum(a < b for a, b in zip(h4, h1))
    verdict(6, wins >= 4, f"N_B=1 {h1} vs N_B=4 {h4}; lower on {wins}/5 seeds")


def test_c07_bell_reduces_hof(runs):
    off = kpi(runs, bell=False)
    on = kpi(runs, bell=True)
    wb = sum(k.hof_by_class["wrong_beam_prepared"] for k in off)
    h_off, h_on = sum(k.n_hof for k in off), sum(k.n_hof for k in on)
    # the floor is met at this duration, so no enlargement applies
    assert wb >= 20, f"only {wb} wrong-beam HOFs; floor not met"
    verdict(7, h_on <= 0.7 * h_off, f"N_HOF BELL off {h_off}, on {h_on} "
            f"(ratio {h_on / max(h_off, 1):.2f}, need <= 0.70); wrong-beam events with BELL off {wb}")


def test_c08_bell_does_not_raise_cbra(runs):
    bad = []
    for v in VARIANTS:
        for nb in (1, 4):
            for xi in FINITE_XI:
                r_off = pooled_ratio(kpi(runs, variant=v, n_b=nb, bell=False, xi=xi))
                r_on = pooled_ratio(kpi(runs, variant=v, n_b=nb, bell=True, xi=xi))
                if r_on > r_off + 0.5:
                    bad.append((v, nb, xi, round(r_off, 2), round(r_on, 2)))
    verdict(8, not bad, f"points where BELL raised R_CBRA by more than 0.5 pp: {bad}")


def test_c09_bho_has_few_hof_and_little_cbra(runs):
    h_bho = sum(k.n_hof for k in kpi(runs, mode="bho"))
    h_cho = sum(k.n_hof for k in kpi(runs))
    ratios = {(nb, xi): pooled_ratio(kpi(runs, mode="bho", variant="re_rach", n_b=nb, xi=xi))
              for nb in (1, 4) for xi in XI}
    ok = h_bho <= 0.1 * h_cho and all(r < 5.0 for r in ratios.values())
    verdict(9, ok, f"N_HOF BHO {h_bho} vs CHO {h_cho}; BHO RE-RACH R_CBRA max "
            f"{max(ratios.values()):.2f}%")


def test_c10_cho_fewer_total_failures(runs):
    cho = sum(k.n_hof + k.n_rlf for k in kpi(runs))
    bho = sum(k.n_hof + k.n_rlf for k in kpi(runs, mode="bho"))
    verdict(10, cho <= 0.95 * bho, f"HOF+RLF CHO {cho} vs BHO {bho} (ratio {cho / max(bho, 1):.2f}, "
            "need <= 0.95)")


def test_c11_bell_bookkeeping(runs):
    bad_sum = [k for k, r in runs.items() if sum(r.kpi_report.hof_by_class.values()) != r.kpi_report.n_hof]
    bad_tab = [k for k, r in runs.items() if not k[3] and r.offset_table_final.offsets.any()]
    verdict(11, not bad_sum and not bad_tab, f"class-sum mismatches {bad_sum}, "
            f"non-zero tables with BELL off {bad_tab} over {len(runs)} runs")
