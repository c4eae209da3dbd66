import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chorus.channel import (ChannelModel, FadingProcess, beam_gain, beam_gain_array, db_to_mw,
                            fading_correlation, gaussian_field, line_of_sight, noise_power_dbm,
                            path_loss, scheduled_beams, sinr_db)
from chorus.config import ChannelConfig, GridConfig, ScenarioConfig
from chorus.scenario import BeamConfig, build_layout, spawn_users

# frozen from scripts/derive_oracles.py
PL_100M = 103.343161
PL_1M = 61.343161


def los_cfg(**kw):
    return ChannelConfig(propagation="los", **kw)


def test_path_loss_oracle_values():
    cfg = los_cfg()
    assert path_loss(100.0, cfg) == pytest.approx(PL_100M, abs=1e-6)
    assert path_loss(1.0, cfg) == pytest.approx(PL_1M, abs=1e-6)


def test_path_loss_clamps_below_one_metre():
    cfg = los_cfg()
    assert path_loss(0.0, cfg) == path_loss(1.0, cfg) == path_loss(0.3, cfg)


@settings(max_examples=100)
@given(d1=st.floats(0.0, 5000.0), d2=st.floats(0.0, 5000.0), los=st.booleans())
def test_path_loss_monotone(d1, d2, los):
    cfg = ChannelConfig()
    lo, hi = sorted((d1, d2))
    assert path_loss(hi, cfg, los) >= path_loss(lo, cfg, los)


def test_nlos_never_below_los():
    d = np.geomspace(1, 2000, 200)
    cfg = ChannelConfig()
    assert np.all(path_loss(d, cfg, False) >= path_loss(d, cfg, True))


NARROW = BeamConfig(1, 0.0, 0.0, 10.0, 23.0)


def test_beam_gain_boresight_and_half_power():
    assert beam_gain(NARROW, (0.0, 0.0)) == 23.0
    assert beam_gain(NARROW, (5.0, 0.0)) == pytest.approx(20.0)


def test_beam_gain_back_lobe_floor():
    assert beam_gain(NARROW, (180.0, 0.0)) == pytest.approx(23.0 - 30.0)
    # brute-force oracle scan bottoms out at the same floor
    scan = beam_gain_array(np.arange(-1800, 1801) / 10.0, 0.0, np.array([0.0]), np.array([0.0]),
                           np.array([10.0]), np.array([23.0]))
    assert scan.min() == pytest.approx(-7.0)


@settings(max_examples=100)
@given(a=st.floats(0, 180), b=st.floats(0, 180))
def test_beam_gain_decreases_with_offset(a, b):
    lo, hi = sorted((a, b))
    assert beam_gain(NARROW, (hi, 0.0)) <= beam_gain(NARROW, (lo, 0.0))
    assert beam_gain(NARROW, (hi, 0.0)) >= 23.0 - 30.0


def test_noise_power_10mhz():
    assert noise_power_dbm(10.0, 0.0) == pytest.approx(-104.0)
    assert noise_power_dbm(10.0, 9.0) == pytest.approx(-95.0)


def test_sinr_examples():
    noise = db_to_mw(-95.0)
    rx = db_to_mw(np.array([[[-90.0]]]))          # one UE, one cell, one beam
    sched = np.ones((1, 1), dtype=bool)
    assert sinr_db(rx, sched, 1, noise)[0, 0, 0] == pytest.approx(5.0)
    # interferer equal to the signal, noise negligible
    rx = db_to_mw(np.array([[[-60.0], [-60.0]]]))
    s = sinr_db(rx, np.ones((2, 1), dtype=bool), 1, 1e-30)
    assert s[0, 0, 0] == pytest.approx(0.0, abs=1e-9)


def test_sinr_empty_schedule_is_noise_limited():
    rx = db_to_mw(np.array([[[-90.0, -80.0], [-70.0, -70.0]]]))
    s = sinr_db(rx, np.zeros((2, 2), dtype=bool), 4, db_to_mw(-95.0))
    assert s[0, 0, 0] == pytest.approx(5.0)


@settings(max_examples=60)
@given(shift=st.floats(-50, 50), seed=st.integers(0, 1000))
def test_sinr_scale_consistent(shift, seed):
    rng = np.random.default_rng(seed)
    rx_db = rng.uniform(-120, -60, (2, 3, 4))
    sched = rng.random((3, 4)) < 0.5
    a = sinr_db(db_to_mw(rx_db), sched, 4, db_to_mw(-95.0))
    b = sinr_db(db_to_mw(rx_db + shift), sched, 4, db_to_mw(-95.0 + shift))
    assert np.allclose(a, b, atol=1e-9)


def test_scheduled_beams_ties_to_lower_id():
    counts = np.array([[0, 2, 2, 0, 1, 0], [0, 0, 0, 0, 0, 0]])
    mask = scheduled_beams(counts, 2)
    assert mask[0].tolist() == [False, True, True, False, False, False]
    assert mask[1].tolist() == [True, True, False, False, False, False]


def test_line_of_sight_blocked_by_box():
    boxes = np.array([[10.0, 20.0, -5.0, 5.0]])
    ue = np.array([[0.0, 0.0], [0.0, 20.0]])
    site = np.array([[30.0, 0.0]])
    assert line_of_sight(ue, site, boxes)[:, 0].tolist() == [False, True]


def test_shadowing_field_spatial_correlation():
    # 2e5+ pairs per lag; tolerance ±0.05 around exp(-d/L)
    rng = np.random.default_rng(11)
    f = gaussian_field((256, 256), 1.0, 1.0, 10.0, rng, count=4)
    for lag in (5, 10, 20):
        a = f[:, :, :-lag].ravel()
        b = f[:, :, lag:].ravel()
        assert np.corrcoef(a, b)[0, 1] == pytest.approx(math.exp(-lag / 10.0), abs=0.05)
    assert f.std() == pytest.approx(1.0, abs=0.1)


def test_fading_variance_and_correlation():
    rng = np.random.default_rng(3)
    proc = FadingProcess((1000, 1), 3.0, np.full(1000, 0.8), rng)
    xs = np.array([proc.advance()[:, 0] for _ in range(100)])
    assert xs.var() == pytest.approx(9.0, rel=0.05)
    lag1 = np.corrcoef(xs[:-1].ravel(), xs[1:].ravel())[0, 1]
    assert lag1 == pytest.approx(0.8, abs=0.02)


@pytest.mark.parametrize("common", [0.0, 0.5, 1.0])
def test_fading_common_part_keeps_link_variance(common):
    rng = np.random.default_rng(8)
    proc = FadingProcess((2000, 2, 6), 3.0, np.zeros(2000), rng, common)
    xs = np.array([proc.advance() for _ in range(20)])
    assert xs.var() == pytest.approx(9.0, rel=0.05)
    # correlation between two beams of one cell equals the common share
    r = np.corrcoef(xs[..., 0, 0].ravel(), xs[..., 0, 1].ravel())[0, 1]
    assert r == pytest.approx(common, abs=0.03)


def test_fading_correlation_from_speed():
    cfg = ChannelConfig()
    rho = fading_correlation(np.array([0.0, 8.33]), 0.02, cfg)
    assert rho[0] == 1.0 and 0.0 <= rho[1] < 1e-6
    cfg = ChannelConfig(fading_doppler_coherence=0.2)
    assert fading_correlation(np.array([1.0]), 0.02, cfg)[0] == pytest.approx(math.exp(-0.1))


def _small_model(channel_cfg, seed=1):
    sc = ScenarioConfig(grid=GridConfig(blocks_x=2, blocks_y=2))
    sc.users.street, sc.users.square, sc.users.pedestrian = 6, 2, 2
    lay = build_layout(sc, seed)
    pop = spawn_users(lay, sc, seed)
    return lay, pop, ChannelModel(lay, channel_cfg, pop, seed, 0.02)


def test_rsrp_without_randomness_is_link_budget():
    cfg = los_cfg(shadowing_sigma=0.0, fading_sigma=0.0)
    lay, pop, model = _small_model(cfg)
    rsrp = model.sample(pop)
    u, c, b = 0, 1, 3
    cell = lay.cells[c]
    dx, dy = pop.pos[u] - np.array(cell.position[:2])
    d2 = math.hypot(dx, dy)
    dh = pop.height[u] - cell.position[2]
    az = math.degrees(math.atan2(dy, dx)) - cell.boresight_azimuth
    el = math.degrees(math.atan2(dh, d2))
    az = (az + 180) % 360 - 180
    gain = beam_gain(cell.beams[b], (az, el))
    expect = 12.0 + gain - path_loss(math.hypot(d2, dh), cfg)
    assert rsrp[u, c, b] == pytest.approx(expect, abs=1e-9)


def test_rsrp_is_deterministic():
    cfg = ChannelConfig()
    _, pop1, m1 = _small_model(cfg, 4)
    _, pop2, m2 = _small_model(cfg, 4)
    for _ in range(3):
        pop1.advance(0.02)
        pop2.advance(0.02)
        assert np.array_equal(m1.sample(pop1), m2.sample(pop2))


def test_mean_fading_contribution_is_zero():
    cfg = los_cfg(shadowing_sigma=0.0)
    _, pop, model = _small_model(cfg)
    base = model.mean_rsrp(pop.pos, pop.height)
    acc = np.zeros_like(base)
    n = 10_000
    for _ in range(n):
        acc += model.sample(pop) - base
    assert abs(acc.mean() / n) < 0.2
    assert np.all(np.isfinite(acc))
