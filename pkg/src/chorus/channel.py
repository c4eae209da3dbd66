"""Link budget: path loss, beam gain, shadowing, fast fading and SINR."""
from __future__ import annotations

import math

import numpy as np

from .config import ChannelConfig
from .rng import stream
from .scenario import BeamConfig, Layout, Population

SPEED_OF_LIGHT = 299_792_458.0
THERMAL_NOISE_DBM_HZ = -174.0
JAKES_COHERENCE = 0.423


def db_to_mw(x):
    return np.power(10.0, np.asarray(x) / 10.0)


def mw_to_db(x):
    return 10.0 * np.log10(x)


def path_loss(distance_3d, config: ChannelConfig, los=True):
    """Log-distance path loss in dB; distances below 1 m are clamped to 1 m.

    NLOS links use the larger of the LOS and NLOS fits, as in the UMi street
    canyon model.
    """
    d = np.maximum(np.asarray(distance_3d, dtype=float), 1.0)
    a, b = config.pathloss_coeffs
    fc = math.log10(config.carrier_freq)
    pl = a + b * np.log10(d) + config.pathloss_freq_coeff * fc
    if np.all(los):
        return pl
    na, nb, nf = config.nlos_coeffs
    pl_nlos = np.maximum(pl, na + nb * np.log10(d) + nf * fc)
    return np.where(los, pl, pl_nlos)


def wrap_deg(x):
    return (np.asarray(x) + 180.0) % 360.0 - 180.0


def beam_gain_array(rel_azimuth, elevation, beam_az, beam_el, beam_bw, beam_peak, front_back_ratio=30.0):
    """Gain (dBi) of every beam towards every direction; beams on the last axis."""
    daz = wrap_deg(np.asarray(rel_azimuth)[..., None] - beam_az)
    delev = np.asarray(elevation)[..., None] - beam_el
    att = 12.0 * ((daz / beam_bw) ** 2 + (delev / beam_bw) ** 2)
    return beam_peak - np.minimum(att, front_back_ratio)


def beam_gain(beam: BeamConfig, ue_direction: tuple[float, float], front_back_ratio: float = 30.0) -> float:
    """Gain of one beam towards (azimuth, elevation), both relative to the sector."""
    g = beam_gain_array(ue_direction[0], ue_direction[1], np.array([beam.azimuth]),
                        np.array([beam.elevation]), np.array([beam.beamwidth]),
                        np.array([beam.peak_gain]), front_back_ratio)
    return float(g[0])


def noise_power_dbm(bandwidth_mhz: float, noise_figure_db: float) -> float:
    return THERMAL_NOISE_DBM_HZ + 10.0 * math.log10(bandwidth_mhz * 1e6) + noise_figure_db


def scheduled_beams(attach_counts: np.ndarray, k_b: int) -> np.ndarray:
    """Boolean (cell, beam) mask of the k_b beams with most attached UEs per
    cell; ties go to the lower beam index."""
    counts = np.asarray(attach_counts)
    order = np.argsort(-counts, axis=-1, kind="stable")[..., :k_b]
    mask = np.zeros(counts.shape, dtype=bool)
    np.put_along_axis(mask, order, True, axis=-1)
    return mask


def sinr_db(rx_mw: np.ndarray, scheduled: np.ndarray, k_b: int, noise_mw: float) -> np.ndarray:
    """SINR of every (cell, beam) link, shape (..., C, B).

    Interference at a link of cell c is the power of the scheduled beams of all
    other cells, each weighted by 1/k_b (equal resource share per beam).
    """
    per_cell = np.where(scheduled, rx_mw, 0.0).sum(axis=-1) / k_b
    total = per_cell.sum(axis=-1, keepdims=True)
    interf = np.maximum(total - per_cell, 0.0)
    return 10.0 * np.log10(rx_mw / (noise_mw + interf[..., None]))


def line_of_sight(ue_xy: np.ndarray, site_xy: np.ndarray, boxes: np.ndarray) -> np.ndarray:
    """(U, S) mask: True when the UE-site segment crosses no building footprint.

    Slab test of the segment against every axis-aligned box; grazing contact
    (touching an edge) counts as visible.
    """
    n_u, n_s = len(ue_xy), len(site_xy)
    if len(boxes) == 0:
        return np.ones((n_u, n_s), dtype=bool)
    p = ue_xy[:, None, None, :]                       # (U,1,1,2)
    d = (site_xy[None, :, :] - ue_xy[:, None, :])[:, :, None, :]  # (U,S,1,2)
    eps = 1e-6
    lo = boxes[None, None, :, [0, 2]] + eps          # (1,1,R,2)
    hi = boxes[None, None, :, [1, 3]] - eps
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (lo - p) / d
        t2 = (hi - p) / d
    parallel = d == 0
    inside = (p > lo) & (p < hi)
    tnear = np.where(parallel, np.where(inside, -np.inf, np.inf), np.minimum(t1, t2))
    tfar = np.where(parallel, np.where(inside, np.inf, -np.inf), np.maximum(t1, t2))
    t_enter = np.maximum(tnear.max(axis=-1), 0.0)
    t_exit = np.minimum(tfar.min(axis=-1), 1.0)
    blocked = (t_enter < t_exit).any(axis=-1)
    return ~blocked


def gaussian_field(shape: tuple[int, int], spacing: float, sigma: float, corr_dist: float,
                   rng: np.random.Generator, count: int = 1) -> np.ndarray:
    """Periodic Gaussian random fields with covariance sigma^2 exp(-d/corr_dist).

    Circulant embedding on a regular grid: the covariance evaluated at the
    wrapped grid distances is diagonalised by the 2-D FFT. The rare negative
    eigenvalues of the embedding are clipped. Returns (count, ny, nx).
    """
    ny, nx = shape
    if sigma == 0:
        return np.zeros((count, ny, nx))
    iy = np.minimum(np.arange(ny), ny - np.arange(ny)) * spacing
    ix = np.minimum(np.arange(nx), nx - np.arange(nx)) * spacing
    d = np.hypot(iy[:, None], ix[None, :])
    lam = np.maximum(np.fft.fft2(np.exp(-d / corr_dist)).real, 0.0)
    z = rng.standard_normal((count, ny, nx))
    return sigma * np.fft.ifft2(np.sqrt(lam) * np.fft.fft2(z)).real


class ShadowingMap:
    """Spatially consistent log-normal shadowing shared by all UEs.

    One field per site (large obstacles, common to all its sectors and beams)
    and, optionally, one weaker field per (cell, beam) standing in for the
    beam-dependent multipath clusters. Fields are sampled on a grid covering
    the layout plus a margin and read with bilinear interpolation.
    """

    def __init__(self, layout: Layout, config: ChannelConfig, rng: np.random.Generator,
                 spacing: float = 2.0):
        b = layout.bounds
        x0, y0, x1, y1 = b.xmin, b.ymin, b.xmax, b.ymax
        margin = 5.0 * max(config.shadowing_corr_dist, config.beam_shadowing_corr_dist)
        self.origin = np.array([x0 - margin, y0 - margin])
        self.spacing = spacing
        self.n_cells, self.n_beams = layout.n_cells, layout.n_beams
        shape = (int(np.ceil((y1 - y0 + 2 * margin) / spacing)) + 2,
                 int(np.ceil((x1 - x0 + 2 * margin) / spacing)) + 2)
        self.site = gaussian_field(shape, spacing, config.shadowing_sigma, config.shadowing_corr_dist,
                                   rng, layout.n_sites).astype(np.float32)
        self.beam = gaussian_field(shape, spacing, config.beam_shadowing_sigma,
                                   config.beam_shadowing_corr_dist, rng,
                                   layout.n_cells * layout.n_beams).astype(np.float32)
        self.cell_site = layout.cell_site
        self.has_beam_part = config.beam_shadowing_sigma > 0

    @staticmethod
    def _bilinear(fields: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
        ix = np.clip(np.floor(gx).astype(int), 0, fields.shape[2] - 2)
        iy = np.clip(np.floor(gy).astype(int), 0, fields.shape[1] - 2)
        fx = np.clip(gx - ix, 0.0, 1.0)
        fy = np.clip(gy - iy, 0.0, 1.0)
        v00 = fields[:, iy, ix]
        v01 = fields[:, iy, ix + 1]
        v10 = fields[:, iy + 1, ix]
        v11 = fields[:, iy + 1, ix + 1]
        top = v00 * (1 - fx) + v01 * fx
        bottom = v10 * (1 - fx) + v11 * fx
        return (top * (1 - fy) + bottom * fy).T          # (U, fields)

    def site_values(self, xy: np.ndarray) -> np.ndarray:
        g = (np.asarray(xy, dtype=float) - self.origin) / self.spacing
        return self._bilinear(self.site, g[:, 0], g[:, 1])

    def __call__(self, xy: np.ndarray) -> np.ndarray:
        """Shadowing loss in dB for every (UE, cell, beam) at positions ``xy``."""
        g = (np.asarray(xy, dtype=float) - self.origin) / self.spacing
        site = self._bilinear(self.site, g[:, 0], g[:, 1])
        total = np.repeat(site[:, self.cell_site, None], self.n_beams, axis=2)
        if self.has_beam_part:
            beam = self._bilinear(self.beam, g[:, 0], g[:, 1])
            total = total + beam.reshape(-1, self.n_cells, self.n_beams)
        return total


class FadingProcess:
    """Zero-mean first-order autoregressive fast fading in dB per link.

    A fraction ``common`` of the variance is shared by all beams of one
    (UE, cell) pair (same propagation paths), the rest is per beam. Each link
    keeps variance sigma**2 either way.
    """

    def __init__(self, shape: tuple[int, ...], sigma: float, rho: np.ndarray, rng: np.random.Generator,
                 common: float = 0.0):
        self.sigma = sigma
        self.rho = np.asarray(rho, dtype=float).reshape((shape[0],) + (1,) * (len(shape) - 1))
        self.rng = rng
        self.w_beam = sigma * np.sqrt(1.0 - common)
        self.w_common = sigma * np.sqrt(common)
        self.beam = rng.standard_normal(shape)
        self.common = rng.standard_normal(shape[:-1] + (1,)) if common > 0 else None
        self.value = self._mix()

    def _mix(self) -> np.ndarray:
        if self.common is None:
            return self.w_beam * self.beam
        return self.w_beam * self.beam + self.w_common * self.common

    def advance(self) -> np.ndarray:
        keep, new = self.rho, np.sqrt(1.0 - self.rho ** 2)
        self.beam = keep * self.beam + new * self.rng.standard_normal(self.beam.shape)
        if self.common is not None:
            self.common = keep * self.common + new * self.rng.standard_normal(self.common.shape)
        self.value = self._mix()
        return self.value


def fading_correlation(speed: np.ndarray, interval_s: float, config: ChannelConfig) -> np.ndarray:
    """AR(1) coefficient per UE from (Jakes-style) coherence time 0.423*lambda/v."""
    speed = np.asarray(speed, dtype=float)
    if config.fading_doppler_coherence is not None:
        coherence = np.full(speed.shape, config.fading_doppler_coherence)
    else:
        wavelength = SPEED_OF_LIGHT / (config.carrier_freq * 1e9)
        with np.errstate(divide="ignore"):
            coherence = np.where(speed > 0, JAKES_COHERENCE * wavelength / speed, np.inf)
    return np.exp(-interval_s / coherence)


class ChannelModel:
    """Per-(UE, cell, beam) RSRP sampled once per SSB occasion."""

    def __init__(self, layout: Layout, config: ChannelConfig, pop: Population, seed: int, interval_s: float):
        self.layout = layout
        self.config = config
        n_ue = len(pop)
        self.shadowing = ShadowingMap(layout, config, stream(seed, "shadowing"))
        rho = fading_correlation(pop.speed, interval_s, config)
        self.fading = FadingProcess((n_ue, layout.n_cells, layout.n_beams), config.fading_sigma,
                                    rho, stream(seed, "fading"), config.fading_common)
        self.noise_mw = float(db_to_mw(noise_power_dbm(config.prb_bandwidth, config.noise_figure)))
        self._started = False

    def mean_rsrp(self, ue_xy: np.ndarray, ue_h: np.ndarray) -> np.ndarray:
        """tx + beam gain - path loss, without shadowing and fading (U, C, B)."""
        lay, cfg = self.layout, self.config
        dxy = ue_xy[:, None, :] - lay.cell_xyz[None, :, :2]
        d2 = np.hypot(dxy[..., 0], dxy[..., 1])
        dh = ue_h[:, None] - lay.cell_xyz[None, :, 2]
        d3 = np.hypot(d2, dh)
        az = np.degrees(np.arctan2(dxy[..., 1], dxy[..., 0])) - lay.boresight[None, :]
        el = np.degrees(np.arctan2(dh, d2))
        gain = beam_gain_array(az, el, lay.beam_az, lay.beam_el, lay.beam_bw, lay.beam_peak,
                               cfg.front_back_ratio)
        if cfg.propagation == "los":
            los = True
        else:
            los = line_of_sight(ue_xy, lay.site_xy, lay.building_boxes)[:, lay.cell_site]
        pl = path_loss(d3, cfg, los)
        return cfg.tx_power_per_prb + gain - pl[..., None]

    def sample(self, pop: Population) -> np.ndarray:
        """RSRP (dBm) of every link at this occasion; advances the fading."""
        if self._started:
            fade = self.fading.advance()
        else:
            fade = self.fading.value
            self._started = True
        return self.mean_rsrp(pop.pos, pop.height) - self.shadowing(pop.pos) + fade
