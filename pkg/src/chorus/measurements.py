"""UE measurement pipeline: L1 moving average, beam consolidation, L3 IIR filters."""
from __future__ import annotations

import numpy as np

from .config import MeasurementConfig


def _mean(x: np.ndarray, axis: int, domain: str) -> np.ndarray:
    if domain == "linear":
        return 10.0 * np.log10(np.mean(np.power(10.0, x / 10.0), axis=axis))
    return np.mean(x, axis=axis)


def l1_filter(samples, domain: str = "dB"):
    """Average of the last N_L1 raw RSRP samples (samples on axis 0)."""
    return _mean(np.asarray(samples, dtype=float), 0, domain)


def consolidate_cell_quality(l1_beams, p_thr: float, n_str: int, domain: str = "dB"):
    """Strongest-beam set and L1 cell quality; beams on the last axis.

    Returns ``(mask, l1_cell)``: the mask marks up to ``n_str`` strongest beams
    strictly above ``p_thr`` (equal values: lower beam index first). With an
    empty set the cell quality is the best beam.
    """
    x = np.asarray(l1_beams, dtype=float)
    order = np.argsort(-x, axis=-1, kind="stable")[..., :n_str]
    top = np.take_along_axis(x, order, axis=-1)
    keep = top > p_thr
    count = keep.sum(axis=-1)
    if domain == "linear":
        lin = np.where(keep, np.power(10.0, top / 10.0), 0.0).sum(axis=-1)
        with np.errstate(divide="ignore"):
            avg = 10.0 * np.log10(lin / np.maximum(count, 1))
    else:
        avg = np.where(keep, top, 0.0).sum(axis=-1) / np.maximum(count, 1)
    l1_cell = np.where(count > 0, avg, top[..., 0])
    mask = np.zeros(x.shape, dtype=bool)
    np.put_along_axis(mask, order, keep, axis=-1)
    return mask, l1_cell


def forgetting_factor(k: float) -> float:
    return 0.5 ** (k / 4.0)


def l3_filter(current_l1, previous_l3, k: float):
    alpha = forgetting_factor(k)
    return alpha * np.asarray(current_l1) + (1.0 - alpha) * np.asarray(previous_l3)


class MeasurementState:
    """Filter state for every (UE, cell, beam); raw samples pushed per SSB occasion."""

    def __init__(self, shape: tuple[int, int, int], config: MeasurementConfig):
        self.config = config
        self.shape = shape
        self.raw_ring = np.empty((config.n_l1,) + shape)
        self._slot = 0
        self._filled = False
        self.l1_beam = None
        self.l3_beam = None
        self.l1_cell = None
        self.l3_cell = None
        self.b_str = None

    def push(self, raw: np.ndarray) -> None:
        if not self._filled:
            self.raw_ring[:] = raw          # warm-up: repeat the first sample
            self._filled = True
        else:
            self.raw_ring[self._slot] = raw
        self._slot = (self._slot + 1) % self.config.n_l1

    def update(self) -> None:
        """One L1/L3 filter period (called every omega steps)."""
        cfg = self.config
        self.l1_beam = l1_filter(self.raw_ring, cfg.l1_domain)
        self.b_str, self.l1_cell = consolidate_cell_quality(self.l1_beam, cfg.p_thr, cfg.n_str, cfg.l1_domain)
        if self.l3_cell is None:
            self.l3_beam = self.l1_beam.copy()
            self.l3_cell = self.l1_cell.copy()
        else:
            self.l3_beam = l3_filter(self.l1_beam, self.l3_beam, cfg.k_beam)
            self.l3_cell = l3_filter(self.l1_cell, self.l3_cell, cfg.k_cell)
