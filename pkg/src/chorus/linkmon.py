"""Serving-link monitoring (RLF timer with two-threshold recovery) and
connection re-establishment."""
from __future__ import annotations

import numpy as np

from .config import RlfConfig

OK = 0
TIMING = 1
RLF = 2


class RlfState:
    """RLF timer start step per UE; -1 marks no running timer."""

    def __init__(self, n_ue: int = 1):
        self.started_at = np.full(n_ue, -1, dtype=int)

    def reset(self, ue) -> None:
        self.started_at[ue] = -1


def rlf_step(state: RlfState, serving_sinr, config: RlfConfig, step: int, dt: float, active=None):
    """Advance the RLF timer of every active UE; returns OK/TIMING/RLF codes.

    The timer starts when SINR drops below gamma_out, is cancelled once SINR
    climbs above gamma_in, and declares RLF after t_rlf of running.
    """
    sinr = np.asarray(serving_sinr, dtype=float)
    started = state.started_at
    if active is None:
        active = np.ones(started.shape, dtype=bool)
    limit = int(round(config.t_rlf_ms / 1000.0 / dt))
    running = active & (started >= 0)
    start = active & ~running & (sinr < config.gamma_out_db)
    recover = running & (sinr > config.gamma_in_db)
    expire = running & ~recover & (step - started >= limit)
    started = np.where(start, step, started)
    started = np.where(recover | expire, -1, started)
    state.started_at = started
    status = np.where(expire, RLF, np.where(started >= 0, TIMING, OK))
    return np.where(active, status, OK)


def reestablish(l1_beams: np.ndarray, sinr: np.ndarray, gamma_out: float):
    """Strongest (cell, beam) by L1 RSRP among links whose SINR clears gamma_out.

    ``l1_beams`` and ``sinr`` are (cells, beams); returns None when no link
    qualifies (the UE stays unconnected).
    """
    ok = sinr > gamma_out
    if not ok.any():
        return None
    score = np.where(ok, l1_beams, -np.inf)
    flat = int(np.argmax(score))
    c, b = np.unravel_index(flat, score.shape)
    return int(c), int(b)
