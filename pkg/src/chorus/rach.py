"""Random access towards the handover target: access beam and preamble choice,
attempt loop and handover-failure declaration."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import RachConfig
from .handover import PreparedTarget

CFRA = "CFRA"
CBRA = "CBRA"

PENDING = "pending"
SUCCESS = "success"
RESELECT = "reselect"
HOF = "hof"


def select_access_beam(prepared_beams, l1_beams, xi_access: float, variant: str) -> tuple[int, str]:
    """Pick the access beam and preamble kind from current L1 beam RSRPs.

    The strongest prepared beam is used with its dedicated preamble when it
    clears ``xi_access``; otherwise the UE falls back to the strongest beam of
    the cell. The 3GPP procedure then always uses a contention-based preamble;
    RE-RACH keeps the dedicated one if that beam happens to be prepared.
    """
    l1 = np.asarray(l1_beams, dtype=float)
    prepared = list(prepared_beams)
    best_prep = prepared[int(np.argmax(l1[prepared]))]
    if l1[best_prep] > xi_access:
        return best_prep, CFRA
    best = int(np.argmax(l1))
    if variant == "re_rach" and best in prepared:
        return best, CFRA
    return best, CBRA


@dataclass
class RachAttempt:
    ue: int
    serving: int                      # cell the UE detached from
    target: PreparedTarget
    started_at: int
    deadline: int
    access_beam: int = -1
    preamble_kind: str = ""
    attempts: int = 0


def start_attempt(ue: int, serving: int, target: PreparedTarget, step: int, config: RachConfig,
                  dt: float) -> RachAttempt:
    deadline = step + int(round(config.t_hof_ms / 1000.0 / dt))
    return RachAttempt(ue, serving, target, step, deadline)


def rach_attempt_step(attempt: RachAttempt, sinr_beams, l1_beams, step: int, config: RachConfig,
                      gamma_out: float) -> str:
    """One step of the attempt loop.

    Attempt occasions recur every ``attempt_period`` steps from the start;
    every occasion re-runs beam/preamble selection on fresh L1 values and
    succeeds when the selected beam's SINR exceeds ``gamma_out``. The HOF
    timer expiring (or the optional attempt cap) ends the loop.
    """
    if step >= attempt.deadline:
        return HOF
    if (step - attempt.started_at) % config.attempt_period:
        return PENDING
    beam, kind = select_access_beam(attempt.target.beams, l1_beams, config.xi_access_dbm,
                                    config.variant)
    attempt.access_beam, attempt.preamble_kind = beam, kind
    attempt.attempts += 1
    if sinr_beams[beam] > gamma_out:
        return SUCCESS
    if config.max_attempts is not None and attempt.attempts >= config.max_attempts:
        return HOF
    return RESELECT
