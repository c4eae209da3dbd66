"""Baseline (BHO) and conditional (CHO) handover state machines.

Time-to-trigger counters for all UEs live in (UE, cell) arrays and are
advanced together each step; per-UE transitions only run for UEs on which
something fired or a preparation timer expired.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import HandoverConfig

N_PREAMBLES = 64


def ttt_steps(ttt_s: float, dt: float) -> int:
    """Consecutive evaluations a condition must hold; at least one."""
    return max(1, math.ceil(ttt_s / dt - 1e-9))


def evaluate_entering_condition(serving_l3, neighbor_l3, offset, counter, required):
    """Advance a time-to-trigger counter.

    The counter grows while ``serving + offset < neighbor`` and drops to zero
    otherwise; the event fires once it reaches ``required`` evaluations.
    Broadcasts over arrays, so one call serves every (UE, cell) pair.
    """
    held = np.asarray(serving_l3) + offset < np.asarray(neighbor_l3)
    counter = np.where(held, np.asarray(counter) + 1, 0)
    return held & (counter >= required), counter


@dataclass
class PreparedTarget:
    cell: int
    beams: tuple[int, ...]            # beam indices, strongest first
    preambles: dict[int, int]         # beam -> dedicated (CFRA) preamble id
    prepared_at: int                  # step m0 of the triggering report
    exec_offset: float


@dataclass
class PendingPreparation:
    target: PreparedTarget
    ready_at: int


@dataclass
class HandoverContext:
    serving_cell: int
    serving_beam: int
    phase: str = "idle"               # idle | preparing | prepared | executing
    pending: PendingPreparation | None = None
    prepared: dict[int, PreparedTarget] = field(default_factory=dict)


def prepare_target(target_cell: int, l3_beams, n_b: int, offsets=None, step: int = 0,
                   exec_offset: float = 0.0, first_preamble: int = 0) -> PreparedTarget:
    """Reserve CFRA preambles on the n_b beams with the highest L3 + offset."""
    score = np.asarray(l3_beams, dtype=float)
    if offsets is not None:
        score = score + np.asarray(offsets, dtype=float)
    n_b = min(n_b, score.size)
    order = np.argsort(-score, kind="stable")[:n_b]
    beams = tuple(int(b) for b in order)
    preambles = {b: (first_preamble + k) % N_PREAMBLES for k, b in enumerate(beams)}
    return PreparedTarget(target_cell, beams, preambles, step, exec_offset)


@dataclass
class HandoverEvent:
    ue: int
    kind: str
    payload: dict


class HandoverController:
    """Handover FSM for all UEs of one run."""

    def __init__(self, config: HandoverConfig, n_b: int, n_ue: int, n_cells: int, dt: float,
                 gamma_out: float):
        self.config = config
        self.cho = config.mode == "cho"
        self.n_b = n_b
        self.gamma_out = gamma_out
        self.contexts: list[HandoverContext | None] = [None] * n_ue
        self.serving = np.full(n_ue, -1, dtype=int)
        self.entry_counter = np.zeros((n_ue, n_cells), dtype=int)
        self.exec_counter = np.zeros((n_ue, n_cells), dtype=int)
        # cells that may trigger the entry event (A3 or Add) for each UE
        self.entry_ok = np.zeros((n_ue, n_cells), dtype=bool)
        self.exec_ok = np.zeros((n_ue, n_cells), dtype=bool)
        if self.cho:
            self.entry_offset, self.entry_req = config.o_add, ttt_steps(config.ttt_add, dt)
        else:
            self.entry_offset, self.entry_req = config.o_a3, ttt_steps(config.ttt_a3, dt)
        self.exec_req = ttt_steps(config.ttt_exec, dt)
        self.prep_steps = int(round(config.t_prep / dt))
        self._due: dict[int, list[int]] = {}
        self._next_preamble = np.zeros(n_cells, dtype=int)

    # -- attachment -----------------------------------------------------------------
    def attach(self, ue: int, cell: int, beam: int) -> None:
        self.contexts[ue] = HandoverContext(cell, beam)
        self.serving[ue] = cell
        self.entry_counter[ue] = 0
        self.exec_counter[ue] = 0
        self.exec_ok[ue] = False
        self.entry_ok[ue] = True
        self.entry_ok[ue, cell] = False

    def detach(self, ue: int) -> None:
        self.contexts[ue] = None
        self.serving[ue] = -1
        self.entry_counter[ue] = 0
        self.exec_counter[ue] = 0
        self.entry_ok[ue] = False
        self.exec_ok[ue] = False

    def _freeze(self, ue: int) -> None:
        """Stop all condition evaluation for a UE that started random access."""
        self.entry_ok[ue] = False
        self.exec_ok[ue] = False
        self.entry_counter[ue] = 0
        self.exec_counter[ue] = 0

    def _refresh_entry(self, ue: int) -> None:
        ctx = self.contexts[ue]
        room = ctx.pending is None and (len(ctx.prepared) < self.config.max_prepared if self.cho
                                        else True)
        self.entry_ok[ue] = room
        if room:
            self.entry_ok[ue, ctx.serving_cell] = False
            for c in ctx.prepared:
                self.entry_ok[ue, c] = False
        else:
            self.entry_counter[ue] = 0

    # -- step -----------------------------------------------------------------------
    def step(self, step: int, l3_cell: np.ndarray, l3_beam: np.ndarray, serving_sinr: np.ndarray,
             offsets: np.ndarray | None = None):
        """Advance one time step.

        Returns ``(events, starts)``; ``starts`` lists ``(ue, PreparedTarget)``
        pairs whose random access begins at this step.
        """
        events: list[HandoverEvent] = []
        starts: list[tuple[int, PreparedTarget]] = []
        ar = np.arange(len(self.serving))
        srv_l3 = l3_cell[ar, np.maximum(self.serving, 0)][:, None]

        fired, self.entry_counter = evaluate_entering_condition(
            srv_l3, l3_cell, self.entry_offset, self.entry_counter, self.entry_req)
        self.entry_counter[~self.entry_ok] = 0
        fired &= self.entry_ok
        if self.cho:
            exec_fired, self.exec_counter = evaluate_entering_condition(
                srv_l3, l3_cell, self.config.o_exec, self.exec_counter, self.exec_req)
            self.exec_counter[~self.exec_ok] = 0
            exec_fired &= self.exec_ok
            for ue in np.flatnonzero(exec_fired.any(axis=1)):
                self._execute(int(ue), step, l3_cell, exec_fired, events, starts)

        for ue in np.flatnonzero(fired.any(axis=1)):
            ue = int(ue)
            if self.contexts[ue].phase == "executing":
                continue
            self._report(ue, step, l3_cell, l3_beam, fired[ue], serving_sinr, offsets, events)

        for ue in self._due.pop(step, []):
            self._deliver(ue, step, serving_sinr, events, starts)
        return events, starts

    def _report(self, ue, step, l3_cell, l3_beam, fired_row, serving_sinr, offsets, events):
        ctx = self.contexts[ue]
        cands = np.flatnonzero(fired_row)
        target = int(cands[np.argmax(l3_cell[ue, cands])])
        if not serving_sinr[ue] > self.gamma_out:
            # measurement report lost on the serving link
            self.entry_counter[ue, target] = 0
            events.append(HandoverEvent(ue, "prep_aborted", {"target": target, "stage": "report"}))
            return
        off = None if offsets is None else offsets[target]
        prep = prepare_target(target, l3_beam[ue, target], self.n_b, off, step,
                              self.config.o_exec, int(self._next_preamble[target]))
        self._next_preamble[target] += len(prep.beams)
        ctx.pending = PendingPreparation(prep, step + self.prep_steps)
        ctx.phase = "preparing"
        self._refresh_entry(ue)
        self._due.setdefault(step + self.prep_steps, []).append(ue)

    def _deliver(self, ue, step, serving_sinr, events, starts):
        ctx = self.contexts[ue]
        if ctx is None or ctx.pending is None or ctx.pending.ready_at != step:
            return      # detached (RLF) or superseded since the report
        prep = ctx.pending.target
        ctx.pending = None
        if not serving_sinr[ue] > self.gamma_out:
            events.append(HandoverEvent(ue, "prep_aborted", {"target": prep.cell, "stage": "command"}))
            ctx.phase = "prepared" if ctx.prepared else "idle"
            self._refresh_entry(ue)
            return
        if self.cho:
            ctx.prepared[prep.cell] = prep
            ctx.phase = "prepared"
            self.exec_ok[ue, prep.cell] = True
            self._refresh_entry(ue)
            events.append(HandoverEvent(ue, "prepared", {"target": prep.cell,
                                                         "beams": list(prep.beams)}))
        else:
            ctx.phase = "executing"
            self._freeze(ue)
            events.append(HandoverEvent(ue, "handover_command", {"target": prep.cell,
                                                                 "beams": list(prep.beams)}))
            starts.append((ue, prep))

    def _execute(self, ue, step, l3_cell, exec_fired, events, starts):
        ctx = self.contexts[ue]
        cands = np.flatnonzero(exec_fired[ue])
        target = int(cands[np.argmax(l3_cell[ue, cands])])
        assert target in ctx.prepared, "execute condition on an unprepared cell"
        prep = ctx.prepared[target]
        t_f = step - prep.prepared_at - self.prep_steps
        ctx.phase = "executing"
        ctx.pending = None
        self._freeze(ue)
        events.append(HandoverEvent(ue, "execute", {"target": target, "t_f_steps": int(t_f)}))
        starts.append((ue, prep))
