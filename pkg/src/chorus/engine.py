"""Discrete-time main loop.

Per step, in order: mobility, channel sampling at SSB occasions, L1/L3
filter updates, handover FSM, random access, RLF monitoring and
re-establishment, BELL offset updates, KPI recording.

Mobility, channel and measurements do not depend on any mobility decision,
so they are produced once by :class:`ChannelTrace` and can drive several
:class:`Simulation` instances in lockstep (sweeps over handover, RACH and
BELL parameters share the exact same radio conditions).
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from . import bell, kpi
from .channel import ChannelModel, scheduled_beams, sinr_db
from .config import ConfigError, SimConfig
from .handover import HandoverController
from .linkmon import RLF, RlfState, reestablish, rlf_step
from .measurements import MeasurementState
from .rach import HOF, SUCCESS, RachAttempt, rach_attempt_step, start_attempt
from .rng import stream
from .scenario import build_layout, spawn_users

log = logging.getLogger(__name__)

CONNECTED, IN_RACH, REESTABLISHING = 0, 1, 2


@dataclass
class Event:
    step: int
    ue: int
    kind: str
    payload: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"step": self.step, "ue": self.ue, "kind": self.kind,
                           "payload": self.payload}, sort_keys=True)


@dataclass
class Snapshot:
    step: int
    sampled: bool
    filtered: bool
    rsrp_dbm: np.ndarray
    rsrp_mw: np.ndarray
    l1_mw: np.ndarray
    l1_beam: np.ndarray
    l3_beam: np.ndarray
    l3_cell: np.ndarray
    best_beam: np.ndarray       # (U, C) strongest L1 beam per cell


def trace_key(cfg: SimConfig) -> str:
    """Configs with equal keys see bit-identical radio conditions."""
    d = cfg.to_dict()
    keep = {k: d[k] for k in ("seed", "duration", "dt", "scenario", "channel", "measurements")}
    return json.dumps(keep, sort_keys=True)


class ChannelTrace:
    def __init__(self, cfg: SimConfig):
        cfg.validate()
        self.config = cfg
        self.layout = build_layout(cfg.scenario, cfg.seed)
        self.population = spawn_users(self.layout, cfg.scenario, cfg.seed)
        m = cfg.measurements
        self.channel = ChannelModel(self.layout, cfg.channel, self.population, cfg.seed, m.ssb_period * cfg.dt)
        self.meas = MeasurementState((len(self.population), self.layout.n_cells, self.layout.n_beams), m)
        self._noise_rng = stream(cfg.seed, "measurement") if m.meas_noise_sigma > 0 else None

    def __iter__(self):
        cfg, m = self.config, self.config.measurements
        pop = self.population
        snap = None
        for step in range(cfg.n_steps):
            if step:
                pop.advance(cfg.dt)
            sampled = step % m.ssb_period == 0
            if sampled:
                rsrp = self.channel.sample(pop)
                measured = rsrp
                if self._noise_rng is not None:
                    measured = rsrp + m.meas_noise_sigma * self._noise_rng.standard_normal(rsrp.shape)
                self.meas.push(measured)
                rsrp_mw = np.power(10.0, rsrp / 10.0)
            filtered = step % m.omega == 0
            if filtered:
                self.meas.update()
                best = np.argmax(self.meas.l1_beam, axis=-1)
                l1_mw = np.power(10.0, self.meas.l1_beam / 10.0)
            snap = Snapshot(step, sampled, filtered, rsrp, rsrp_mw, l1_mw, self.meas.l1_beam,
                            self.meas.l3_beam, self.meas.l3_cell, best)
            yield snap


@dataclass
class RunResult:
    config: SimConfig
    kpi_report: kpi.KpiReport
    counters: kpi.KpiCounters
    event_log: list[Event]
    offset_table_final: bell.OffsetTable
    t_f_steps: list[int]

    def events_jsonl(self) -> str:
        return "".join(e.to_json() + "\n" for e in self.event_log)


class Simulation:
    """Mobility decisions of one configuration, fed snapshot by snapshot."""

    def __init__(self, cfg: SimConfig, n_ue: int, n_cells: int, n_beams: int, noise_mw: float):
        self.cfg = cfg
        self.n_ue = n_ue
        self.dt = cfg.dt
        self.gamma_out = cfg.rlf.gamma_out_db
        self.noise_mw = noise_mw
        self.k_b = min(cfg.channel.k_b, n_beams)
        self.ho = HandoverController(cfg.handover, cfg.rach.n_b, n_ue, n_cells, cfg.dt, self.gamma_out)
        self.rlf = RlfState(n_ue)
        self.offsets = bell.OffsetTable(n_cells, n_beams, cfg.bell.delta_db, cfg.bell.clamp_db,
                                        cfg.bell.penalize_all_prepared)
        self.status = np.full(n_ue, REESTABLISHING, dtype=int)
        self.serving = np.full(n_ue, -1, dtype=int)
        self.serving_beam = np.full(n_ue, -1, dtype=int)
        self.serving_sinr = np.full(n_ue, -np.inf)
        self.sinr = None
        self.rach: dict[int, RachAttempt] = {}
        # ue -> (due step, pending HOF record or None, first evaluation?)
        self.reest: dict[int, tuple[int, RachAttempt | None, bool]] = {}
        self.reest_delay = int(round(cfg.rlf.reest_delay_ms / 1000.0 / cfg.dt))
        self.retry_period = cfg.measurements.ssb_period
        self.warmup_steps = int(round(cfg.warmup / cfg.dt))
        if self.warmup_steps >= cfg.n_steps:
            # nothing would be counted; a run shorter than the warm-up counts everything
            log.warning("duration %.3g s does not exceed the warm-up; counting from step 0",
                        cfg.duration)
            self.warmup_steps = 0
        counted = max(cfg.n_steps - self.warmup_steps, 0) * cfg.dt
        self.counters = kpi.KpiCounters(n_ue=n_ue, sim_seconds=counted)
        self.events: list[Event] = []
        self.t_f_steps: list[int] = []

    # -- helpers --------------------------------------------------------------------
    def _connect(self, ue: int, cell: int, beam: int) -> None:
        self.status[ue] = CONNECTED
        self.serving[ue] = cell
        self.serving_beam[ue] = beam
        self.serving_sinr[ue] = self.sinr[ue, cell, beam]
        self.ho.attach(ue, cell, beam)
        self.rlf.reset(ue)

    def _drop(self, ue: int) -> None:
        self.status[ue] = REESTABLISHING
        self.serving[ue] = -1
        self.serving_beam[ue] = -1
        self.serving_sinr[ue] = -np.inf
        self.ho.detach(ue)
        self.rlf.reset(ue)

    def _update_links(self, snap: Snapshot) -> None:
        conn = self.status == CONNECTED
        ar = np.arange(self.n_ue)
        srv = np.maximum(self.serving, 0)
        self.serving_beam = np.where(conn, snap.best_beam[ar, srv], -1)
        for ue in np.flatnonzero(conn):
            self.ho.contexts[ue].serving_beam = int(self.serving_beam[ue])
        counts = np.zeros(snap.rsrp_mw.shape[1:], dtype=int)
        np.add.at(counts, (self.serving[conn], self.serving_beam[conn]), 1)
        sched = scheduled_beams(counts, self.k_b)
        rx = snap.l1_mw if self.cfg.channel.sinr_input == "l1" else snap.rsrp_mw
        self.sinr = sinr_db(rx, sched, self.k_b, self.noise_mw)
        self.serving_sinr = np.where(conn, self.sinr[ar, srv, np.maximum(self.serving_beam, 0)], -np.inf)

    # -- main step ------------------------------------------------------------------
    def on_step(self, snap: Snapshot) -> None:
        step = snap.step
        ev: list[Event] = []
        bell_queue: list[tuple[int, int, bell.HofEvent, bell.HofClass]] = []

        if step == 0:
            self._initial_attach(snap, ev)
        elif snap.sampled or snap.filtered:
            self._update_links(snap)

        # handover FSM
        ho_events, starts = self.ho.step(step, snap.l3_cell, snap.l3_beam, self.serving_sinr,
                                         self.offsets.offsets)
        for h in ho_events:
            ev.append(Event(step, h.ue, h.kind, h.payload))
            if h.kind == "execute":
                self.t_f_steps.append(h.payload["t_f_steps"])
        for ue, prep in starts:
            self.rach[ue] = start_attempt(ue, int(self.serving[ue]), prep, step, self.cfg.rach, self.dt)
            self.status[ue] = IN_RACH
            self.serving_sinr[ue] = -np.inf
            self.rlf.reset(ue)
            ev.append(Event(step, ue, "rach_start", {"target": prep.cell}))

        # random access
        for ue in sorted(self.rach):
            att = self.rach[ue]
            c = att.target.cell
            out = rach_attempt_step(att, self.sinr[ue, c], snap.l1_beam[ue, c], step,
                                    self.cfg.rach, self.gamma_out)
            if out == SUCCESS:
                del self.rach[ue]
                ev.append(Event(step, ue, "rach_success", {"target": c, "beam": att.access_beam + 1,
                                                            "preamble": att.preamble_kind,
                                                            "attempts": att.attempts}))
                self._connect(ue, c, att.access_beam)
            elif out == HOF:
                del self.rach[ue]
                ev.append(Event(step, ue, "hof_declared", {"target": c, "beam": att.access_beam + 1}))
                self._drop(ue)
                self.reest[ue] = (step + self.reest_delay, att, True)

        # radio link monitoring
        status = rlf_step(self.rlf, self.serving_sinr, self.cfg.rlf, step, self.dt,
                          self.status == CONNECTED)
        for ue in np.flatnonzero(status == RLF):
            ue = int(ue)
            ev.append(Event(step, ue, "rlf", {"cell": int(self.serving[ue])}))
            self._drop(ue)
            self.reest[ue] = (step + self.reest_delay, None, True)

        # re-establishment
        for ue in sorted(self.reest):
            due, att, first = self.reest[ue]
            if step < due:
                continue
            found = reestablish(snap.l1_beam[ue], self.sinr[ue], self.gamma_out)
            if att is not None:
                hof_ev = bell.HofEvent(ue, att.serving, att.target.cell, att.access_beam,
                                       att.target.beams, None if found is None else found[0],
                                       None if found is None else found[1], step)
                cls = bell.classify_hof(hof_ev)
                ev.append(Event(step, ue, "hof", {"serving": att.serving, "target": att.target.cell,
                                                  "access_beam": att.access_beam + 1,
                                                  "prepared": [b + 1 for b in att.target.beams],
                                                  "reest_cell": hof_ev.reest_cell,
                                                  "reest_beam": None if found is None else found[1] + 1,
                                                  "cls": cls.value}))
                bell_queue.append((ue, step, hof_ev, cls))
            if found is None:
                if first:
                    ev.append(Event(step, ue, "unconnected", {}))
                self.reest[ue] = (step + self.retry_period, None, False)
            else:
                del self.reest[ue]
                self._connect(ue, *found)
                ev.append(Event(step, ue, "reestablished", {"cell": found[0], "beam": found[1] + 1}))

        if self.cfg.bell.enabled:
            for _, _, hof_ev, cls in sorted(bell_queue, key=lambda q: (q[0], q[1])):
                self.offsets.apply(hof_ev, cls)

        ev.sort(key=lambda e: e.ue)
        counting = step >= self.warmup_steps
        for e in ev:
            if counting:
                kpi.record(self.counters, e)
        self.events.extend(ev)

    def _initial_attach(self, snap: Snapshot, ev: list[Event]) -> None:
        # SINR needs attachments and attachment is by RSRP alone, so attach first
        flat = snap.l1_beam.reshape(self.n_ue, -1).argmax(axis=1)
        n_beams = snap.l1_beam.shape[2]
        for ue in range(self.n_ue):
            c, b = divmod(int(flat[ue]), n_beams)
            self.status[ue] = CONNECTED
            self.serving[ue] = c
            self.serving_beam[ue] = b
            self.ho.attach(ue, c, b)
        self._update_links(snap)

    def result(self) -> RunResult:
        return RunResult(self.cfg, kpi.report(self.counters), self.counters, self.events,
                         self.offsets, self.t_f_steps)


def run_batch(configs: list[SimConfig]) -> list[RunResult]:
    """Run several configurations over one shared radio trace."""
    if not configs:
        return []
    key = trace_key(configs[0])
    for cfg in configs:
        cfg.validate()
        if trace_key(cfg) != key:
            raise ConfigError("run_batch needs identical seed/scenario/channel/measurement settings")
    trace = ChannelTrace(configs[0])
    lay = trace.layout
    sims = [Simulation(cfg, len(trace.population), lay.n_cells, lay.n_beams, trace.channel.noise_mw)
            for cfg in configs]
    for snap in trace:
        for sim in sims:
            sim.on_step(snap)
    return [sim.result() for sim in sims]


def run(config: SimConfig) -> RunResult:
    return run_batch([config])[0]
