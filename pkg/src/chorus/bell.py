"""Root-cause classification of handover failures and beam-specific
preparation offsets (BELL)."""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np


class HofClass(str, Enum):
    COVERAGE_HOLE = "coverage_hole"
    WRONG_BEAM_PREPARED = "wrong_beam_prepared"
    EARLY_EXECUTION = "early_execution"
    WRONG_CELL_PREPARED = "wrong_cell_prepared"


@dataclass(frozen=True)
class HofEvent:
    ue: int
    serving: int
    target: int
    access_beam: int
    prepared_beams: tuple[int, ...]
    reest_cell: int | None
    reest_beam: int | None
    step: int

    def __post_init__(self):
        if (self.reest_cell is None) != (self.reest_beam is None):
            raise ValueError("reest_cell and reest_beam must be given together")


def classify_hof(event: HofEvent) -> HofClass:
    """Fixed decision tree on the re-establishment outcome.

    Re-establishing on the target through a prepared beam means the
    preparation was right and only the timing failed, so it shares the
    early-execution leaf.
    """
    assert event.serving != event.target, "handover target equals serving cell"
    if event.reest_cell is None:
        return HofClass.COVERAGE_HOLE
    if event.reest_cell == event.target:
        if event.reest_beam not in event.prepared_beams:
            return HofClass.WRONG_BEAM_PREPARED
        return HofClass.EARLY_EXECUTION
    if event.reest_cell == event.serving:
        return HofClass.EARLY_EXECUTION
    return HofClass.WRONG_CELL_PREPARED


def effective_l3(l3, offset):
    return np.asarray(l3) + np.asarray(offset)


class OffsetTable:
    """Preparation offsets o_prep[cell, beam] in dB, shared network-wide."""

    def __init__(self, n_cells: int, n_beams: int, delta: float = 1.0, clamp: float = 12.0,
                 penalize_all_prepared: bool = True):
        self.offsets = np.zeros((n_cells, n_beams))
        self.delta = delta
        self.clamp = clamp
        self.penalize_all_prepared = penalize_all_prepared

    def __getitem__(self, key):
        return self.offsets[key]

    def copy(self) -> "OffsetTable":
        new = OffsetTable(*self.offsets.shape, self.delta, self.clamp, self.penalize_all_prepared)
        new.offsets = self.offsets.copy()
        return new

    def total(self) -> float:
        return float(self.offsets.sum())

    def apply(self, event: HofEvent, cls: HofClass) -> None:
        """Penalise the prepared beam(s) and reward the re-establishment beam;
        every other class leaves the table untouched."""
        if cls is not HofClass.WRONG_BEAM_PREPARED:
            return
        row = self.offsets[event.target]
        penalized = event.prepared_beams if self.penalize_all_prepared else (event.access_beam,)
        for b in penalized:
            row[b] -= self.delta
        row[event.reest_beam] += self.delta
        np.clip(row, -self.clamp, self.clamp, out=row)

    def to_records(self) -> list[dict]:
        """JSON records; beams are reported 1-based."""
        return [{"cell": int(c), "beam": int(b) + 1, "offset_db": float(self.offsets[c, b])}
                for c in range(self.offsets.shape[0]) for b in range(self.offsets.shape[1])]

    def to_json(self) -> str:
        return json.dumps(self.to_records(), indent=1)

    def load_records(self, records: list[dict]) -> None:
        for rec in records:
            self.offsets[int(rec["cell"]), int(rec["beam"]) - 1] = float(rec["offset_db"])
        np.clip(self.offsets, -self.clamp, self.clamp, out=self.offsets)


def apply_update(table: OffsetTable, event: HofEvent, cls: HofClass) -> OffsetTable:
    new = table.copy()
    new.apply(event, cls)
    return new
