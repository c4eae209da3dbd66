"""Mobility KPI counters and the per-run report."""
from __future__ import annotations

from dataclasses import dataclass, field

from .bell import HofClass

# event kinds that are logged but not counted
LOG_ONLY = frozenset({"attach", "prepared", "handover_command", "execute", "rach_start",
                      "reestablished", "unconnected", "hof_declared"})


@dataclass
class KpiCounters:
    n_ue: int
    sim_seconds: float
    n_cbra: int = 0
    n_cfra: int = 0
    n_hof: int = 0
    n_rlf: int = 0
    n_prep_aborted: int = 0
    hof_by_class: dict[HofClass, int] = field(default_factory=lambda: {c: 0 for c in HofClass})


def record(counters: KpiCounters, event) -> KpiCounters:
    kind, payload = event.kind, event.payload
    if kind == "rach_success":
        if payload["preamble"] == "CFRA":
            counters.n_cfra += 1
        elif payload["preamble"] == "CBRA":
            counters.n_cbra += 1
        else:
            raise ValueError(f"unknown preamble kind {payload['preamble']!r}")
    elif kind == "hof":
        counters.n_hof += 1
        counters.hof_by_class[HofClass(payload["cls"])] += 1
    elif kind == "rlf":
        counters.n_rlf += 1
    elif kind == "prep_aborted":
        counters.n_prep_aborted += 1
    elif kind not in LOG_ONLY:
        raise ValueError(f"unknown event kind {kind!r}")
    return counters


@dataclass(frozen=True)
class KpiReport:
    n_cbra: int
    n_cfra: int
    r_cbra_pct: float
    n_hof: int
    n_rlf: int
    n_prep_aborted: int
    hof_per_ue_min: float
    rlf_per_ue_min: float
    total_per_ue_min: float
    hof_by_class: dict


def cbra_ratio(n_cbra: int, n_cfra: int) -> float:
    """Share of contention-based accesses in percent; 0 when nothing accessed."""
    total = n_cbra + n_cfra
    return 100.0 * n_cbra / total if total else 0.0


def report(counters: KpiCounters) -> KpiReport:
    if counters.sim_seconds <= 0 or counters.n_ue <= 0:
        raise ValueError("report needs a positive duration and UE count")
    ue_min = counters.n_ue * counters.sim_seconds / 60.0
    hof = counters.n_hof / ue_min
    rlf = counters.n_rlf / ue_min
    return KpiReport(
        n_cbra=counters.n_cbra,
        n_cfra=counters.n_cfra,
        r_cbra_pct=cbra_ratio(counters.n_cbra, counters.n_cfra),
        n_hof=counters.n_hof,
        n_rlf=counters.n_rlf,
        n_prep_aborted=counters.n_prep_aborted,
        hof_per_ue_min=hof,
        rlf_per_ue_min=rlf,
        total_per_ue_min=hof + rlf,
        hof_by_class={c.value: n for c, n in counters.hof_by_class.items()},
    )
