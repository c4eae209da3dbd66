"""Configuration dataclasses and JSON (de)serialization.

Every sub-document of the run configuration maps onto one dataclass below.
Unknown keys are rejected so that typos in sweep specs fail loudly instead of
silently falling back to defaults.
"""
from __future__ import annotations

import dataclasses
import json
import math
import types
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any


class ConfigError(ValueError):
    """Raised for invalid or unreadable configuration."""


def parse_float(value: Any) -> float:
    """Accept numbers and the literals "inf"/"-inf" (JSON has no infinity)."""
    if isinstance(value, bool):
        raise ConfigError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "+inf", "infinity"):
            return math.inf
        if text in ("-inf", "-infinity"):
            return -math.inf
        try:
            return float(text)
        except ValueError:
            pass
    raise ConfigError(f"expected a number or 'inf'/'-inf', got {value!r}")


def format_float(value: float) -> Any:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


@dataclass
class GridConfig:
    blocks_x: int = 6
    blocks_y: int = 2
    block_m: float = 80.0
    street_m: float = 20.0
    # (ix, iy) block indices; None picks a default location
    square_block: tuple[int, int] | None = None
    pedestrian_block: tuple[int, int] | None = None


@dataclass
class UsersConfig:
    street: int = 200
    square: int = 40
    pedestrian: int = 80
    scale: float = 1.0
    street_speed_kmh: float = 30.0
    pedestrian_speed_kmh: float = 3.0
    height_m: float = 1.5


@dataclass
class CellsConfig:
    per_site_sectors: int = 3
    # None: every site on the checkerboard of intersections
    n_sites: int | None = None
    height_m: float = 10.0


@dataclass
class BeamGridConfig:
    narrow_count: int = 8
    narrow_azimuth_start: float = -52.5
    narrow_azimuth_step: float = 15.0
    narrow_elevation: float = 0.0
    narrow_beamwidth: float = 10.0
    narrow_peak_gain: float = 23.0
    wide_count: int = 4
    wide_azimuth_start: float = -45.0
    wide_azimuth_step: float = 30.0
    wide_elevation: float = -7.0
    wide_beamwidth: float = 20.0
    wide_peak_gain: float = 17.0


@dataclass
class ScenarioConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    users: UsersConfig = field(default_factory=UsersConfig)
    cells: CellsConfig = field(default_factory=CellsConfig)
    beams: BeamGridConfig = field(default_factory=BeamGridConfig)

    def validate(self) -> None:
        g, u, c, b = self.grid, self.users, self.cells, self.beams
        if g.blocks_x < 1 or g.blocks_y < 1:
            raise ConfigError("grid needs at least one block in each direction")
        if g.block_m <= 0 or g.street_m <= 0:
            raise ConfigError("block and street sizes must be positive")
        for name, blk in (("square_block", g.square_block), ("pedestrian_block", g.pedestrian_block)):
            if blk is not None and not (0 <= blk[0] < g.blocks_x and 0 <= blk[1] < g.blocks_y):
                raise ConfigError(f"grid.{name} {blk} outside the grid")
        if min(u.street, u.square, u.pedestrian) < 0 or u.scale < 0:
            raise ConfigError("user counts must be non-negative")
        if u.street_speed_kmh < 0 or u.pedestrian_speed_kmh < 0:
            raise ConfigError("user speeds must be non-negative")
        if c.per_site_sectors < 1:
            raise ConfigError("cells.per_site_sectors must be >= 1")
        if c.n_sites is not None and c.n_sites < 1:
            raise ConfigError("cells.n_sites must be >= 1")
        if b.narrow_count < 0 or b.wide_count < 0 or b.narrow_count + b.wide_count < 1:
            raise ConfigError("beam grid needs at least one beam")
        if b.narrow_beamwidth <= 0 or b.wide_beamwidth <= 0:
            raise ConfigError("beamwidths must be positive")


@dataclass
class ChannelConfig:
    carrier_freq: float = 28.0                 # GHz
    tx_power_per_prb: float = 12.0             # dBm
    prb_bandwidth: float = 10.0                # MHz
    noise_figure: float = 9.0                  # dB
    pathloss_coeffs: tuple[float, float] = (32.4, 21.0)
    pathloss_freq_coeff: float = 20.0
    # "street_canyon": buildings block the direct path; "los": every link LOS
    propagation: str = "street_canyon"
    nlos_coeffs: tuple[float, float, float] = (22.4, 35.3, 21.3)
    shadowing_sigma: float = 4.0               # dB
    shadowing_corr_dist: float = 10.0          # m
    # beam-dependent part of the shadowing, on top of the per-site map
    beam_shadowing_sigma: float = 0.0          # dB
    beam_shadowing_corr_dist: float = 10.0     # m
    fading_sigma: float = 3.0                  # dB
    fading_doppler_coherence: float | None = None  # s; None derives it from UE speed
    # share of the fading variance common to all beams of a cell; 1 means
    # one fading process per UE-cell link
    fading_common: float = 1.0
    front_back_ratio: float = 30.0             # dB
    k_b: int = 4
    # link SINR from "l1" averaged beam RSRP or from the "raw" SSB sample
    sinr_input: str = "l1"

    def validate(self) -> None:
        if self.carrier_freq <= 0 or self.prb_bandwidth <= 0:
            raise ConfigError("carrier frequency and PRB bandwidth must be positive")
        if self.k_b < 1:
            raise ConfigError("channel.k_b must be >= 1")
        if self.shadowing_sigma < 0 or self.fading_sigma < 0:
            raise ConfigError("shadowing/fading sigma must be non-negative")
        if self.shadowing_corr_dist <= 0 or self.beam_shadowing_corr_dist <= 0:
            raise ConfigError("channel shadowing correlation distances must be positive")
        if not 0.0 <= self.fading_common <= 1.0:
            raise ConfigError("channel.fading_common must be in [0, 1]")
        if self.beam_shadowing_sigma < 0:
            raise ConfigError("channel.beam_shadowing_sigma must be non-negative")
        if self.fading_doppler_coherence is not None and self.fading_doppler_coherence <= 0:
            raise ConfigError("channel.fading_doppler_coherence must be positive")
        if self.propagation not in ("street_canyon", "los"):
            raise ConfigError(f"unknown propagation model {self.propagation!r}")
        if self.sinr_input not in ("l1", "raw"):
            raise ConfigError(f"channel.sinr_input must be 'l1' or 'raw', got {self.sinr_input!r}")


@dataclass
class MeasurementConfig:
    omega: int = 2
    n_l1: int = 4
    p_thr: float = -100.0
    n_str: int = 2
    k_cell: float = 4.0
    k_beam: float = 4.0
    l1_domain: str = "dB"
    ssb_period: int = 2                        # steps between SSB occasions
    meas_noise_sigma: float = 0.0

    def validate(self) -> None:
        if self.omega < 1 or self.n_l1 < 1 or self.n_str < 1 or self.ssb_period < 1:
            raise ConfigError("omega, n_l1, n_str and ssb_period must be >= 1")
        if self.k_cell < 0 or self.k_beam < 0:
            raise ConfigError("filter coefficients must be non-negative")
        if self.l1_domain not in ("dB", "linear"):
            raise ConfigError(f"unknown l1_domain {self.l1_domain!r}")
        if self.meas_noise_sigma < 0:
            raise ConfigError("measurements.meas_noise_sigma must be non-negative")


@dataclass
class HandoverConfig:
    mode: str = "cho"
    o_a3: float = 3.0
    ttt_a3: float = 0.08
    o_add: float = -3.0
    ttt_add: float = 0.08
    o_exec: float = 3.0
    ttt_exec: float = 0.08
    t_prep: float = 0.05
    max_prepared: int = 1

    def validate(self) -> None:
        if self.mode not in ("bho", "cho"):
            raise ConfigError(f"handover.mode must be 'bho' or 'cho', got {self.mode!r}")
        if min(self.ttt_a3, self.ttt_add, self.ttt_exec, self.t_prep) < 0:
            raise ConfigError("TTT and preparation times must be non-negative")
        if self.max_prepared < 1:
            raise ConfigError("handover.max_prepared must be >= 1")


@dataclass
class RachConfig:
    variant: str = "threegpp"
    xi_access_dbm: float = -math.inf
    n_b: int = 1
    t_hof_ms: float = 500.0
    attempt_period: int = 2                    # steps between attempt occasions
    max_attempts: int | None = None

    def validate(self) -> None:
        if self.variant not in ("threegpp", "re_rach"):
            raise ConfigError(f"rach.variant must be 'threegpp' or 're_rach', got {self.variant!r}")
        if self.n_b < 1:
            raise ConfigError("rach.n_b must be >= 1")
        if self.t_hof_ms <= 0 or self.attempt_period < 1:
            raise ConfigError("rach.t_hof_ms and attempt_period must be positive")
        if self.max_attempts is not None and self.max_attempts < 1:
            raise ConfigError("rach.max_attempts must be >= 1")


@dataclass
class RlfConfig:
    gamma_out_db: float = -8.0
    gamma_in_db: float = -6.0
    t_rlf_ms: float = 600.0
    reest_delay_ms: float = 20.0

    def validate(self) -> None:
        if not self.gamma_in_db > self.gamma_out_db:
            raise ConfigError("rlf.gamma_in_db must exceed rlf.gamma_out_db")
        if self.t_rlf_ms <= 0 or self.reest_delay_ms < 0:
            raise ConfigError("rlf timers must be positive")


@dataclass
class BellConfig:
    enabled: bool = False
    delta_db: float = 1.0
    clamp_db: float = 12.0
    penalize_all_prepared: bool = True

    def validate(self) -> None:
        if self.delta_db < 0 or self.clamp_db < 0:
            raise ConfigError("bell.delta_db and bell.clamp_db must be non-negative")


@dataclass
class SimConfig:
    seed: int = 1
    duration: float = 300.0
    dt: float = 0.01
    warmup: float = 2.0
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    measurements: MeasurementConfig = field(default_factory=MeasurementConfig)
    handover: HandoverConfig = field(default_factory=HandoverConfig)
    rach: RachConfig = field(default_factory=RachConfig)
    rlf: RlfConfig = field(default_factory=RlfConfig)
    bell: BellConfig = field(default_factory=BellConfig)

    def validate(self) -> "SimConfig":
        if self.duration <= 0:
            raise ConfigError("duration must be positive")
        if self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.warmup < 0:
            raise ConfigError("warmup must be non-negative")
        for sub in (self.scenario, self.channel, self.measurements, self.handover,
                    self.rach, self.rlf, self.bell):
            sub.validate()
        return self

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    def to_dict(self) -> dict:
        return to_dict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        return from_dict(cls, data).validate()


def _strip_optional(tp):
    origin = typing.get_origin(tp)
    if origin in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if len(args) == 1:
            return args[0], True
    return tp, False


def _convert(tp, value, where: str):
    tp, optional = _strip_optional(tp)
    if value is None:
        if optional:
            return None
        raise ConfigError(f"{where}: null is not allowed")
    if dataclasses.is_dataclass(tp):
        if not isinstance(value, dict):
            raise ConfigError(f"{where}: expected an object")
        return from_dict(tp, value, where)
    if tp is float:
        try:
            return parse_float(value)
        except ConfigError as exc:
            raise ConfigError(f"{where}: {exc}") from None
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return int(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    if typing.get_origin(tp) is tuple:
        args = typing.get_args(tp)
        if not isinstance(value, (list, tuple)) or len(value) != len(args):
            raise ConfigError(f"{where}: expected a list of {len(args)} values")
        return tuple(_convert(a, v, f"{where}[{i}]") for i, (a, v) in enumerate(zip(args, value)))
    return value


def from_dict(cls, data: dict, where: str = ""):
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown key(s) in {where or 'config'}: {sorted(unknown)}")
    kwargs = {k: _convert(hints[k], v, f"{where}.{k}" if where else k) for k, v in data.items()}
    return cls(**kwargs)


def to_dict(obj) -> dict:
    out = {}
    for f in dataclasses.fields(obj):
        value = getattr(obj, f.name)
        if dataclasses.is_dataclass(value):
            out[f.name] = to_dict(value)
        elif isinstance(value, tuple):
            out[f.name] = [format_float(v) if isinstance(v, float) else v for v in value]
        elif isinstance(value, float):
            out[f.name] = format_float(value)
        else:
            out[f.name] = value
    return out


def load_config(path: str | Path) -> SimConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return SimConfig.from_dict(data)


def set_path(data: dict, dotted: str, value: Any) -> None:
    """Set ``a.b.c`` inside a nested dict, creating levels on the way."""
    keys = dotted.split(".")
    node = data
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot set {dotted}: {key} is not an object")
    node[keys[-1]] = value


def desk_scale(**overrides) -> SimConfig:
    """Desk-scale scenario used by the acceptance suite: 3x3 blocks, 8 sites, 60 UEs."""
    cfg = SimConfig(duration=60.0)
    cfg.scenario.grid = GridConfig(blocks_x=3, blocks_y=3)
    cfg.scenario.users = UsersConfig(street=38, square=7, pedestrian=15)
    # a single CHO preparation loses to BHO on RLF in this small grid
    cfg.handover.max_prepared = 8
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg.validate()
