"""Network layout (Manhattan grid, three-sector sites, beam grid) and UE mobility."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .config import ConfigError, ScenarioConfig
from .rng import stream

CORNER_INSET_M = 1.0
KMH = 1.0 / 3.6


@dataclass(frozen=True)
class Rect:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def contains(self, x: float, y: float, tol: float = 1e-9) -> bool:
        return (self.xmin - tol <= x <= self.xmax + tol) and (self.ymin - tol <= y <= self.ymax + tol)


@dataclass(frozen=True)
class BeamConfig:
    id: int                 # 1-based beam index
    azimuth: float          # deg, relative to the sector boresight
    elevation: float        # deg, negative is below the horizon
    beamwidth: float        # deg, half-power width
    peak_gain: float        # dBi


@dataclass(frozen=True)
class CellSite:
    id: int
    site: int
    position: tuple[float, float, float]
    boresight_azimuth: float
    beams: tuple[BeamConfig, ...]


@dataclass
class Layout:
    cells: list[CellSite]
    streets: list[Rect]              # degenerate rectangles (segments)
    pedestrian_zones: list[Rect]
    squares: list[Rect]
    buildings: list[Rect]
    bounds: Rect
    # packed arrays for the vectorised channel
    cell_xyz: np.ndarray = field(init=False, repr=False)
    boresight: np.ndarray = field(init=False, repr=False)
    cell_site: np.ndarray = field(init=False, repr=False)
    site_xy: np.ndarray = field(init=False, repr=False)
    beam_az: np.ndarray = field(init=False, repr=False)
    beam_el: np.ndarray = field(init=False, repr=False)
    beam_bw: np.ndarray = field(init=False, repr=False)
    beam_peak: np.ndarray = field(init=False, repr=False)
    building_boxes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.cells:
            raise ConfigError("layout needs at least one cell")
        self.cell_xyz = np.array([c.position for c in self.cells], dtype=float)
        self.boresight = np.array([c.boresight_azimuth for c in self.cells], dtype=float)
        self.cell_site = np.array([c.site for c in self.cells], dtype=int)
        n_sites = int(self.cell_site.max()) + 1
        self.site_xy = np.zeros((n_sites, 2))
        for c in self.cells:
            self.site_xy[c.site] = c.position[:2]
        beams = self.cells[0].beams
        self.beam_az = np.array([b.azimuth for b in beams])
        self.beam_el = np.array([b.elevation for b in beams])
        self.beam_bw = np.array([b.beamwidth for b in beams])
        self.beam_peak = np.array([b.peak_gain for b in beams])
        self.building_boxes = np.array(
            [[r.xmin, r.xmax, r.ymin, r.ymax] for r in self.buildings], dtype=float
        ).reshape(-1, 4)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def n_beams(self) -> int:
        return len(self.cells[0].beams)

    @property
    def n_sites(self) -> int:
        return len(self.site_xy)


def beam_grid(cfg) -> tuple[BeamConfig, ...]:
    beams = []
    for k in range(cfg.narrow_count):
        beams.append(BeamConfig(len(beams) + 1, cfg.narrow_azimuth_start + k * cfg.narrow_azimuth_step,
                                cfg.narrow_elevation, cfg.narrow_beamwidth, cfg.narrow_peak_gain))
    for k in range(cfg.wide_count):
        beams.append(BeamConfig(len(beams) + 1, cfg.wide_azimuth_start + k * cfg.wide_azimuth_step,
                                cfg.wide_elevation, cfg.wide_beamwidth, cfg.wide_peak_gain))
    return tuple(beams)


def _zone_blocks(cfg: ScenarioConfig) -> tuple[tuple[int, int], tuple[int, int]]:
    g = cfg.grid
    square = g.square_block if g.square_block is not None else (g.blocks_x // 2, g.blocks_y // 2)
    ped = g.pedestrian_block
    if ped is None:
        ped = (g.blocks_x - 1, 0)
        if ped == tuple(square):
            ped = (0, g.blocks_y - 1)
    return tuple(square), tuple(ped)


def build_layout(config: ScenarioConfig, seed: int = 0) -> Layout:
    """Manhattan grid with sites at building corners of alternating intersections.

    The seed only matters when ``cells.n_sites`` asks for a subset (or superset)
    of the checkerboard intersections.
    """
    config.validate()
    g = config.grid
    s = g.street_m
    pitch = g.block_m + s
    xs = [s / 2 + i * pitch for i in range(g.blocks_x + 1)]
    ys = [s / 2 + j * pitch for j in range(g.blocks_y + 1)]
    bounds = Rect(0.0, xs[-1] + s / 2, 0.0, ys[-1] + s / 2)

    def block(i, j):
        return Rect(xs[i] + s / 2, xs[i + 1] - s / 2, ys[j] + s / 2, ys[j + 1] - s / 2)

    square, ped = _zone_blocks(config)
    open_blocks = {square, ped}
    buildings = [block(i, j) for j in range(g.blocks_y) for i in range(g.blocks_x)
                 if (i, j) not in open_blocks]
    streets = [Rect(bounds.xmin, bounds.xmax, y, y) for y in ys]
    streets += [Rect(x, x, bounds.ymin, bounds.ymax) for x in xs]

    intersections = [(i, j) for j in range(g.blocks_y + 1) for i in range(g.blocks_x + 1)]
    chosen = [p for p in intersections if (p[0] + p[1]) % 2 == 0]
    n_sites = config.cells.n_sites
    if n_sites is not None and n_sites != len(chosen):
        rng = stream(seed, "layout")
        if n_sites < len(chosen):
            idx = np.sort(rng.choice(len(chosen), size=n_sites, replace=False))
            chosen = [chosen[k] for k in idx]
        else:
            rest = [p for p in intersections if p not in chosen]
            extra = n_sites - len(chosen)
            if extra > len(rest):
                raise ConfigError(f"cells.n_sites={n_sites} exceeds {len(intersections)} intersections")
            idx = np.sort(rng.choice(len(rest), size=extra, replace=False))
            chosen = sorted(chosen + [rest[k] for k in idx], key=lambda p: (p[1], p[0]))

    beams = beam_grid(config.beams)
    n_sec = config.cells.per_site_sectors
    building_set = {(i, j) for j in range(g.blocks_y) for i in range(g.blocks_x)} - open_blocks
    cells = []
    for site, (i, j) in enumerate(chosen):
        # quadrant blocks around the intersection: NE, NW, SE, SW
        quads = [((i, j), 1, 1), ((i - 1, j), -1, 1), ((i, j - 1), 1, -1), ((i - 1, j - 1), -1, -1)]
        existing = [q for q in quads if 0 <= q[0][0] < g.blocks_x and 0 <= q[0][1] < g.blocks_y]
        preferred = [q for q in existing if q[0] in building_set] or existing
        _, sx, sy = preferred[0]
        off = s / 2 - CORNER_INSET_M
        pos = (xs[i] + sx * off, ys[j] + sy * off, config.cells.height_m)
        open_dir = math.degrees(math.atan2(-sy, -sx))
        for k in range(n_sec):
            az = (open_dir + k * 360.0 / n_sec) % 360.0
            cells.append(CellSite(len(cells), site, pos, az, beams))
    return Layout(cells, streets, [block(*ped)], [block(*square)], buildings, bounds)


# --------------------------------------------------------------------------- mobility

@dataclass(frozen=True)
class UserState:
    id: int
    position: tuple[float, float, float]
    velocity: tuple[float, float]
    mobility_class: str               # "street" | "square" | "pedestrian"
    region: Rect

    @property
    def speed(self) -> float:
        return math.hypot(*self.velocity)


def reflect_step(pos: np.ndarray, vel: np.ndarray, lo: np.ndarray, hi: np.ndarray, dt: float):
    """Translate by ``vel*dt`` and reflect specularly off the box [lo, hi].

    Works on any broadcastable arrays whose last axis is (x, y). A degenerate
    box axis (lo == hi) with zero velocity on it describes a street segment.
    """
    new = pos + vel * dt
    vel = vel.copy()
    over = new > hi
    new = np.where(over, 2 * hi - new, new)
    under = new < lo
    new = np.where(under, 2 * lo - new, new)
    vel[over | under] *= -1.0
    return np.clip(new, lo, hi), vel


def step_mobility(user: UserState, dt: float) -> UserState:
    r = user.region
    lo = np.array([r.xmin, r.ymin])
    hi = np.array([r.xmax, r.ymax])
    pos, vel = reflect_step(np.array(user.position[:2]), np.array(user.velocity), lo, hi, dt)
    return replace(user, position=(float(pos[0]), float(pos[1]), user.position[2]),
                   velocity=(float(vel[0]), float(vel[1])))


class Population:
    """All UEs of a run as packed arrays."""

    def __init__(self, users: list[UserState]):
        self.ids = np.array([u.id for u in users], dtype=int)
        self.classes = [u.mobility_class for u in users]
        self.pos = np.array([u.position[:2] for u in users], dtype=float).reshape(-1, 2)
        self.height = np.array([u.position[2] for u in users], dtype=float)
        self.vel = np.array([u.velocity for u in users], dtype=float).reshape(-1, 2)
        self.lo = np.array([[u.region.xmin, u.region.ymin] for u in users], dtype=float).reshape(-1, 2)
        self.hi = np.array([[u.region.xmax, u.region.ymax] for u in users], dtype=float).reshape(-1, 2)
        self.speed = np.hypot(self.vel[:, 0], self.vel[:, 1])

    def __len__(self) -> int:
        return len(self.ids)

    def advance(self, dt: float) -> np.ndarray:
        """Move every UE by one step; returns the per-UE displacement (m)."""
        old = self.pos
        self.pos, self.vel = reflect_step(self.pos, self.vel, self.lo, self.hi, dt)
        return np.hypot(*(self.pos - old).T)

    def user(self, k: int) -> UserState:
        lo, hi = self.lo[k], self.hi[k]
        return UserState(int(self.ids[k]), (float(self.pos[k, 0]), float(self.pos[k, 1]), float(self.height[k])),
                         (float(self.vel[k, 0]), float(self.vel[k, 1])), self.classes[k],
                         Rect(float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1])))


def spawn_users(layout: Layout, config: ScenarioConfig, seed: int) -> Population:
    """Street users on street centrelines in either direction; square and
    pedestrian-area users anywhere in their zone with a uniform heading."""
    u = config.users
    rng = stream(seed, "mobility")
    n_street = int(round(u.street * u.scale))
    n_square = int(round(u.square * u.scale))
    n_ped = int(round(u.pedestrian * u.scale))
    v_street = u.street_speed_kmh * KMH
    v_ped = u.pedestrian_speed_kmh * KMH
    users: list[UserState] = []

    lengths = np.array([(r.xmax - r.xmin) + (r.ymax - r.ymin) for r in layout.streets])
    picks = rng.choice(len(layout.streets), size=n_street, p=lengths / lengths.sum())
    fracs = rng.random(n_street)
    signs = np.where(rng.random(n_street) < 0.5, -1.0, 1.0)
    for k in range(n_street):
        r = layout.streets[picks[k]]
        horizontal = r.ymin == r.ymax
        if horizontal:
            pos = (r.xmin + fracs[k] * (r.xmax - r.xmin), r.ymin)
            vel = (signs[k] * v_street, 0.0)
        else:
            pos = (r.xmin, r.ymin + fracs[k] * (r.ymax - r.ymin))
            vel = (0.0, signs[k] * v_street)
        users.append(UserState(len(users), (*pos, u.height_m), vel, "street", r))

    for kind, count, zones in (("square", n_square, layout.squares),
                               ("pedestrian", n_ped, layout.pedestrian_zones)):
        xy = rng.random((count, 2))
        heading = rng.uniform(0.0, 2 * math.pi, count)
        for k in range(count):
            r = zones[0]
            pos = (r.xmin + xy[k, 0] * (r.xmax - r.xmin), r.ymin + xy[k, 1] * (r.ymax - r.ymin))
            vel = (v_ped * math.cos(heading[k]), v_ped * math.sin(heading[k]))
            users.append(UserState(len(users), (*pos, u.height_m), vel, kind, r))
    if not users:
        raise ConfigError("scenario has no users")
    return Population(users)
