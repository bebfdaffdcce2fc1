"""Euclidean world: distances, drifted random mobility, Manhattan obstacles.

Positions are stored as ``(n, D)`` float arrays. Obstacle blocks are
axis-aligned footprints in the first two coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

ONCE = "once-per-blocked-segment"
PER_OBSTACLE = "per-obstacle-multiplicative"
ATTENUATION_MODES = (ONCE, PER_OBSTACLE)

DISTANCE_FLOOR_FRACTION = 1e-6


@dataclass(frozen=True)
class ObstacleGrid:
    """Regular tiling of square blocks separated by streets.

    Street centre lines sit at ``origin + m * period`` on both axes, so with
    the default origin the world edges carry half-width streets.
    """

    block_side: float
    street_width: float
    origin: float = 0.0

    def __post_init__(self):
        if self.block_side <= 0 or self.street_width <= 0:
            raise ValueError("block_side and street_width must be positive")

    @property
    def period(self) -> float:
        return self.block_side + self.street_width

    @classmethod
    def default(cls, L: float) -> "ObstacleGrid":
        return cls(block_side=0.15 * L, street_width=0.05 * L)

    def blocks(self, L: float) -> np.ndarray:
        """Block rectangles ``[xmin, ymin, xmax, ymax]`` clipped to the world."""
        P, h = self.period, self.street_width / 2.0
        m0 = int(np.floor(-self.origin / P)) - 1
        m1 = int(np.ceil((L - self.origin) / P)) + 1
        spans = []
        for m in range(m0, m1):
            lo = max(self.origin + m * P + h, 0.0)
            hi = min(self.origin + (m + 1) * P - h, L)
            if hi > lo:
                spans.append((lo, hi))
        out = [(x0, y0, x1, y1) for (x0, x1) in spans for (y0, y1) in spans]
        return np.array(out, dtype=float).reshape(-1, 4)

    def in_street_band(self, coord):
        """True where a coordinate lies on a (closed) street band."""
        w = self.street_width
        return np.mod(np.asarray(coord) - self.origin + w / 2.0, self.period) <= w

    def inside_block(self, points) -> np.ndarray:
        """True for points strictly inside some block."""
        pts = np.atleast_2d(points)
        return ~(self.in_street_band(pts[:, 0]) | self.in_street_band(pts[:, 1]))


@dataclass
class MobilityConfig:
    step_length: Optional[float] = None  # None -> 0.01 * L
    drift_fraction: float = 0.7
    constrain_to_streets: bool = False

    def __post_init__(self):
        if self.step_length is not None and self.step_length < 0:
            raise ValueError("step_length must be >= 0")
        if not 0.0 <= self.drift_fraction <= 1.0:
            raise ValueError("drift_fraction must lie in [0, 1]")


@dataclass
class WorldConfig:
    side_length: float
    dimension: int = 2
    obstacle_grid: Optional[ObstacleGrid] = None
    transmission_factor: float = 1.0
    attenuation_mode: str = ONCE
    mobility: MobilityConfig = field(default_factory=MobilityConfig)

    def __post_init__(self):
        if self.side_length <= 0:
            raise ValueError("side_length must be positive")
        if self.dimension not in (2, 3):
            raise ValueError("dimension must be 2 or 3")
        if not 0.0 <= self.transmission_factor <= 1.0:
            raise ValueError("transmission_factor must lie in [0, 1]")
        if self.attenuation_mode not in ATTENUATION_MODES:
            raise ValueError(f"unknown attenuation_mode {self.attenuation_mode!r}")

    @property
    def L(self) -> float:
        return self.side_length

    @property
    def d_floor(self) -> float:
        return DISTANCE_FLOOR_FRACTION * self.side_length

    @property
    def r_max(self) -> float:
        return self.side_length * np.sqrt(self.dimension)

    @property
    def step_length(self) -> float:
        s = self.mobility.step_length
        return 0.01 * self.side_length if s is None else s


@dataclass
class AgentBody:
    id: int
    position: np.ndarray
    radius: float = 1.0
    drift_direction: Optional[np.ndarray] = None
    active: bool = True


def positions_of(bodies) -> np.ndarray:
    return np.array([np.asarray(b.position, dtype=float) for b in bodies], dtype=float)


def pairwise_distances(positions, L: float) -> np.ndarray:
    """Euclidean distance matrix with off-diagonal entries floored at 1e-6 L."""
    pos = np.asarray(positions, dtype=float)
    if pos.ndim == 1:
        pos = pos.reshape(1, -1)
    diff = pos[:, None, :] - pos[None, :, :]
    d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    floor = DISTANCE_FLOOR_FRACTION * L
    np.maximum(d, floor, out=d)
    np.fill_diagonal(d, 0.0)
    return d


def random_unit_vectors(n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal((n, dim))
    norm = np.linalg.norm(v, axis=1, keepdims=True)
    # a zero draw has probability zero; fall back to the first axis anyway
    bad = norm[:, 0] == 0
    v[bad] = 0.0
    v[bad, 0] = 1.0
    norm[bad] = 1.0
    return v / norm


def reflect(position, direction, L: float):
    """Mirror a point back into ``[0, L]^D``, negating crossed direction components."""
    pos = np.array(position, dtype=float)
    d = np.array(direction, dtype=float)
    if np.any(pos <= -L) or np.any(pos >= 2 * L):
        raise ValueError("overshoot of at least L cannot be reflected")
    low, high = pos < 0, pos > L
    pos[low] = -pos[low]
    pos[high] = 2 * L - pos[high]
    d[low | high] = -d[low | high]
    return pos, d


def _reflect_rows(pos: np.ndarray, drift: np.ndarray, L: float) -> None:
    low, high = pos < 0, pos > L
    pos[low] = -pos[low]
    pos[high] = 2 * L - pos[high]
    drift[low | high] *= -1.0


def step_mobility(positions, drift, active, config: WorldConfig, rng: np.random.Generator):
    """Advance every active agent by one drifted random step.

    Returns new ``(positions, drift)`` arrays; inputs are not modified.
    """
    pos = np.array(positions, dtype=float)
    drift = np.array(drift, dtype=float)
    active = np.asarray(active, dtype=bool)
    n, dim = pos.shape
    # always draw, so the random stream does not depend on the step length
    noise = random_unit_vectors(n, dim, rng)
    s = config.step_length
    if s == 0 or not active.any():
        return pos, drift
    f = config.mobility.drift_fraction
    move = s * (f * drift + (1.0 - f) * noise)
    move[~active] = 0.0

    grid = config.obstacle_grid
    if config.mobility.constrain_to_streets and grid is not None:
        proposed = pos + move
        hit = grid.inside_block(proposed[:, :2]) & active
        if hit.any():
            on_h = grid.in_street_band(pos[hit, 1])  # horizontal street: free in x
            on_v = grid.in_street_band(pos[hit, 0])
            mx, my = move[hit, 0], move[hit, 1]
            keep_x = on_h & (~on_v | (np.abs(mx) >= np.abs(my)))
            m = move[hit]
            m[keep_x, 1] = 0.0
            m[~keep_x, 0] = 0.0
            move[hit] = m

    pos += move
    _reflect_rows(pos, drift, config.L)
    return pos, drift


def place_uniform(n: int, config: WorldConfig, rng: np.random.Generator) -> np.ndarray:
    """Uniform placement; restricted to streets when movement is street-bound."""
    L, dim = config.L, config.dimension
    pos = rng.uniform(0.0, L, size=(n, dim))
    grid = config.obstacle_grid
    if grid is not None and config.mobility.constrain_to_streets:
        bad = grid.inside_block(pos[:, :2])
        while bad.any():
            pos[bad] = rng.uniform(0.0, L, size=(int(bad.sum()), dim))
            bad = grid.inside_block(pos[:, :2])
    return pos


def _segment_hits(p, q, rects) -> np.ndarray:
    """Whether the open segment p-q meets each rectangle's interior.

    ``p`` and ``q`` have shape ``(..., 2)``; ``rects`` has shape ``(m, 4)``.
    Result has shape ``(..., m)``.
    """
    p = np.asarray(p, dtype=float)[..., None, :]
    d = np.asarray(q, dtype=float)[..., None, :] - p
    lo, hi = rects[:, :2], rects[:, 2:]
    tmin = np.zeros(np.broadcast_shapes(p.shape, lo.shape)[:-1])
    tmax = np.ones_like(tmin)
    for ax in range(2):
        pa, da = p[..., ax], d[..., ax]
        flat = np.abs(da) < 1e-15
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (lo[:, ax] - pa) / da
            t2 = (hi[:, ax] - pa) / da
        enter = np.where(flat, -np.inf, np.minimum(t1, t2))
        leave = np.where(flat, np.inf, np.maximum(t1, t2))
        inside = (pa > lo[:, ax]) & (pa < hi[:, ax])
        tmin = np.maximum(tmin, enter)
        tmax = np.minimum(tmax, leave)
        tmax = np.where(flat & ~inside, -np.inf, tmax)
    return tmin < tmax


def blocked_count(p_i, p_j, grid: ObstacleGrid, L: float) -> int:
    """Number of blocks whose interior the segment between two agents crosses."""
    rects = grid.blocks(L)
    if len(rects) == 0:
        return 0
    return int(_segment_hits(np.asarray(p_i)[:2], np.asarray(p_j)[:2], rects).sum())


def blocked_count_matrix(positions, grid: ObstacleGrid, L: float) -> np.ndarray:
    pos = np.asarray(positions, dtype=float)[:, :2]
    n = len(pos)
    out = np.zeros((n, n), dtype=np.int64)
    rects = grid.blocks(L)
    if n < 2 or len(rects) == 0:
        return out
    iu, ju = np.triu_indices(n, k=1)
    counts = _segment_hits(pos[iu], pos[ju], rects).sum(axis=-1)
    out[iu, ju] = counts
    out[ju, iu] = counts
    return out


def _factor_from_counts(counts, config: WorldConfig):
    t = config.transmission_factor
    if config.attenuation_mode == ONCE:
        return np.where(counts > 0, t, 1.0)
    return np.power(t, counts)


def range_factor(p_i, p_j, config: WorldConfig) -> float:
    """Attenuation of mutual transmission range between two points."""
    if config.obstacle_grid is None:
        return 1.0
    c = blocked_count(p_i, p_j, config.obstacle_grid, config.L)
    return float(_factor_from_counts(c, config))


def range_factor_matrix(positions, config: WorldConfig) -> np.ndarray:
    n = len(positions)
    if config.obstacle_grid is None or config.transmission_factor == 1.0:
        return np.ones((n, n))
    counts = blocked_count_matrix(positions, config.obstacle_grid, config.L)
    f = _factor_from_counts(counts, config).astype(float)
    np.fill_diagonal(f, 1.0)
    return f
