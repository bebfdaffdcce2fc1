"""Mutable simulation state: agent arrays plus cached geometry and links."""

from __future__ import annotations

import numpy as np

from .geometry import (AgentBody, WorldConfig, pairwise_distances, place_uniform,
                       random_unit_vectors, range_factor_matrix)
from .hamiltonian import MUTUAL
from .topology import Adjacency, link_matrix


class World:
    """Struct-of-arrays agent state.

    ``A`` and ``deg`` are kept consistent with ``radii`` / ``dist`` /
    ``factor``; call :meth:`refresh` after moving agents and
    :meth:`rebuild_links` after changing several radii at once.
    """

    def __init__(self, config: WorldConfig, positions, radii=None, drift=None, active=None,
                 link_rule: str = MUTUAL, rng: np.random.Generator | None = None):
        self.config = config
        self.link_rule = link_rule
        self.positions = np.array(positions, dtype=float).reshape(-1, config.dimension)
        n = len(self.positions)
        self.radii = np.ones(n) if radii is None else np.array(radii, dtype=float)
        if drift is None:
            rng = rng or np.random.default_rng(0)
            drift = random_unit_vectors(n, config.dimension, rng)
        self.drift = np.array(drift, dtype=float).reshape(n, config.dimension)
        self.active = np.ones(n, dtype=bool) if active is None else np.array(active, dtype=bool)
        self.refresh()

    @classmethod
    def random(cls, n: int, config: WorldConfig, rng: np.random.Generator,
               radius: float = 1.0, link_rule: str = MUTUAL) -> "World":
        pos = place_uniform(n, config, rng)
        drift = random_unit_vectors(n, config.dimension, rng)
        return cls(config, pos, np.full(n, float(radius)), drift, link_rule=link_rule)

    @classmethod
    def from_bodies(cls, bodies, config: WorldConfig, link_rule: str = MUTUAL) -> "World":
        dim = config.dimension
        drift = [b.drift_direction if b.drift_direction is not None else np.eye(dim)[0]
                 for b in bodies]
        return cls(config, [b.position for b in bodies], [b.radius for b in bodies], drift,
                   [b.active for b in bodies], link_rule=link_rule)

    def bodies(self) -> list:
        return [AgentBody(i, self.positions[i].copy(), float(self.radii[i]),
                          self.drift[i].copy(), bool(self.active[i]))
                for i in range(self.size)]

    @property
    def size(self) -> int:
        return len(self.radii)

    @property
    def n_active(self) -> int:
        return int(np.count_nonzero(self.active))

    @property
    def L(self) -> float:
        return self.config.L

    def refresh(self) -> None:
        """Recompute distances and range factors, then links."""
        self.dist = pairwise_distances(self.positions, self.L)
        self.factor = range_factor_matrix(self.positions, self.config)
        self.rebuild_links()

    def rebuild_links(self) -> None:
        self.A = np.ascontiguousarray(
            link_matrix(self.radii, self.dist, self.active, self.factor, self.link_rule))
        self.deg = self.A.sum(axis=1).astype(np.int64)

    def adjacency(self) -> Adjacency:
        return Adjacency(self.A.copy(), self.active.copy())

    def deactivate(self, ids) -> None:
        self.active[np.asarray(ids, dtype=int)] = False
        self.rebuild_links()

    def add_agents(self, positions, drift, radius: float = 1.0) -> np.ndarray:
        """Append new active agents; returns their ids."""
        positions = np.asarray(positions, dtype=float).reshape(-1, self.config.dimension)
        m = len(positions)
        ids = np.arange(self.size, self.size + m)
        self.positions = np.vstack([self.positions, positions])
        self.radii = np.concatenate([self.radii, np.full(m, float(radius))])
        self.drift = np.vstack([self.drift, np.asarray(drift, dtype=float).reshape(m, -1)])
        self.active = np.concatenate([self.active, np.ones(m, dtype=bool)])
        self.refresh()
        return ids
