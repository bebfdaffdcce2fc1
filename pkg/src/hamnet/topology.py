"""Spatial graph construction, degrees, giant component and per-step metrics."""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .hamiltonian import MAX_RULE, MUTUAL, Coefficients, total_hamiltonian


class EmptyNetworkError(ValueError):
    pass


@dataclass
class Adjacency:
    """Symmetric link matrix over all agent slots; inactive rows are empty."""

    bits: np.ndarray
    active: np.ndarray

    @property
    def n(self) -> int:
        return int(np.count_nonzero(self.active))

    @property
    def index_map(self) -> np.ndarray:
        """Agent id of each active row, in order."""
        return np.flatnonzero(self.active)

    def compact(self) -> np.ndarray:
        idx = self.index_map
        return self.bits[np.ix_(idx, idx)]


@dataclass
class MetricsRecord:
    step: int
    connectivity_pct: float
    total_H: float
    energy: float
    mean_reduced_radius: float
    mean_degree: float

    def as_dict(self) -> dict:
        return asdict(self)


FIELDS = ("step", "connectivity_pct", "total_H", "energy", "mean_reduced_radius", "mean_degree")


def link_matrix(radii, distances, active=None, factor=None, link_rule=MUTUAL) -> np.ndarray:
    r = np.asarray(radii, dtype=float)
    n = len(r)
    if link_rule == MAX_RULE:
        reach = np.maximum(r[:, None], r[None, :])
    else:
        reach = np.minimum(r[:, None], r[None, :])
    if factor is not None:
        reach = reach * factor
    bits = np.asarray(distances) <= reach
    if active is not None:
        act = np.asarray(active, dtype=bool)
        bits &= act[:, None] & act[None, :]
    bits[np.arange(n), np.arange(n)] = False
    return bits


def build_adjacency(radii, distances, active=None, factor=None, link_rule=MUTUAL) -> Adjacency:
    """Link i-j iff ``d_ij <= factor_ij * min(r_i, r_j)`` (``max`` under the max rule)."""
    n = len(radii)
    act = np.ones(n, dtype=bool) if active is None else np.asarray(active, dtype=bool).copy()
    return Adjacency(link_matrix(radii, distances, act, factor, link_rule), act)


def _bits(A):
    return A.bits if isinstance(A, Adjacency) else np.asarray(A, dtype=bool)


def degrees(A) -> np.ndarray:
    return _bits(A).sum(axis=1)


def giant_component_fraction(A) -> float:
    """Largest connected component size over the active agent count."""
    if isinstance(A, Adjacency):
        sub = A.compact()
    else:
        sub = np.asarray(A, dtype=bool)
    n = sub.shape[0]
    if n == 0:
        raise EmptyNetworkError("no active agents")
    _, labels = connected_components(csr_matrix(sub), directed=False)
    return float(np.bincount(labels).max()) / n


def compute_metrics(step, radii, A: Adjacency, distances, coeffs, L) -> MetricsRecord:
    c = Coefficients.of(coeffs)
    act = A.active
    n = A.n
    if n == 0:
        raise EmptyNetworkError("no active agents")
    r = np.asarray(radii, dtype=float)[act]
    k = degrees(A)[act]
    return MetricsRecord(
        step=int(step),
        connectivity_pct=100.0 * giant_component_fraction(A),
        total_H=total_hamiltonian(radii, A.bits, distances, c, act),
        energy=float(c.alpha3 * np.sum(r**2)),
        mean_reduced_radius=float(np.sum(r / L) / n),
        mean_degree=float(np.sum(k) / n),
    )
