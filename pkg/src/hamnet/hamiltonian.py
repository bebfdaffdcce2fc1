"""Network Hamiltonian: degree, radius-energy and inverse-distance link terms.

Per node::

    H_i = a1 k_i^2 + a2 k_i^3 + a3 r_i^2 + a4 * sum_{j != i} A_ij / d_ij

Lower is better. Distances are expected to be floored already.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K

GLOBAL_EXACT = "global-exact"
OWN_NODE = "own-node"
REWARD_SCOPES = (GLOBAL_EXACT, OWN_NODE)

MUTUAL = "mutual"
MAX_RULE = "max"
LINK_RULES = (MUTUAL, MAX_RULE)


@dataclass(frozen=True)
class Coefficients:
    alpha1: float
    alpha2: float
    alpha3: float
    alpha4: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.as_array())):
            raise ValueError("coefficients must be finite")

    @classmethod
    def of(cls, values) -> "Coefficients":
        if isinstance(values, Coefficients):
            return values
        a1, a2, a3, a4 = (float(v) for v in values)
        return cls(a1, a2, a3, a4)

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha1, self.alpha2, self.alpha3, self.alpha4], dtype=float)

    def as_list(self) -> list:
        return [self.alpha1, self.alpha2, self.alpha3, self.alpha4]


def _inv(distances, A):
    with np.errstate(divide="ignore"):
        inv = np.where(A, 1.0 / np.where(A, distances, 1.0), 0.0)
    return inv


def node_hamiltonian(i, degrees, radii, A, distances, coeffs) -> float:
    c = Coefficients.of(coeffs)
    k = float(degrees[i])
    row = np.asarray(A[i], dtype=bool).copy()
    row[i] = False
    link = np.sum(1.0 / np.asarray(distances[i])[row]) if row.any() else 0.0
    return c.alpha1 * k**2 + c.alpha2 * k**3 + c.alpha3 * float(radii[i]) ** 2 + c.alpha4 * link


def node_hamiltonians(radii, A, distances, coeffs, active=None) -> np.ndarray:
    """Vector of per-node values (zero for inactive slots)."""
    c = Coefficients.of(coeffs)
    A = np.asarray(A, dtype=bool)
    r = np.asarray(radii, dtype=float)
    k = A.sum(axis=1).astype(float)
    h = c.alpha1 * k**2 + c.alpha2 * k**3 + c.alpha3 * r**2 + c.alpha4 * _inv(distances, A).sum(axis=1)
    if active is not None:
        h = np.where(np.asarray(active, dtype=bool), h, 0.0)
    return h


def total_hamiltonian(radii, A, distances, coeffs, active=None) -> float:
    if len(radii) == 0:
        return 0.0
    return float(node_hamiltonians(radii, A, distances, coeffs, active).sum())


def delta_h_radius(i, r_new, radii, A, distances, coeffs, *, active=None, factor=None,
                   link_rule=MUTUAL, scope=GLOBAL_EXACT, r_min=0.0, r_max=np.inf):
    """Exact change of the total Hamiltonian if agent ``i`` switches to ``r_new``.

    Returns ``(dH, flips)`` with ``flips`` a list of ``(i, j, now_linked)``.
    With ``scope="own-node"`` only agent ``i``'s own term change is returned.
    Nothing is mutated.
    """
    if not r_min <= r_new <= r_max:
        raise ValueError(f"r_new={r_new} outside [{r_min}, {r_max}]")
    radii = np.asarray(radii, dtype=float)
    n = len(radii)
    A = np.ascontiguousarray(A, dtype=np.bool_)
    active = np.ones(n, dtype=bool) if active is None else np.asarray(active, dtype=bool)
    factor = np.ones((n, n)) if factor is None else np.asarray(factor, dtype=float)
    deg = A.sum(axis=1).astype(np.int64)
    row = np.empty(n, dtype=np.bool_)
    dh = K.delta_h_radius(int(i), float(r_new), radii, active, A, deg,
                          np.asarray(distances, dtype=float), factor,
                          Coefficients.of(coeffs).as_array(), link_rule == MAX_RULE,
                          scope == OWN_NODE, row)
    flips = [(int(i), int(j), bool(row[j])) for j in np.flatnonzero(row != A[i])]
    return float(dh), flips


def delta_h_request(k_i, r_i, r_ij, coeffs, distance=None) -> float:
    """Receiver-side change for accepting a connection request.

    ``r_ij`` is the radius the receiver must adopt; the inverse-distance
    gain uses ``distance`` when given (attenuated links), else ``r_ij``.
    """
    if r_ij <= 0:
        raise ValueError("r_ij must be positive")
    c = Coefficients.of(coeffs)
    d = r_ij if distance is None else distance
    k = float(k_i)
    return (c.alpha1 * ((k + 1) ** 2 - k**2)
            + c.alpha2 * ((k + 1) ** 3 - k**3)
            + c.alpha3 * (r_ij**2 - r_i**2)
            + c.alpha4 / d)
