"""The network Hamiltonian, its exact incremental change, and the request rule.

Run: python demos/01_hamiltonian.py
"""
# %%
import numpy as np

from hamnet.config import PRESETS
from hamnet.geometry import WorldConfig
from hamnet.hamiltonian import delta_h_radius, delta_h_request, node_hamiltonians
from hamnet.world import World

alpha = PRESETS["static"]  # degree^2, degree^3, radius^2, sum of 1/d over links
rng = np.random.default_rng(0)

# %% A small random world: 12 agents in a 5x5 box, radius 1.5 each.
world = World(WorldConfig(5.0), rng.uniform(0, 5, (12, 2)), np.full(12, 1.5))
H = node_hamiltonians(world.radii, world.A, world.dist, alpha)
print("degrees        ", world.deg)
print("per-node H     ", np.round(H, 3))
print("total H        ", round(H.sum(), 4))

# %% Growing one radius flips links; the reward is minus the exact change of the total.
i = int(np.argmin(world.deg))
dh, flips = delta_h_radius(i, world.radii[i] + 1.0, world.radii, world.A, world.dist, alpha)
print(f"agent {i}: r {world.radii[i]:.2f} -> {world.radii[i] + 1:.2f}, dH = {dh:+.4f}, "
      f"links gained {[j for _, j, on in flips if on]}")

# %% A receiver weighs a request from an under-connected agent at distance r_ij.
for k, r, d in [(0, 1.0, 1.0), (2, 1.0, 3.0)]:
    verdict = "accept" if delta_h_request(k, r, d, alpha) < 0 else "reject"
    print(f"k={k} r={r} d={d}: dH_req = {delta_h_request(k, r, d, alpha):+.4f} -> {verdict}")

# %% The degree part alone, f(k) = a1 k^2 + a2 k^3, is smallest near k = 2 for this preset,
# which is why purely Hamiltonian-driven agents keep few links.
k = np.arange(7)
print("f(k)", np.round(alpha[0] * k**2 + alpha[1] * k**3, 2))
