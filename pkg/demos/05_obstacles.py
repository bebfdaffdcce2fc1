"""Manhattan grid: blocks attenuate links, agents drive along the streets.

Run: python demos/05_obstacles.py
"""
# %%
import numpy as np

from hamnet.config import PRESETS, ScenarioConfig
from hamnet.dqn import pretrain
from hamnet.geometry import blocked_count
from hamnet.harness import ensemble

base = ScenarioConfig(scenario="obstacles", N=100, rho=0.05, coefficients=PRESETS["obstacles"],
                      learner={"reward_scale": 1e-3})
grid = base.world_config().obstacle_grid
L = base.L
print(f"L = {L:.1f}, block {grid.block_side:.2f}, street {grid.street_width:.2f}, "
      f"{len(grid.blocks(L))} blocks")

# %% A straight street is clear; a diagonal crosses blocks.
print("along a street :", blocked_count([0.0, 0.0], [L, 0.0], grid, L))
print("corner to corner:", blocked_count([0.0, 0.0], [L, L], grid, L))

# %% Transmission factor t: 1 = transparent, 0 = opaque blocks.
for t in (1.0, 0.5, 0.0):
    cfg = base.replace(obstacles={"t": t})
    w = pretrain(cfg, rng=np.random.default_rng(0))
    s = ensemble(cfg.replace(strategy={"kind": "cooperative"}), 3, w)
    print(f"t={t}: C = {s.means['connectivity_pct']:.1f}%  "
          f"mean radius {s.means['mean_radius']:.2f}")
