"""Base growth vs learned decisions vs learned decisions with requests.

A reduced version of the static experiment (5 runs instead of 20).
Run: python demos/03_three_strategies.py
"""
# %%
import numpy as np

from hamnet.config import ScenarioConfig
from hamnet.dqn import pretrain
from hamnet.harness import ensemble

cfg = ScenarioConfig(scenario="static", N=100, rho=0.51)
weights = pretrain(cfg, rng=np.random.default_rng(cfg.seed))

# %%
print(f"{'strategy':12s} {'C %':>6s} {'H':>9s} {'energy':>8s} {'radius':>7s} {'degree':>7s}")
for kind in ("base", "smart", "cooperative"):
    s = ensemble(cfg.replace(strategy={"kind": kind}), 5, weights)
    m = s.means
    print(f"{kind:12s} {m['connectivity_pct']:6.1f} {m['total_H']:9.1f} {m['energy']:8.1f} "
          f"{m['mean_radius']:7.2f} {m['mean_degree']:7.2f}")

# %% Moving agents: the same comparison with drift-plus-noise mobility.
moving = cfg.replace(scenario="moving", coefficients=[-0.5, 0.1, 0.2, -0.5])
w_moving = pretrain(moving, rng=np.random.default_rng(moving.seed))
for kind in ("smart", "cooperative"):
    s = ensemble(moving.replace(strategy={"kind": kind}), 3, w_moving)
    print(f"moving {kind:12s} C = {s.means['connectivity_pct']:.1f}%  "
          f"per-step std {s.connectivity_time_std:.2f}")
