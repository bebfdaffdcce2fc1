"""Agents leaving and joining: connectivity recovery and the radius response.

Run: python demos/04_churn.py [out_dir]
"""
# %%
import sys

import numpy as np

from hamnet.config import PRESETS, ScenarioConfig
from hamnet.dqn import pretrain
from hamnet.harness import run_scenario

cfg = ScenarioConfig(scenario="churn", N=100, rho=None, side_length=45.0,
                     coefficients=PRESETS["churn"],
                     churn={"period": 200, "count": 10, "mode": "mixed"},
                     learner={"reward_scale": 1e-3})
weights = pretrain(cfg, rng=np.random.default_rng(0))

# %%
res = run_scenario(cfg, weights, seed=3, out_dir=sys.argv[1] if len(sys.argv) > 1 else None)
c, r = res.series("connectivity_pct"), res.series("mean_radius")
for t, mode, count in res.events:
    low = c[t:t + 51].min()
    back = next((s for s in range(51) if c[t + s] >= 95.0), None)
    print(f"t={t} {mode:6s} {count:2d} agents: C dips to {low:5.1f}%, >=95% after "
          f"{back} steps; mean radius {r[t - 50:t].mean():.2f} -> {r[t:t + 50].mean():.2f}")
