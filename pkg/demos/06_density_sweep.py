"""Fixed N, shrinking density: radii and connectivity across three densities.

Run: python demos/06_density_sweep.py
"""
# %%
import numpy as np

from hamnet.config import PRESETS, ScenarioConfig
from hamnet.dqn import pretrain
from hamnet.harness import density_sweep

base = ScenarioConfig(scenario="density-sweep", N=100, coefficients=PRESETS["churn"],
                      strategy={"kind": "cooperative"}, learner={"reward_scale": 1e-3})
rhos = [0.05, 0.016, 0.012]

# %% One pretrained network per density, each in its own box.
weights = {rho: pretrain(base.replace(rho=rho), rng=np.random.default_rng(0)) for rho in rhos}
for rho, s in zip(rhos, density_sweep(base, rhos, n_runs=3, weights=weights)):
    m = s.means
    print(f"rho={rho:<6g} L={np.sqrt(100 / rho):6.1f}  C={m['connectivity_pct']:5.1f}%  "
          f"radius={m['mean_radius']:6.2f}  degree={m['mean_degree']:.2f}")
