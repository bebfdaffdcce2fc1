"""Pretraining the shared Q-network and saving the weights.

Every agent's transitions feed one network; exploration decays linearly to
zero halfway through. Run: python demos/02_pretrain.py [out.txt]
"""
# %%
import sys

import numpy as np

from hamnet.config import ScenarioConfig
from hamnet.dqn import epsilon, pretrain
from hamnet.neuralnet import load_params

out = sys.argv[1] if len(sys.argv) > 1 else "static_weights.txt"
cfg = ScenarioConfig(scenario="static", N=100, rho=0.51)
print(f"L = {cfg.L:.2f}, alpha = {cfg.coefficients}, steps = {cfg.learner.T_max}")

# %%
history = []
params = pretrain(cfg, rng=np.random.default_rng(0), out_path=out, history=history)
rewards = np.array([h[2] for h in history])
losses = np.array([h[3] for h in history])
for t in (0, 100, 250, 499, 750, 999):
    print(f"t={t:4d}  eps={epsilon(t, cfg.learner.T_max):.2f}  "
          f"mean reward {rewards[t]:+.4f}  mean loss {losses[t]:.4g}")

# %% Round trip through the text format is bit-exact.
assert np.array_equal(load_params(out).theta, params.theta)
print("saved", out)
