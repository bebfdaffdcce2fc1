"""Online deep Q-learning of radius adjustments.

Every agent observes (local density ratio, reduced radius, degree
fraction), grows or shrinks its radius, and is rewarded with minus the
exact Hamiltonian change. During pretraining all agents feed one shared
network; in the decision phase each agent fine-tunes its own copy.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .config import LearnerConfig, ScenarioConfig
from .geometry import step_mobility
from .hamiltonian import MAX_RULE, OWN_NODE, Coefficients
from .neuralnet import AdamState, NetBank, NetParams, init_params, save_params, train_step
from .world import World

logger = logging.getLogger(__name__)


class Action(enum.IntEnum):
    INCREASE = 0
    DECREASE = 1


@dataclass
class Observation:
    local_density_ratio: float
    reduced_radius: float
    degree_fraction: float

    def as_array(self) -> np.ndarray:
        return np.array([self.local_density_ratio, self.reduced_radius, self.degree_fraction])


@dataclass
class Transition:
    s: Observation
    a: Action
    reward: float
    s_next: Observation


def epsilon(t: int, T_max: int) -> float:
    """Exploration rate: linear decay from 1 to 0 over the first half of the run."""
    return max(1.0 - t / (T_max / 2.0), 0.0)


def observe(i: int, world: World) -> Observation:
    if not world.active[i]:
        raise ValueError(f"agent {i} is inactive")
    out = np.empty(3)
    K.observe(int(i), world.radii, world.active, world.deg, world.dist, world.n_active,
              world.L, world.config.dimension, world.config.d_floor, out)
    return Observation(*out)


def select_action(q, eps: float, rng: np.random.Generator) -> Action:
    """Epsilon-greedy choice; ties go to Increase."""
    if rng.random() < eps:
        return Action.INCREASE if rng.random() < 0.5 else Action.DECREASE
    return Action.INCREASE if q[0] >= q[1] else Action.DECREASE


def td_target(reward: float, gamma: float, q_next) -> float:
    return float(reward + gamma * np.max(q_next))


def radius_step(world: World, fraction: float = 0.25) -> float:
    """Largest radius change per action: ``fraction * sqrt(L^D / N)``."""
    n = max(world.n_active, 1)
    return fraction * (world.L ** world.config.dimension / n) ** (1.0 / world.config.dimension)


@dataclass
class SweepResult:
    """Per-agent transitions of one decision sweep (rows of inactive agents are stale)."""

    order: np.ndarray
    s: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    s_next: np.ndarray
    losses: np.ndarray

    def transition(self, i: int) -> Transition:
        return Transition(Observation(*self.s[i]), Action(int(self.actions[i])),
                          float(self.rewards[i]), Observation(*self.s_next[i]))


def decision_sweep(world: World, bank: NetBank, net_of, eps: float, train, lr: float,
                   learner: LearnerConfig, coeffs, rng: np.random.Generator,
                   draws=None) -> SweepResult:
    """Let every active agent act once, in a shuffled order, updating links as it goes.

    ``train`` is a per-agent boolean mask selecting who takes an Adam step on
    the transition just observed. ``draws`` optionally supplies the
    ``(order, u_eps, u_act, u_mag)`` random inputs.
    """
    n = world.size
    if draws is None:
        order = rng.permutation(n)
        u = rng.random((3, n))
        draws = (order, u[0], u[1], u[2])
    order, u_eps, u_act, u_mag = (np.asarray(d) for d in draws)
    S = np.zeros((n, 3))
    S2 = np.zeros((n, 3))
    actions = np.full(n, -1, dtype=np.int64)
    rewards = np.zeros(n)
    losses = np.full(n, np.nan)
    train = np.broadcast_to(np.asarray(train, dtype=np.bool_), (n,)).copy()
    K.agent_pass(order.astype(np.int64), u_eps, u_act, u_mag, float(eps),
                 world.radii, world.active, world.A, world.deg, world.dist, world.factor,
                 bank.theta, bank.m, bank.v, bank.steps, np.asarray(net_of, dtype=np.int64),
                 bank.sizes_array, bank.out_mode, bank.beta1, bank.beta2, bank.eps,
                 train, float(lr), float(learner.gamma), float(learner.reward_scale),
                 np.asarray(learner.feature_scale, dtype=float),
                 Coefficients.of(coeffs).as_array(), world.link_rule == MAX_RULE,
                 learner.reward_scope == OWN_NODE,
                 radius_step(world, learner.radius_step_fraction), 0.0, world.config.r_max,
                 world.n_active, world.L, world.config.dimension, world.config.d_floor,
                 S, actions, rewards, S2, losses)
    return SweepResult(order, S, actions, rewards, S2, losses)


def finetune_tick(params: NetParams, adam: AdamState, transition: Transition, t: int,
                  config: LearnerConfig):
    """Every ``finetune_every`` steps, one low-rate update on the latest transition."""
    if t % config.finetune_every != 0 or config.lr_finetune == 0:
        return params
    from .neuralnet import forward

    scale = np.asarray(config.feature_scale)
    q_next = forward(params, transition.s_next.as_array() * scale)
    target = td_target(transition.reward * config.reward_scale, config.gamma, q_next)
    train_step(params, adam, transition.s.as_array() * scale, int(transition.a), target,
               config.lr_finetune)
    return params


def pretrain(scenario: ScenarioConfig, learner: LearnerConfig | None = None,
             rng: np.random.Generator | None = None, init: NetParams | None = None,
             out_path=None, history: list | None = None) -> NetParams:
    """Train one shared network on every agent's transitions.

    Runs ``learner.pretrain_episodes`` episodes of ``learner.T_max`` steps on
    fresh uniform placements; exploration decays over the whole schedule.
    The result is written to ``out_path`` (or ``scenario.weights_path``) when
    one is given. ``history``, if supplied, receives per-step
    ``(episode, step, mean_reward, mean_loss)`` tuples.
    """
    learner = learner or scenario.learner
    rng = rng if rng is not None else np.random.default_rng(scenario.seed)
    params = init if init is not None else init_params(rng, output_activation=learner.output_activation)
    bank = NetBank(params, 1)
    total = learner.pretrain_episodes * learner.T_max
    wcfg = scenario.world_config()
    coeffs = scenario.coeffs
    t_global = 0
    for ep in range(learner.pretrain_episodes):
        world = World.random(scenario.N, wcfg, rng, link_rule=scenario.link_rule)
        net_of = np.zeros(world.size, dtype=np.int64)
        for t in range(learner.T_max):
            if scenario.is_moving:
                world.positions, world.drift = step_mobility(world.positions, world.drift,
                                                             world.active, wcfg, rng)
                world.refresh()
            eps = epsilon(t_global, total)
            res = decision_sweep(world, bank, net_of, eps, True, learner.lr_pretrain, learner,
                                 coeffs, rng)
            if history is not None:
                history.append((ep, t, float(res.rewards.mean()), float(np.nanmean(res.losses))))
            t_global += 1
    out = bank.params(0)
    path = out_path or scenario.weights_path
    if path:
        save_params(out, path)
    return out
