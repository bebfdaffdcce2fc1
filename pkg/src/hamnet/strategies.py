"""Per-step policies: random growth, learned decisions, learned decisions plus requests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .config import LearnerConfig, StrategyConfig
from .dqn import SweepResult, decision_sweep, epsilon, radius_step
from .hamiltonian import MAX_RULE, Coefficients, delta_h_request
from .neuralnet import NetBank
from .world import World


@dataclass
class Request:
    requester: int
    position: np.ndarray
    radius: float


def base_step(world: World, rng: np.random.Generator, config: StrategyConfig,
              fraction: float = 0.25) -> np.ndarray:
    """Under-connected agents grow by a random step with fixed probability; nobody shrinks.

    Returns the mask of agents that grew.
    """
    n = world.size
    u_grow = rng.random(n)
    u_mag = rng.random(n)
    grow = (world.active & (world.deg < config.base_degree_target)
            & (u_grow < config.base_increase_prob))
    if grow.any():
        dr = radius_step(world, fraction)
        world.radii[grow] = np.minimum(world.radii[grow] + dr * u_mag[grow], world.config.r_max)
        world.rebuild_links()
    return grow


def smart_step(world: World, bank: NetBank, net_of, t: int, learner: LearnerConfig, coeffs,
               rng: np.random.Generator, pretraining: bool = False) -> SweepResult:
    """Every active agent consults its network once; see :func:`dqn.decision_sweep`.

    Pretraining explores on the decaying schedule and trains every step; the
    decision phase explores at ``epsilon_floor`` and fine-tunes every
    ``finetune_every`` steps.
    """
    if pretraining:
        eps, lr, train = epsilon(t, learner.T_max), learner.lr_pretrain, True
    else:
        eps, lr = learner.epsilon_floor, learner.lr_finetune
        train = (t % learner.finetune_every == 0) and lr > 0
    return decision_sweep(world, bank, net_of, eps, train, lr, learner, coeffs, rng)


def gather_requests(world: World, config: StrategyConfig) -> list:
    """Agents with fewer links than their neighbourhood warrants broadcast a request.

    Threshold: ``max(request_min_degree, round(beta * n_in_range))`` where
    ``n_in_range`` counts active agents inside the agent's own radius.
    """
    out = []
    act = world.active
    d_floor = world.config.d_floor
    for j in np.flatnonzero(act):
        rj = world.radii[j]
        if rj <= d_floor:
            expected = 0.0
        else:
            in_range = act & (world.dist[j] <= rj)
            in_range[j] = False
            expected = config.request_degree_coefficient * np.count_nonzero(in_range)
        threshold = max(config.request_min_degree, int(np.floor(expected + 0.5)))
        if world.deg[j] < threshold:
            out.append(Request(int(j), world.positions[j].copy(), float(rj)))
    return out


def _radius_to_reach(d: float, f: float) -> float:
    r = d / f
    while f * r < d:
        r = np.nextafter(r, np.inf)
    return r


def process_requests(world: World, requests, coeffs, rng: np.random.Generator,
                     check: bool = False) -> list:
    """Receivers in shuffled order accept the single most favourable request.

    A receiver hears requester ``j`` when it lies inside ``j``'s (attenuated)
    range and its own radius is too short for the link. It accepts when the
    receiver-side change is negative, growing its radius just enough to link.
    Returns the accepted ``(receiver, requester)`` pairs.
    """
    if not requests:
        return []
    c = Coefficients.of(coeffs)
    carr = c.as_array()
    req_ids = np.array([q.requester for q in requests], dtype=np.int64)
    accepted = []
    row = np.empty(world.size, dtype=np.bool_)
    r_max = world.config.r_max
    for i in rng.permutation(world.size):
        if not world.active[i]:
            continue
        best, best_dh, best_r = -1, 0.0, 0.0
        ri = world.radii[i]
        for j in req_ids:
            if j == i or not world.active[j] or world.A[i, j]:
                continue
            d, f = world.dist[i, j], world.factor[i, j]
            if f <= 0.0 or d > f * world.radii[j]:
                continue
            need = _radius_to_reach(d, f)
            if ri >= need or need > r_max:
                continue
            dh = delta_h_request(world.deg[i], ri, need, c, distance=d)
            if dh < best_dh:
                best, best_dh, best_r = int(j), dh, need
        if best < 0:
            continue
        if check:
            assert best_dh < 0
        K.delta_h_radius(int(i), best_r, world.radii, world.active, world.A, world.deg,
                         world.dist, world.factor, carr, world.link_rule == MAX_RULE, False, row)
        K.apply_row(int(i), best_r, world.radii, world.A, world.deg, row)
        accepted.append((int(i), best))
    return accepted


def cooperative_step(world: World, bank: NetBank, net_of, t: int, learner: LearnerConfig,
                     strategy: StrategyConfig, coeffs, rng: np.random.Generator):
    """Learned decisions first, then one round of request exchange."""
    res = smart_step(world, bank, net_of, t, learner, coeffs, rng)
    accepted = process_requests(world, gather_requests(world, strategy), coeffs, rng)
    return res, accepted
