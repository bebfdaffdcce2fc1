import numpy as np
import pytest

from hamnet.config import LearnerConfig, ScenarioConfig
from hamnet.dqn import (Action, Observation, Transition, decision_sweep, epsilon, finetune_tick,
                        observe, pretrain, radius_step, select_action, td_target)
from hamnet.geometry import WorldConfig
from hamnet.hamiltonian import delta_h_radius, total_hamiltonian
from hamnet.neuralnet import AdamState, NetBank, NetParams, init_params
from hamnet.topology import link_matrix
from hamnet.world import World


def test_epsilon_schedule_exact():
    T = 1000
    for t in range(T + 1):
        assert epsilon(t, T) == max(1.0 - t / (T / 2), 0.0)
    assert epsilon(0, T) == 1.0
    assert epsilon(250, T) == 0.5
    assert epsilon(500, T) == 0.0 and epsilon(10_000, T) == 0.0
    eps = [epsilon(t, 37) for t in range(60)]
    assert all(a >= b for a, b in zip(eps, eps[1:]))


class TestSelectAction:
    def test_greedy(self):
        rng = np.random.default_rng(0)
        assert select_action([0.2, 0.7], 0.0, rng) is Action.DECREASE
        assert select_action([0.9, 0.7], 0.0, rng) is Action.INCREASE

    def test_tie_goes_to_increase(self):
        assert select_action([0.5, 0.5], 0.0, np.random.default_rng(0)) is Action.INCREASE

    def test_uniform_when_fully_exploring(self):
        rng = np.random.default_rng(1)
        n = 10_000
        inc = sum(select_action([5.0, 0.0], 1.0, rng) is Action.INCREASE for _ in range(n))
        assert abs(inc - n / 2) <= 3 * np.sqrt(n / 4)


class TestTdTarget:
    def test_arithmetic(self):
        assert td_target(1.0, 0.98, [2.0, 1.0]) == pytest.approx(2.96)

    def test_myopic(self):
        assert td_target(-3.5, 0.0, [100.0, 7.0]) == -3.5

    def test_composes_with_exact_delta(self):
        d = np.array([[0, 2.0], [2.0, 0]])
        coeffs = [-0.5, 0.2, 0.1, -0.5]
        A = np.zeros((2, 2), bool)
        dh, _ = delta_h_radius(0, 2.0, [1.0, 2.0], A, d, coeffs)
        assert td_target(-dh, 0.98, [0.25, -1.0]) == pytest.approx(0.8 + 0.98 * 0.25)


def grid_world(n_side=10, spacing=1.0, radius=1.0):
    L = n_side * spacing
    xs = (np.arange(n_side) + 0.5) * spacing
    pos = np.array([(x, y) for x in xs for y in xs])
    return World(WorldConfig(L), pos, np.full(len(pos), radius))


class TestObserve:
    def test_isolated(self):
        w = World(WorldConfig(10.0), [[1.0, 1.0], [8.0, 8.0]], [0.5, 0.5])
        o = observe(0, w)
        assert (o.local_density_ratio, o.reduced_radius, o.degree_fraction) == (0.0, 0.05, 0.0)

    def test_grid_density_ratio(self):
        # unit grid at density 1: pick r so the disk area equals its neighbour count (4)
        w = grid_world()
        r = np.sqrt(4.0 / np.pi)  # 1.128: only the 4 nearest neighbours (next are at 1.414)
        w.radii[:] = r
        w.rebuild_links()
        i = 5 * 10 + 5
        assert observe(i, w).local_density_ratio == pytest.approx(1.0)

    def test_full_connection(self):
        n = 6
        rng = np.random.default_rng(0)
        w = World(WorldConfig(3.0), rng.uniform(0, 3, (n, 2)), np.full(n, 10.0))
        assert observe(0, w).degree_fraction == pytest.approx((n - 1) / n)

    def test_inactive_rejected(self):
        w = World(WorldConfig(3.0), [[1, 1], [2, 2]], active=[True, False])
        with pytest.raises(ValueError):
            observe(1, w)


def test_radius_step():
    w = grid_world()
    assert radius_step(w) == pytest.approx(0.25)
    w.deactivate(np.arange(75))
    assert radius_step(w) == pytest.approx(0.25 * 2.0)


def small_world(n=12, seed=0, L=5.0):
    rng = np.random.default_rng(seed)
    return World(WorldConfig(L), rng.uniform(0, L, (n, 2)), rng.uniform(0.5, 2.0, n))


class TestDecisionSweep:
    def test_zero_nets_greedy_all_increase(self):
        w = small_world()
        r0 = w.radii.copy()
        bank = NetBank(NetParams.zeros(), 1)
        res = decision_sweep(w, bank, np.zeros(w.size, int), 0.0, False, 0.0, LearnerConfig(),
                             [-0.5, 0.2, 0.1, -0.5], np.random.default_rng(1))
        assert np.all(res.actions == Action.INCREASE)
        assert np.all(w.radii >= r0)

    def test_rewards_are_exact_deltas(self):
        coeffs = [-0.5, 0.2, 0.1, -0.5]
        w = small_world(seed=3)
        bank = NetBank(init_params(np.random.default_rng(0)), 1)
        rng = np.random.default_rng(2)
        n = w.size
        order = rng.permutation(n)
        u = rng.random((3, n))
        before = w.radii.copy()
        h0 = total_hamiltonian(w.radii, w.A, w.dist, coeffs)
        res = decision_sweep(w, bank, np.zeros(n, int), 0.5, True, 1e-3, LearnerConfig(),
                             coeffs, rng, draws=(order, *u))
        h1 = total_hamiltonian(w.radii, w.A, w.dist, coeffs)
        assert res.rewards.sum() == pytest.approx(-(h1 - h0), rel=1e-9, abs=1e-9)
        # replay the moves one at a time against a full recompute
        radii = before.copy()
        for i in order:
            A = link_matrix(radii, w.dist)
            nxt = radii.copy()
            nxt[i] = w.radii[i]  # each agent moves exactly once per sweep
            dh = (total_hamiltonian(nxt, link_matrix(nxt, w.dist), w.dist, coeffs)
                  - total_hamiltonian(radii, A, w.dist, coeffs))
            assert res.rewards[i] == pytest.approx(-dh, rel=1e-9, abs=1e-9)
            radii = nxt
        assert np.array_equal(link_matrix(w.radii, w.dist), w.A)

    def test_zero_coefficients_give_zero_rewards(self):
        w = small_world(seed=4)
        bank = NetBank(init_params(np.random.default_rng(0)), 1)
        res = decision_sweep(w, bank, np.zeros(w.size, int), 1.0, True, 1e-3, LearnerConfig(),
                             [0, 0, 0, 0], np.random.default_rng(5))
        assert np.all(res.rewards == 0.0)

    def test_single_agent_learns_to_shrink(self):
        cfg = ScenarioConfig(N=1, side_length=10.0, T_max=500)
        learner = LearnerConfig(T_max=500, output_activation="linear", lr_pretrain=1e-3)
        w = World(cfg.world_config(), [[5.0, 5.0]], [3.0])
        bank = NetBank(init_params(np.random.default_rng(0), output_activation="linear"), 1)
        rng = np.random.default_rng(1)
        for t in range(500):
            res = decision_sweep(w, bank, [0], epsilon(t, 500), True, 1e-3, learner,
                                 cfg.coeffs, rng)
        assert w.radii[0] < 3.0
        # alone, the only reward is the energy term
        r_before = res.s[0, 1] * 10.0
        assert res.rewards[0] == pytest.approx(-0.1 * (w.radii[0] ** 2 - r_before ** 2))


class TestFinetune:
    def transition(self):
        return Transition(Observation(0.8, 0.1, 0.03), Action.DECREASE, -0.4,
                          Observation(0.9, 0.09, 0.04))

    def test_off_schedule_is_noop(self):
        p = init_params(np.random.default_rng(0))
        before = p.theta.copy()
        finetune_tick(p, AdamState.for_params(p), self.transition(), 7, LearnerConfig())
        assert np.array_equal(p.theta, before)

    def test_zero_rate_is_noop(self):
        p = init_params(np.random.default_rng(0))
        before = p.theta.copy()
        cfg = LearnerConfig(lr_finetune=0.0, finetune_every=1)
        for t in range(20):
            finetune_tick(p, AdamState.for_params(p), self.transition(), t, cfg)
        assert np.array_equal(p.theta, before)

    def test_on_schedule_updates(self):
        p = init_params(np.random.default_rng(0))
        before = p.theta.copy()
        finetune_tick(p, AdamState.for_params(p), self.transition(), 20, LearnerConfig())
        assert not np.array_equal(p.theta, before)

    def test_every_step_equals_pretraining_style_updates(self):
        # an agent stepping alone with finetune_every = 1 follows the same stream as training
        # inside the sweep kernel
        learner = LearnerConfig(finetune_every=1, lr_finetune=1e-3, lr_pretrain=1e-3,
                                output_activation="linear")
        coeffs = [-0.5, 0.2, 0.1, -0.5]
        init = init_params(np.random.default_rng(9), output_activation="linear")
        w1, w2 = small_world(seed=8), small_world(seed=8)
        bank1 = NetBank(init, w1.size)
        bank2 = NetBank(init, w2.size)
        adams = [AdamState.for_params(init) for _ in range(w2.size)]
        nets = [init.copy() for _ in range(w2.size)]
        r1, r2 = np.random.default_rng(3), np.random.default_rng(3)
        for t in range(100):
            decision_sweep(w1, bank1, np.arange(w1.size), 0.01, True, 1e-3, learner, coeffs, r1)
            for k in range(w2.size):
                bank2.theta[k] = nets[k].theta
            res = decision_sweep(w2, bank2, np.arange(w2.size), 0.01, False, 0.0, learner,
                                 coeffs, r2)
            for k in range(w2.size):
                finetune_tick(nets[k], adams[k], res.transition(k), t, learner)
        for k in range(w1.size):
            assert np.allclose(bank1.theta[k], nets[k].theta, rtol=1e-9, atol=1e-12)


class TestPretrain:
    def cfg(self, T=20):
        learner = LearnerConfig(T_max=T, output_activation="linear", lr_pretrain=1e-4,
                                feature_scale=(1, 10, 100))
        return ScenarioConfig(N=20, rho=0.51, T_max=T, learner=learner)

    def test_zero_steps_returns_init(self):
        cfg = self.cfg()
        learner = LearnerConfig(T_max=0)
        init = init_params(np.random.default_rng(0))
        out = pretrain(cfg, learner, np.random.default_rng(1), init=init.copy())
        assert np.array_equal(out.theta, init.theta)

    def test_deterministic(self, tmp_path):
        cfg = self.cfg()
        a = pretrain(cfg, rng=np.random.default_rng(4), out_path=tmp_path / "a.txt")
        b = pretrain(cfg, rng=np.random.default_rng(4), out_path=tmp_path / "b.txt")
        assert np.array_equal(a.theta, b.theta)
        assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()

    def test_zero_coefficients_no_signal(self):
        cfg = self.cfg().replace(coefficients=[0, 0, 0, 0])
        init = NetParams.zeros(output_activation="linear")
        hist = []
        out = pretrain(cfg, rng=np.random.default_rng(0), init=init.copy(), history=hist)
        assert all(r == 0.0 and loss == 0.0 for _, _, r, loss in hist)
        assert np.array_equal(out.theta, init.theta)

    def test_history_length(self):
        hist = []
        pretrain(self.cfg(T=15), rng=np.random.default_rng(0), history=hist)
        assert len(hist) == 15
