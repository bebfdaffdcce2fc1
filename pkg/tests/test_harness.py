import csv
import json

import numpy as np
import pytest

from hamnet.config import ChurnConfig, LearnerConfig, ObstacleConfig, ScenarioConfig
from hamnet.harness import (MissingWeightsError, churn_event, density_sweep, ensemble,
                            run_scenario, summarize)
from hamnet.neuralnet import NetBank, init_params, save_params
from hamnet.topology import link_matrix
from hamnet.world import World


def small(kind="base", T=30, **kw):
    learner = LearnerConfig(output_activation="linear", feature_scale=(1, 10, 100))
    cfg = ScenarioConfig(N=25, rho=0.51, T_max=T, learner=learner, snapshot_every=10)
    return cfg.replace(strategy={"kind": kind}, **kw)


@pytest.fixture(scope="module")
def weights(tmp_path_factory):
    path = tmp_path_factory.mktemp("w") / "weights.txt"
    save_params(init_params(np.random.default_rng(0), output_activation="linear"), path)
    return path


def read(path):
    return path.read_bytes()


def test_one_step_one_record():
    res = run_scenario(small(T=1))
    assert len(res.records) == 1 and res.records[0].step == 0


def test_missing_weights():
    with pytest.raises(MissingWeightsError):
        run_scenario(small("smart"))
    with pytest.raises(MissingWeightsError):
        run_scenario(small("smart", weights_path="/nonexistent/w.txt"))


@pytest.mark.parametrize("kind", ["base", "smart", "cooperative"])
def test_byte_identical_outputs(tmp_path, weights, kind):
    cfg = small(kind, scenario="moving")
    run_scenario(cfg, weights, seed=3, out_dir=tmp_path / "a")
    run_scenario(cfg, weights, seed=3, out_dir=tmp_path / "b")
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*.csv"))
    assert files
    for f in files:
        assert read(tmp_path / "a" / f) == read(tmp_path / "b" / f)


def test_outputs_layout(tmp_path, weights):
    cfg = small("cooperative", T=25)
    run_scenario(cfg, weights, seed=0, out_dir=tmp_path)
    with open(tmp_path / "metrics.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["step", "connectivity_pct", "total_H", "energy", "mean_reduced_radius",
                       "mean_degree"]
    assert len(rows) == 1 + 25
    snaps = sorted(p.name for p in (tmp_path / "snapshots").iterdir())
    assert snaps == ["agents_000009.csv", "agents_000019.csv", "edges_000009.csv",
                     "edges_000019.csv"]
    with open(tmp_path / "snapshots" / "agents_000019.csv") as fh:
        agents = list(csv.reader(fh))
    assert agents[0] == ["id", "x", "y", "radius", "degree", "active"] and len(agents) == 26
    with open(tmp_path / "snapshots" / "edges_000019.csv") as fh:
        edges = list(csv.reader(fh))
    degree_sum = sum(int(a[4]) for a in agents[1:])
    assert len(edges) - 1 == degree_sum // 2


def test_invariants_over_many_steps(weights):
    # 10^5 agent-steps with mobility and churn; check=True asserts symmetry, zero diagonal and
    # bounds every step
    cfg = small("cooperative", T=1000, scenario="churn",
                churn={"period": 100, "count": 5, "mode": "mixed"})
    res = run_scenario(cfg, weights, seed=1, check=True)
    assert len(res.records) == 1000
    assert len(res.events) == 9


class TestChurn:
    def world(self, n=100, seed=0):
        cfg = ScenarioConfig(N=n, side_length=45.0, scenario="churn")
        return World.random(n, cfg.world_config(), np.random.default_rng(seed))

    def test_zero_count(self):
        w = self.world()
        before = w.radii.copy()
        mode, ids = churn_event(w, "remove", 0, np.random.default_rng(0))
        assert len(ids) == 0 and w.n_active == 100 and np.array_equal(w.radii, before)

    def test_remove(self):
        w = self.world()
        w.radii[:] = 8.0
        w.rebuild_links()
        _, ids = churn_event(w, "remove", 10, np.random.default_rng(0))
        assert w.n_active == 90 and len(ids) == 10
        assert not w.A[ids].any() and not w.A[:, ids].any()
        assert np.array_equal(w.A, link_matrix(w.radii, w.dist, w.active))

    def test_remove_never_empties(self):
        w = self.world(n=5)
        churn_event(w, "remove", 10, np.random.default_rng(0))
        assert w.n_active == 1

    def test_add_uses_pretrained_copies(self):
        w = self.world()
        w.radii[:] = 3.0
        template = init_params(np.random.default_rng(4))
        bank = NetBank(template, 100)
        bank.theta[:] += 0.5  # fine-tuned agents drift away from the template
        _, ids = churn_event(w, "add", 10, np.random.default_rng(0), bank)
        assert list(ids) == list(range(100, 110))
        assert w.n_active == 110 and len(bank) == 110
        assert np.all(w.radii[ids] == 1.0)
        for k in ids:
            assert np.array_equal(bank.params(k).theta, template.theta)
        assert np.allclose(np.linalg.norm(w.drift[ids], axis=1), 1.0)

    def test_mixed_modes(self):
        modes = set()
        rng = np.random.default_rng(0)
        w = self.world()
        for _ in range(20):
            modes.add(churn_event(w, "mixed", 1, rng)[0])
        assert modes == {"remove", "add"}

    def test_schedule(self, weights):
        cfg = small("smart", T=450, churn={"period": 200, "count": 3, "mode": "remove"})
        res = run_scenario(cfg, weights, seed=0)
        assert [e[0] for e in res.events] == [200, 400]


class TestEnsemble:
    def test_single_run_matches(self):
        cfg = small(T=40)
        summary = ensemble(cfg, 1)
        one = run_scenario(cfg, seed=cfg.seed).window_means(40)
        assert summary.means == pytest.approx(one)
        assert summary.n_runs == 1

    def test_seed_contract(self):
        cfg = small(T=20)
        _, a = ensemble(cfg, 2, keep_results=True)
        _, b = ensemble(cfg, 4, keep_results=True)
        for ra, rb in zip(a, b[:2]):
            assert ra.seed == rb.seed
            assert np.array_equal(ra.series("connectivity_pct"), rb.series("connectivity_pct"))

    def test_summary_json(self, tmp_path):
        ensemble(small(T=15), 2, out_dir=tmp_path)
        doc = json.loads((tmp_path / "summary.json").read_text())
        s = doc["strategies"]["base"]
        assert s["n_runs"] == 2 and "version" in doc
        assert set(s["means"]) >= {"connectivity_pct", "total_H", "energy", "mean_degree"}
        assert (tmp_path / "run_001" / "metrics.csv").exists()

    def test_rejects_zero_runs(self):
        with pytest.raises(ValueError):
            ensemble(small(), 0)

    def test_window_clipped(self):
        cfg = small(T=10)
        res = [run_scenario(cfg, seed=0)]
        assert summarize(res, cfg).window == 10


class TestSweep:
    def test_single_rho_is_ensemble(self):
        cfg = small(T=15)
        a = density_sweep(cfg, [0.51], 2)[0]
        b = ensemble(cfg.replace(rho=0.51, side_length=None), 2)
        assert a.means == b.means

    def test_side_length_follows_rho(self):
        cfg = small(T=5)
        out = density_sweep(cfg, [0.25, 1.0], 1, coefficients={1.0: [0, 0, 1.0, 0]})
        assert out[0].config["rho"] == 0.25
        assert out[1].config["coefficients"] == [0, 0, 1.0, 0]

    def test_rho_out_of_range(self):
        with pytest.raises(ValueError):
            density_sweep(small(), [2.0])


class TestConfig:
    def test_json_round_trip(self, tmp_path):
        cfg = small("smart", scenario="obstacles", obstacles={"t": 0.5},
                    churn={"period": 50, "count": 2, "mode": "add"})
        cfg.save(tmp_path / "c.json")
        back = ScenarioConfig.load(tmp_path / "c.json")
        assert back == cfg
        assert isinstance(back.obstacles, ObstacleConfig) and isinstance(back.churn, ChurnConfig)

    def test_unknown_key(self):
        with pytest.raises(ValueError, match="unknown"):
            ScenarioConfig.from_dict({"N": 10, "bogus": 1})

    def test_invalid(self):
        with pytest.raises(ValueError):
            ScenarioConfig(N=0)
        with pytest.raises(ValueError):
            ScenarioConfig(N=5, churn=ChurnConfig(count=10))
        with pytest.raises(ValueError):
            ScenarioConfig(T_max=0)
        with pytest.raises(ValueError):
            LearnerConfig(gamma=1.5)

    def test_derived_side(self):
        assert ScenarioConfig(N=100, rho=0.01).L == pytest.approx(100.0)
        assert ScenarioConfig(N=100, side_length=45.0).L == 45.0
        assert not ScenarioConfig().is_moving
        assert ScenarioConfig(scenario="moving").is_moving

    def test_obstacle_placement_on_streets(self):
        cfg = small(T=3, scenario="obstacles", obstacles={"t": 0.0}, rho=0.05)
        w = World.random(50, cfg.world_config(), np.random.default_rng(0))
        assert not cfg.world_config().obstacle_grid.inside_block(w.positions).any()


def test_scenario_defaults_fill_blocks():
    assert ScenarioConfig(scenario="obstacles").obstacles == ObstacleConfig()
    assert ScenarioConfig(scenario="churn").churn == ChurnConfig()
    assert ScenarioConfig(scenario="static").churn is None
