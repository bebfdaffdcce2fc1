"""Scenario runs, churn, ensembles, density sweeps and file outputs."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import ChurnConfig, ScenarioConfig
from .geometry import place_uniform, random_unit_vectors, step_mobility
from .neuralnet import NetBank, NetParams, load_params
from .strategies import base_step, cooperative_step, smart_step
from .topology import FIELDS, MetricsRecord, compute_metrics
from .world import World

logger = logging.getLogger(__name__)

SUMMARY_KEYS = ("connectivity_pct", "total_H", "energy", "mean_reduced_radius", "mean_degree",
                "mean_radius")


class MissingWeightsError(FileNotFoundError):
    pass


@dataclass
class Snapshot:
    step: int
    agents: list  # (id, x, y, radius, degree, active)
    edges: list  # (id_a, id_b, distance)


@dataclass
class RunResult:
    records: list
    snapshots: list
    events: list = field(default_factory=list)  # (step, mode, count)
    seed: int = 0
    mean_radius: np.ndarray | None = None

    def series(self, name: str) -> np.ndarray:
        if name == "mean_radius":
            return self.mean_radius
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def window_means(self, window: int) -> dict:
        return {k: float(np.mean(self.series(k)[-window:])) for k in SUMMARY_KEYS}


@dataclass
class RunSummary:
    strategy: str
    n_runs: int
    window: int
    means: dict
    stds: dict
    connectivity_time_std: float
    per_run: list
    config: dict
    version: str = __version__

    def to_dict(self) -> dict:
        return asdict(self)


def _load_weights(config: ScenarioConfig, weights):
    if weights is not None:
        return weights if isinstance(weights, NetParams) else load_params(weights)
    if not config.weights_path:
        raise MissingWeightsError(f"strategy {config.strategy.kind!r} needs a weights file")
    if not Path(config.weights_path).exists():
        raise MissingWeightsError(config.weights_path)
    return load_params(config.weights_path)


def churn_event(world: World, mode: str, count: int, rng: np.random.Generator,
                bank: NetBank | None = None) -> tuple:
    """Remove or add agents; returns ``(applied_mode, ids)``.

    Added agents start at radius 1 with a fresh drift and, when a bank is
    given, a fresh copy of its template (pretrained) weights. Removal never
    empties the world.
    """
    if mode == "mixed":
        mode = "remove" if rng.random() < 0.5 else "add"
    if count <= 0:
        return mode, np.array([], dtype=int)
    if mode == "remove":
        alive = np.flatnonzero(world.active)
        k = min(count, len(alive) - 1)
        ids = np.sort(rng.choice(alive, size=k, replace=False)) if k > 0 else alive[:0]
        world.deactivate(ids)
        return mode, ids
    pos = place_uniform(count, world.config, rng)
    drift = random_unit_vectors(count, world.config.dimension, rng)
    ids = world.add_agents(pos, drift, radius=1.0)
    if bank is not None:
        bank.append_copies(count)
    return mode, ids


def _snapshot(t: int, world: World) -> Snapshot:
    agents = []
    for i in range(world.size):
        p = world.positions[i]
        agents.append((i, float(p[0]), float(p[1]), float(world.radii[i]), int(world.deg[i]),
                       int(world.active[i])))
    ia, ja = np.nonzero(np.triu(world.A, 1))
    edges = [(int(a), int(b), float(world.dist[a, b])) for a, b in zip(ia, ja)]
    return Snapshot(t, agents, edges)


def run_scenario(config: ScenarioConfig, weights=None, seed: int | None = None,
                 out_dir=None, check: bool = False) -> RunResult:
    """One simulation of ``config.T_max`` steps.

    Per step: mobility (if moving), strategy, churn (every ``period`` steps
    after the first), metrics. ``check`` asserts link-matrix invariants each
    step.
    """
    seed = config.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    wcfg = config.world_config()
    kind = config.strategy.kind
    bank = None
    if kind != "base":
        bank = NetBank(_load_weights(config, weights), config.N)
    world = World.random(config.N, wcfg, rng, link_rule=config.link_rule)
    learner, coeffs, L = config.learner, config.coeffs, config.L
    churn: ChurnConfig | None = config.churn

    records, snapshots, events, mean_r = [], [], [], []
    for t in range(config.T_max):
        if config.is_moving:
            world.positions, world.drift = step_mobility(world.positions, world.drift,
                                                         world.active, wcfg, rng)
            world.refresh()
        if kind == "base":
            base_step(world, rng, config.strategy, learner.radius_step_fraction)
        elif kind == "smart":
            smart_step(world, bank, np.arange(world.size), t, learner, coeffs, rng)
        else:
            cooperative_step(world, bank, np.arange(world.size), t, learner, config.strategy,
                             coeffs, rng)
        if churn is not None and t > 0 and t % churn.period == 0:
            mode, ids = churn_event(world, churn.mode, churn.count, rng, bank)
            events.append((t, mode, len(ids)))
        if check:
            assert np.array_equal(world.A, world.A.T)
            assert not world.A.diagonal().any()
            assert np.all((world.positions >= 0) & (world.positions <= L))
        rec = compute_metrics(t, world.radii, world.adjacency(), world.dist, coeffs, L)
        records.append(rec)
        mean_r.append(float(world.radii[world.active].mean()))
        if config.snapshot_every and (t + 1) % config.snapshot_every == 0:
            snapshots.append(_snapshot(t, world))

    result = RunResult(records, snapshots, events, seed, np.array(mean_r))
    if out_dir is not None:
        write_run(result, out_dir)
    return result


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_run(result: RunResult, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "metrics.csv", FIELDS,
              ([getattr(r, f) for f in FIELDS] for r in result.records))
    snap = out / "snapshots"
    if result.snapshots:
        snap.mkdir(exist_ok=True)
    for s in result.snapshots:
        write_csv(snap / f"agents_{s.step:06d}.csv", ("id", "x", "y", "radius", "degree", "active"),
                  s.agents)
        write_csv(snap / f"edges_{s.step:06d}.csv", ("id_a", "id_b", "distance"), s.edges)
    if result.events:
        write_csv(out / "events.csv", ("step", "mode", "count"), result.events)


def summarize(results: list, config: ScenarioConfig) -> RunSummary:
    w = min(config.summary_window, config.T_max)
    per_run = [r.window_means(w) for r in results]
    means = {k: float(np.mean([p[k] for p in per_run])) for k in SUMMARY_KEYS}
    stds = {k: float(np.std([p[k] for p in per_run])) for k in SUMMARY_KEYS}
    tstd = float(np.mean([np.std(r.series("connectivity_pct")[-w:]) for r in results]))
    return RunSummary(config.strategy.kind, len(results), w, means, stds, tstd, per_run,
                      config.to_dict())


def ensemble(config: ScenarioConfig, n_runs: int, weights=None, out_dir=None,
             keep_results: bool = False):
    """``n_runs`` independent runs with seeds ``config.seed + i``.

    Returns the summary, or ``(summary, results)`` with ``keep_results``.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    if config.strategy.kind != "base":
        weights = _load_weights(config, weights)
    results = []
    for i in range(n_runs):
        sub = None if out_dir is None else Path(out_dir) / f"run_{i:03d}"
        results.append(run_scenario(config, weights, seed=config.seed + i, out_dir=sub))
    summary = summarize(results, config)
    if out_dir is not None:
        write_summary({summary.strategy: summary}, Path(out_dir) / "summary.json")
    return (summary, results) if keep_results else summary


def density_sweep(config: ScenarioConfig, rhos, n_runs: int = 1, coefficients=None,
                  weights=None, out_dir=None) -> list:
    """One ensemble per density at fixed ``N`` (side length ``sqrt(N / rho)``).

    ``coefficients`` and ``weights`` may map each rho to its own value.
    """
    out = []
    for rho in rhos:
        if not 0.01 <= rho <= 1.0:
            raise ValueError(f"rho={rho} outside [0.01, 1]")
        changes = {"rho": float(rho), "side_length": None}
        if coefficients is not None and rho in coefficients:
            changes["coefficients"] = list(coefficients[rho])
        cfg = config.replace(**changes)
        w = weights.get(rho) if isinstance(weights, dict) else weights
        sub = None if out_dir is None else Path(out_dir) / f"rho_{rho:g}"
        out.append(ensemble(cfg, n_runs, w, sub))
    return out


def write_summary(summaries: dict, path) -> None:
    doc = {"version": __version__,
           "strategies": {k: v.to_dict() for k, v in summaries.items()}}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
