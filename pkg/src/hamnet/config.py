"""Configuration dataclasses and their JSON round-trip."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .geometry import ONCE, MobilityConfig, ObstacleGrid, WorldConfig
from .hamiltonian import GLOBAL_EXACT, LINK_RULES, MUTUAL, REWARD_SCOPES, Coefficients
from .neuralnet import OUTPUT_ACTIVATIONS

SCENARIOS = ("static", "moving", "density-sweep", "churn", "obstacles")
STRATEGIES = ("base", "smart", "cooperative")
CHURN_MODES = ("remove", "add", "mixed")

PRESETS = {
    "static": [-0.5, 0.2, 0.1, -0.5],
    "moving": [-0.5, 0.1, 0.2, -0.5],
    "churn": [-0.5, 0.3, 1.0, -1000.0],
    "obstacles": [-0.5, 0.3, 1.0, -1000.0],
}


@dataclass
class StrategyConfig:
    kind: str = "cooperative"
    base_degree_target: int = 5
    base_increase_prob: float = 0.5
    request_degree_coefficient: float = 0.5
    request_min_degree: int = 2

    def __post_init__(self):
        if self.kind not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.kind!r}")
        if not 0.0 <= self.base_increase_prob <= 1.0:
            raise ValueError("base_increase_prob must lie in [0, 1]")
        if self.base_degree_target < 1 or self.request_min_degree < 1:
            raise ValueError("degree targets must be >= 1")


@dataclass
class LearnerConfig:
    gamma: float = 0.98
    lr_pretrain: float = 1e-4
    lr_finetune: float = 1e-5
    finetune_every: int = 10
    T_max: int = 1000
    epsilon_floor: float = 0.01
    pretrain_episodes: int = 1
    output_activation: str = "linear"
    reward_scope: str = GLOBAL_EXACT
    reward_scale: float = 1.0
    feature_scale: tuple = (1.0, 1.0, 100.0)  # degree fraction ~ 1/N otherwise
    radius_step_fraction: float = 0.25

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        for name in ("lr_pretrain", "lr_finetune"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.finetune_every < 1:
            raise ValueError("finetune_every must be >= 1")
        if self.T_max < 0 or self.pretrain_episodes < 0:
            raise ValueError("T_max and pretrain_episodes must be non-negative")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"unknown output_activation {self.output_activation!r}")
        if self.reward_scope not in REWARD_SCOPES:
            raise ValueError(f"unknown reward_scope {self.reward_scope!r}")
        self.feature_scale = tuple(float(v) for v in self.feature_scale)
        if len(self.feature_scale) != 3:
            raise ValueError("feature_scale needs three entries")


@dataclass
class ChurnConfig:
    period: int = 200
    count: int = 10
    mode: str = "remove"

    def __post_init__(self):
        if self.mode not in CHURN_MODES:
            raise ValueError(f"unknown churn mode {self.mode!r}")
        if self.period < 1 or self.count < 0:
            raise ValueError("churn period must be >= 1 and count >= 0")


@dataclass
class ObstacleConfig:
    t: float = 1.0
    block_side: Optional[float] = None  # None -> 0.15 L
    street_width: Optional[float] = None  # None -> 0.05 L
    origin: float = 0.0
    attenuation_mode: str = ONCE
    constrain_to_streets: bool = True

    def grid(self, L: float) -> ObstacleGrid:
        return ObstacleGrid(self.block_side if self.block_side is not None else 0.15 * L,
                            self.street_width if self.street_width is not None else 0.05 * L,
                            self.origin)


@dataclass
class ScenarioConfig:
    scenario: str = "static"
    N: int = 100
    rho: Optional[float] = 0.51
    side_length: Optional[float] = None
    dimension: int = 2
    coefficients: list = field(default_factory=lambda: list(PRESETS["static"]))
    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    T_max: int = 1000
    churn: Optional[ChurnConfig] = None
    obstacles: Optional[ObstacleConfig] = None
    mobility: MobilityConfig = field(default_factory=MobilityConfig)
    moving: Optional[bool] = None  # None -> every scenario but "static" moves
    link_rule: str = MUTUAL
    seed: int = 0
    weights_path: Optional[str] = None
    snapshot_every: int = 100
    summary_window: int = 100

    def __post_init__(self):
        for name, cls in _NESTED.items():
            value = getattr(self, name)
            if isinstance(value, dict):
                setattr(self, name, _build(cls, value))
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.scenario == "obstacles" and self.obstacles is None:
            self.obstacles = ObstacleConfig()
        if self.scenario == "churn" and self.churn is None:
            self.churn = ChurnConfig(count=min(10, self.N))
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.side_length is None and (self.rho is None or self.rho <= 0):
            raise ValueError("need rho > 0 or an explicit side_length")
        if self.side_length is not None and self.side_length <= 0:
            raise ValueError("side_length must be positive")
        if self.T_max < 1:
            raise ValueError("T_max must be >= 1")
        if self.churn is not None and self.churn.count > self.N:
            raise ValueError("churn.count must not exceed N")
        if self.link_rule not in LINK_RULES:
            raise ValueError(f"unknown link_rule {self.link_rule!r}")
        self.coefficients = Coefficients.of(self.coefficients).as_list()

    @property
    def L(self) -> float:
        if self.side_length is not None:
            return float(self.side_length)
        return float((self.N / self.rho) ** (1.0 / self.dimension))

    @property
    def density(self) -> float:
        return self.N / self.L**self.dimension

    @property
    def is_moving(self) -> bool:
        return self.scenario != "static" if self.moving is None else bool(self.moving)

    @property
    def coeffs(self) -> Coefficients:
        return Coefficients.of(self.coefficients)

    def world_config(self) -> WorldConfig:
        L = self.L
        mob = MobilityConfig(self.mobility.step_length, self.mobility.drift_fraction,
                             self.mobility.constrain_to_streets)
        if self.obstacles is None:
            return WorldConfig(L, self.dimension, mobility=mob)
        mob.constrain_to_streets = self.obstacles.constrain_to_streets
        return WorldConfig(L, self.dimension, self.obstacles.grid(L), self.obstacles.t,
                           self.obstacles.attenuation_mode, mob)

    def replace(self, **changes) -> "ScenarioConfig":
        d = self.to_dict()
        d.update(changes)
        return ScenarioConfig.from_dict(d)

    # ------------------------------------------------------------------ json

    def to_dict(self) -> dict:
        return _plain(asdict(self))

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        return _build(cls, data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")


_NESTED = {
    "strategy": StrategyConfig,
    "learner": LearnerConfig,
    "churn": ChurnConfig,
    "obstacles": ObstacleConfig,
    "mobility": MobilityConfig,
}


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _build(cls, data):
    if data is None:
        return None
    if is_dataclass(data):
        return data
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    kwargs = {}
    for k, v in data.items():
        sub = _NESTED.get(k) if cls is ScenarioConfig else None
        kwargs[k] = _build(sub, v) if sub is not None and v is not None else v
    return cls(**kwargs)
