"""Self-organising transmission-radius control with Hamiltonian-rewarded deep Q-learning."""

__version__ = "0.1.0"

from .config import (ChurnConfig, LearnerConfig, ObstacleConfig, ScenarioConfig,  # noqa: E402
                     StrategyConfig)
from .geometry import MobilityConfig, ObstacleGrid, WorldConfig  # noqa: E402
from .hamiltonian import Coefficients  # noqa: E402
from .world import World  # noqa: E402

__all__ = [
    "ChurnConfig", "Coefficients", "LearnerConfig", "MobilityConfig", "ObstacleConfig",
    "ObstacleGrid", "ScenarioConfig", "StrategyConfig", "World", "WorldConfig",
]
