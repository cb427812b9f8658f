# The module defines process settings (environment) and the lab configuration (TOML file).
# Date: 2026-10-19
# Version: 0.2.0

from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Type

from pydantic import BaseModel, Field, model_validator
from pydantic_settings import (BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict,
                               TomlConfigSettingsSource)

from app.models.conformal import DeltaBudgeting
from app.models.harness import Architecture
from app.models.planning import PlanConfig
from app.models.risk import RouterConfig
from app.models.world import MotionPattern, WorldConfig


class Settings(BaseSettings):
    """
    Process-level settings read from the environment and `.env`.
    Attributes:
        REDIS_URL (str | None): Broker/backend URL; needed only by the Celery backend and the batch endpoint.
        HYPRAP_PARALLELISM (int): Default batch parallelism when the lab config leaves it unset.
        HYPRAP_LOG_LEVEL (str): Console log level.
        HYPRAP_ARTIFACT_DIR (str): Directory holding calibration artifacts.
        HYPRAP_CONFIG (str): Default lab config path.
    """
    REDIS_URL: Optional[str] = None
    HYPRAP_PARALLELISM: int = Field(default=1, ge=1)
    HYPRAP_LOG_LEVEL: str = "INFO"
    HYPRAP_ARTIFACT_DIR: str = "artifacts"
    HYPRAP_CONFIG: str = "config/hyprap.toml"

    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="ignore")


# lru_cache to cache the settings instance.
@lru_cache
def get_settings() -> Settings:
    return Settings()


class PredictorsConfig(BaseModel):
    """[predictors]: history window, horizon and the level-1 library."""
    window: int = Field(default=10, ge=1)
    horizon: int = Field(default=30, ge=1)
    k_neighbors: int = Field(default=5, ge=1)
    library_rollouts: int = Field(default=100, ge=1)
    library_steps: int = Field(default=400, ge=1)
    library_stride: int = Field(default=10, ge=1)
    busy_wait_multiplier: float = Field(default=1.0, ge=1.0)
    pattern_weights: Optional[Dict[MotionPattern, float]] = None


class CalibrationConfig(BaseModel):
    """[calibration]: sizes of the calibration and held-out sets."""
    seed: int = Field(default=7, ge=0)
    n_rollouts: int = Field(default=2000, ge=1)
    samples_per_rollout: int = Field(default=5, ge=1)
    rollout_steps: int = Field(default=120, ge=1)
    holdout_rollouts: int = Field(default=400, ge=1)
    cost_calls: int = Field(default=1000, ge=1)


class ConformalConfig(BaseModel):
    """[conformal]: failure budget and table size."""
    delta: float = Field(default=0.05, gt=0.0, lt=1.0)
    m_max: int = Field(default=16, ge=1)
    mode: DeltaBudgeting = DeltaBudgeting.OBSTACLES_HORIZON
    total_obstacles: Optional[int] = Field(default=None, ge=1)


class RouterSection(RouterConfig):
    """[router]: P-CRI router plus the proximity baselines' own thresholds."""
    proximity_a: RouterConfig = Field(default_factory=lambda: RouterConfig(thresholds=(0.45, 0.7)))
    proximity_b: RouterConfig = Field(default_factory=lambda: RouterConfig(thresholds=(0.1, 0.35)))

    def for_architecture(self, architecture: Architecture) -> RouterConfig:
        if architecture is Architecture.PROX_A:
            return self.proximity_a
        if architecture is Architecture.PROX_B:
            return self.proximity_b
        return self


class BatchConfig(BaseModel):
    """[batch]: Monte Carlo population and execution."""
    n_scenarios: int = Field(default=200, ge=1)
    base_seed: int = Field(default=1000, ge=0)
    obstacle_range: Tuple[int, int] = (20, 50)
    architectures: List[Architecture] = Field(
        default_factory=lambda: [Architecture.SP1, Architecture.HYPRAP, Architecture.SP2])
    parallelism: Optional[int] = Field(default=None, ge=1)
    backend: Literal["process", "celery"] = "process"
    deterministic: bool = True
    timing_isolated: bool = False

    @model_validator(mode="after")
    def _check(self) -> "BatchConfig":
        low, high = self.obstacle_range
        if not 0 <= low <= high:
            raise ValueError(f"Invalid obstacle_range {self.obstacle_range}.")
        return self


class LabConfig(BaseSettings):
    """
    The lab configuration. Every section is optional in the file; omitted values keep the
    defaults listed here.
    """
    world: WorldConfig = Field(default_factory=WorldConfig)
    predictors: PredictorsConfig = Field(default_factory=PredictorsConfig)
    calibration: CalibrationConfig = Field(default_factory=CalibrationConfig)
    conformal: ConformalConfig = Field(default_factory=ConformalConfig)
    router: RouterSection = Field(default_factory=RouterSection)
    planner: PlanConfig = Field(default_factory=PlanConfig)
    batch: BatchConfig = Field(default_factory=BatchConfig)

    model_config = SettingsConfigDict(extra="forbid")

    @classmethod
    def settings_customise_sources(cls, settings_cls: Type[BaseSettings], init_settings: PydanticBaseSettingsSource,
                                   env_settings, dotenv_settings, file_secret_settings):
        return (init_settings,)

    @model_validator(mode="after")
    def _check(self) -> "LabConfig":
        if self.planner.prediction_horizon != self.predictors.horizon:
            raise ValueError("planner.prediction_horizon must equal predictors.horizon.")
        if self.calibration.rollout_steps < self.predictors.window + self.predictors.horizon:
            raise ValueError("calibration.rollout_steps must cover window + horizon.")
        return self

    def plan_config(self) -> PlanConfig:
        """The planner section with the world's dt and control box, and the cap off in deterministic mode."""
        update = {"dt": self.world.dt, "v_max": self.world.v_max, "omega_max": self.world.omega_max}
        if self.batch.deterministic:
            update["wall_clock_ms"] = None
        return self.planner.model_copy(update=update)

    def resolved_parallelism(self) -> int:
        """Config value, else HYPRAP_PARALLELISM, else 1."""
        if self.batch.parallelism is not None:
            return self.batch.parallelism
        return get_settings().HYPRAP_PARALLELISM


def load_lab_config(path: Optional[str] = None) -> LabConfig:
    """Reads and validates a TOML lab config; raises FileNotFoundError for a missing explicit path."""
    path = Path(path or get_settings().HYPRAP_CONFIG)
    if not path.is_file():
        raise FileNotFoundError(f"Lab config not found: {path}")
    return LabConfig(**TomlConfigSettingsSource(LabConfig, toml_file=path)())
