# The module defines harness-side models: architectures, scenario specs, per-step trace records,
# trial metrics and batch reports.
# Date: 2026-10-19
# Version: 0.1.0

from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from app.models.planning import PlanStatus
from app.models.prediction import PredictorLevel
from app.models.world import MotionPattern, WorldConfig

Point = Tuple[float, float]

# Bumped whenever a column of trials.csv or steps.csv changes meaning.
CSV_SCHEMA_VERSION = 1


class Architecture(str, Enum):
    """Prediction architectures compared by the harness."""
    SP1 = "SP1"
    HYPRAP = "HYPRAP"
    SP2 = "SP2"
    PROX_A = "PROX_A"
    PROX_B = "PROX_B"

    @property
    def forced_level(self) -> Optional[PredictorLevel]:
        """Level every routed obstacle is overridden to, or None when the router decides."""
        return {Architecture.SP1: PredictorLevel.ACCURATE, Architecture.SP2: PredictorLevel.FAST}.get(self)

    @property
    def uses_proximity(self) -> bool:
        return self in (Architecture.PROX_A, Architecture.PROX_B)


class ScenarioSpec(BaseModel):
    """
    Attributes:
        seed (int): Drives placement and obstacle motion; the scenario is a function of it.
        n_obstacles (int): N, total obstacles in the world.
        world (WorldConfig): World parameters; its goal is replaced by the sampled one.
        pattern_weights (Dict | None): Motion-pattern mix, uniform when omitted.
        min_clearance (float): Start/goal clearance from every obstacle in meters.
    """
    seed: int = Field(..., ge=0)
    n_obstacles: int = Field(default=30, ge=0)
    world: WorldConfig = Field(default_factory=WorldConfig)
    pattern_weights: Optional[Dict[MotionPattern, float]] = None
    min_clearance: float = Field(default=2.0, ge=0.0)


class ObstacleStep(BaseModel):
    """Risk and routing of one sensed obstacle at one step."""
    id: int
    distance: float
    psi: float
    level: PredictorLevel
    fallback: bool = False


class StepRecord(BaseModel):
    """One line of the trace file."""
    t: int
    agent: Tuple[float, float, float]
    n_sensed: int
    m_ids: List[int] = Field(default_factory=list, description="Obstacles in M_t, i.e. with a constraint.")
    m1: int = 0
    m2: int = 0
    obstacles: List[ObstacleStep] = Field(default_factory=list)
    status: PlanStatus
    max_violation: float = 0.0
    iterations: int = 0
    penalty: float = 0.0
    clamped: bool = False
    e_value: Optional[float] = None
    prediction_time_s: float = 0.0
    mpc_time_s: float = 0.0


class TrialMetrics(BaseModel):
    """
    Outcome of one (scenario, architecture) trial.
    Travel steps count applied controls; per-step series are aligned with the trace.
    """
    seed: int
    architecture: Architecture
    n_obstacles: int
    success: bool = False
    collision: bool = False
    deadlock: bool = False
    timeout: bool = False
    travel_steps: int = 0
    calls: Dict[int, int] = Field(default_factory=lambda: {0: 0, 1: 0, 2: 0})
    clamp_count: int = 0
    fallback_predictions: int = 0
    fallback_steps: int = 0
    safe_steps: int = 0
    feasible_steps: int = 0
    m_t: List[int] = Field(default_factory=list)
    m1: List[int] = Field(default_factory=list)
    m2: List[int] = Field(default_factory=list)
    n_t: List[int] = Field(default_factory=list)
    prediction_time_s: List[float] = Field(default_factory=list)
    mpc_time_s: List[float] = Field(default_factory=list)
    e_series: List[Optional[float]] = Field(default_factory=list)
    error: Optional[str] = None

    @model_validator(mode="after")
    def _check_success(self) -> "TrialMetrics":
        if self.success and (self.collision or self.deadlock):
            raise ValueError("A successful trial cannot collide or deadlock.")
        return self

    @property
    def total_calls(self) -> int:
        return self.calls.get(1, 0) + self.calls.get(2, 0)


class ArchitectureSummary(BaseModel):
    """Per-architecture aggregate; travel statistics are over successful trials only."""
    architecture: Architecture
    trials: int
    success_rate: float
    collision_rate: float
    deadlock_rate: float
    travel_mean: Optional[float] = None
    travel_std: Optional[float] = None
    prediction_time_mean_s: float = 0.0
    mpc_time_mean_s: float = 0.0
    total_time_mean_s: float = 0.0
    calls_level1: int = 0
    calls_level2: int = 0
    calls_total: int = 0
    safety_frequency: Optional[float] = None


class CurvePoint(BaseModel):
    """Mean per-step computation time at one M_t value."""
    architecture: Architecture
    m_t: int
    samples: int
    prediction_s: float
    mpc_s: float
    total_s: float


class BatchReport(BaseModel):
    summaries: List[ArchitectureSummary]
    curves: List[CurvePoint] = Field(default_factory=list)
    errors: int = 0
