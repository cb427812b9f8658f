# The module is to define the API models for the application.
# Date: 2026-10-19
# Version: 0.2.0

from pydantic import BaseModel, Field
from typing import Dict, List, Optional

from app.models.harness import Architecture


class TrialRequest(BaseModel):
    """
    Defines the request body for the /v1/trials/run endpoint.
    Attributes:
        seed (int): Scenario seed.
        architecture (Architecture): Prediction architecture to run.
        n_obstacles (int | None): Overrides the obstacle count drawn from the configured range.
    """
    seed: int = Field(..., ge=0, description="Scenario seed.")
    architecture: Architecture = Field(default=Architecture.HYPRAP, description="Prediction architecture.")
    n_obstacles: Optional[int] = Field(default=None, ge=0, description="Obstacle count override.")


class BatchRequest(BaseModel):
    """
    Defines the request body for the /v1/batches endpoint.
    Attributes:
        seeds (List[int]): Scenario seeds.
        architectures (List[Architecture]): Architectures run on every seed.
        out_dir (str): Directory, as seen by the worker, that receives the CSVs.
    """
    seeds: List[int] = Field(..., min_length=1)
    architectures: List[Architecture] = Field(
        default_factory=lambda: [Architecture.SP1, Architecture.HYPRAP, Architecture.SP2])
    out_dir: str = Field(default="results/api", description="Output directory on the worker.")


class BatchSubmitted(BaseModel):
    task_id: str
    trials: int


class EpsilonSummary(BaseModel):
    """Loaded epsilon table: mean radius per level at M = 1 and M = M_max."""
    delta: float
    mode: str
    m_max: int
    horizon: int
    calibration_sizes: Dict[int, int]
    eps_tilde_M1: Dict[int, float]
    eps_tilde_Mmax: Dict[int, float]


class PredictorDefinition(BaseModel):
    """One registered predictor level as reported by the registry."""
    level: int
    name: str
    description: str
    min_history: int
