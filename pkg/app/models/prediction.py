# The module defines prediction-side models: predictor levels and predicted trajectories.
# Date: 2026-10-19
# Version: 0.1.0

from enum import IntEnum
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

Point = Tuple[float, float]


class PredictorLevel(IntEnum):
    """
    Predictor set P. Level 1 is accurate but slow, level 2 fast but coarse,
    level 0 is the simple model that never feeds an MPC constraint.
    """
    SIMPLE = 0
    ACCURATE = 1
    FAST = 2

    @property
    def risk_rank(self) -> int:
        """Position in the risk ordering: level 0 < level 2 < level 1."""
        return {PredictorLevel.SIMPLE: 0, PredictorLevel.FAST: 1, PredictorLevel.ACCURATE: 2}[self]


CONFORMAL_LEVELS = (PredictorLevel.ACCURATE, PredictorLevel.FAST)


class PredictedTrajectory(BaseModel):
    """
    Y_hat_k[t+1..t+H | t] for one obstacle, with its conformal radii.
    Attributes:
        obstacle_id (int): Obstacle the prediction belongs to.
        predictor (PredictorLevel): Level that was routed for this obstacle.
        base_time (int): Step index t the prediction is anchored at.
        points (List[Point]): H predicted positions for h = 1..H.
        radii (List[float]): H conformal radii, empty for level 0.
        fallback (bool): True when the routed predictor lacked history and level 0 answered.
    """
    obstacle_id: int
    predictor: PredictorLevel
    base_time: int
    points: List[Point]
    radii: List[float] = Field(default_factory=list)
    fallback: bool = False

    @model_validator(mode="after")
    def _check_radii(self) -> "PredictedTrajectory":
        if self.radii and len(self.radii) != len(self.points):
            raise ValueError("radii and points must have the same length H.")
        if any(r < 0.0 for r in self.radii):
            raise ValueError("conformal radii must be non-negative.")
        return self

    @property
    def horizon(self) -> int:
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float).reshape(-1, 2)


class PredictionOutcome(BaseModel):
    """Raw output of the predictor registry before radii are attached."""
    model_config = {"arbitrary_types_allowed": True}

    points: np.ndarray
    requested: PredictorLevel
    used: PredictorLevel
    fallback: bool = False
