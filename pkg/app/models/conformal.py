# The module defines conformal-side models: failure budgets, bound results and coverage reports.
# Date: 2026-10-19
# Version: 0.1.0

from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, computed_field, model_validator


class DeltaBudgeting(str, Enum):
    """How the total failure budget delta is split per (obstacle, step)."""
    OBSTACLES_HORIZON = "obstacles_horizon"   # delta / (M H)
    TOTAL_OBSTACLES = "total_obstacles"       # delta / (N H), N fixed
    HORIZON = "horizon"                       # delta / H


class FailureBudget(BaseModel):
    """
    Attributes:
        delta (float): Total failure probability in (0, 1).
        horizon (int): H.
        obstacle_count (int): M, the number of predicted obstacles the budget is shared by.
        mode (DeltaBudgeting): Split rule.
        total_obstacles (int | None): N for the TOTAL_OBSTACLES rule.
    """
    delta: float = Field(..., gt=0.0, lt=1.0)
    horizon: int = Field(..., ge=1)
    obstacle_count: int = Field(default=1, ge=1)
    mode: DeltaBudgeting = DeltaBudgeting.OBSTACLES_HORIZON
    total_obstacles: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check_mode(self) -> "FailureBudget":
        if self.mode is DeltaBudgeting.TOTAL_OBSTACLES and self.total_obstacles is None:
            raise ValueError("total_obstacles is required for the total_obstacles budgeting mode.")
        return self

    @computed_field
    @property
    def delta_bar(self) -> float:
        if self.mode is DeltaBudgeting.OBSTACLES_HORIZON:
            return self.delta / (self.obstacle_count * self.horizon)
        if self.mode is DeltaBudgeting.TOTAL_OBSTACLES:
            return self.delta / (self.total_obstacles * self.horizon)
        return self.delta / self.horizon


class BoundResult(BaseModel):
    """A probability lower bound; `trivial` marks values <= 0 returned verbatim."""
    value: float
    trivial: bool = False


class CoverageReport(BaseModel):
    """
    Empirical check of the conformal guarantees on held-out pairs.
    Attributes:
        level (int): Predictor level evaluated.
        obstacle_count (int): Table column M used for the radii.
        delta_bar (float): Per-(obstacle, step) failure rate of that column.
        n_holdout (int): Examples evaluated.
        marginal (List[float]): Coverage frequency per h = 1..H.
        marginal_target (float): 1 - delta_bar.
        joint_per_step (List[float]): Per-h frequency that all M grouped examples are covered.
        joint_horizon (float | None): Frequency that a group is covered at every h simultaneously.
        n_groups (int): Number of joint groups.
        bounds (Dict[str, float]): Reference bounds the joint frequencies are compared with.
    """
    level: int
    obstacle_count: int
    delta_bar: float
    n_holdout: int
    marginal: List[float]
    marginal_target: float
    joint_per_step: List[float] = Field(default_factory=list)
    joint_horizon: Optional[float] = None
    n_groups: int = 0
    bounds: Dict[str, float] = Field(default_factory=dict)

    @property
    def min_marginal(self) -> float:
        return min(self.marginal)
