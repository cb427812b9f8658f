# The module defines risk-side models: router configuration, hysteresis state and assessments.
# Date: 2026-10-19
# Version: 0.1.0

from typing import List

from pydantic import BaseModel, Field, model_validator

from app.models.prediction import PredictorLevel


class RouterConfig(BaseModel):
    """
    Thresholds and shaping constants of the risk router.
    Attributes:
        thresholds (tuple): (theta_1, theta_2) with 0 < theta_1 < theta_2 < 1.
        w_distance (float): w1, weight of the approach-distance term.
        w_time (float): w2, weight of the approach-time term.
        distance_scale (float): d0 in meters.
        time_scale (float): tau0 in seconds.
        hysteresis_margin (float): eta, extra drop below a band's lower threshold before a downgrade counts.
        dwell_steps (int): D, consecutive qualifying calls required to downgrade.
    """
    thresholds: tuple[float, float] = (0.3, 0.7)
    w_distance: float = Field(default=0.5, ge=0.0)
    w_time: float = Field(default=0.5, ge=0.0)
    distance_scale: float = Field(default=2.0, gt=0.0)
    time_scale: float = Field(default=3.0, gt=0.0)
    hysteresis_margin: float = Field(default=0.05, ge=0.0)
    dwell_steps: int = Field(default=3, ge=1)

    @model_validator(mode="after")
    def _check(self) -> "RouterConfig":
        low, high = self.thresholds
        if not 0.0 < low < high < 1.0:
            raise ValueError(f"Thresholds must satisfy 0 < theta_1 < theta_2 < 1, got {self.thresholds}.")
        if abs(self.w_distance + self.w_time - 1.0) > 1e-9:
            raise ValueError("w_distance + w_time must equal 1.")
        if self.hysteresis_margin >= low:
            raise ValueError("hysteresis_margin must be smaller than theta_1.")
        return self

    def lower_threshold(self, level: PredictorLevel) -> float:
        """Lower edge of the band served by `level`."""
        return {PredictorLevel.SIMPLE: 0.0, PredictorLevel.FAST: self.thresholds[0],
                PredictorLevel.ACCURATE: self.thresholds[1]}[PredictorLevel(level)]


class HysteresisState(BaseModel):
    """Routing memory for one (scenario, obstacle) pair."""
    band: PredictorLevel = PredictorLevel.SIMPLE
    below_count: int = 0


class ApproachProfile(BaseModel):
    """
    PAD and PAT over h = 0..H (h = 0 is the current time).
    PAT entries may be +inf when the relative velocity vanishes.
    """
    pad: List[float]
    pat: List[float]

    @model_validator(mode="after")
    def _check(self) -> "ApproachProfile":
        if len(self.pad) != len(self.pat):
            raise ValueError("PAD and PAT must have the same length H + 1.")
        if any(d < 0.0 for d in self.pad):
            raise ValueError("Approach distances must be non-negative.")
        return self


class RiskAssessment(BaseModel):
    """P-CRI of one obstacle at one step and the routing decision it produced."""
    obstacle_id: int
    psi: float = Field(..., ge=0.0, le=1.0)
    route: PredictorLevel
    per_h_scores: List[float] = Field(default_factory=list)
    hysteresis: HysteresisState
