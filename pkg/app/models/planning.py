# The module defines planner-side models: MPC configuration, constraint sets, plan results and
# the empirical safety report.
# Date: 2026-10-19
# Version: 0.1.0

from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

Point = Tuple[float, float]


class PlanStatus(str, Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE_FALLBACK = "infeasible-fallback"

    @property
    def is_feasible(self) -> bool:
        return self is not PlanStatus.INFEASIBLE_FALLBACK


class PlanConfig(BaseModel):
    """
    Receding-horizon MPC settings.
    Attributes:
        planning_horizon (int): T, number of controls per solve.
        prediction_horizon (int): H <= T, steps that carry collision constraints.
        q_position (float): Q, running weight on squared goal distance.
        r_control (float): R, weight on squared control effort.
        q_terminal (float): Q_f, weight on the terminal squared goal distance.
        lipschitz (float): L, scales the conformal radius inside the margin.
        penalty_schedule (List[float]): Outer-loop penalty weights, tried in order.
        inner_iterations (int): Projected-gradient steps per penalty weight.
        wall_clock_ms (float | None): Time cap per solve; None disables it.
        tolerance (float): Accepted collision violation in meters.
        gradient_tolerance (float): Projected-gradient norm that counts as converged.
        armijo (float): Sufficient-decrease constant of the line search.
        initial_step (float): First trial step of the line search.
        brake_deceleration (float): Deceleration of the fallback brake in m/s^2.
        deadlock_steps (int): Consecutive fallback steps that end a trial as a deadlock.
        dt, v_max, omega_max: Copied from the world so the solver is self-contained.
    """
    planning_horizon: int = Field(default=30, ge=1)
    prediction_horizon: int = Field(default=30, ge=1)
    q_position: float = Field(default=1.0, ge=0.0)
    r_control: float = Field(default=0.1, ge=0.0)
    q_terminal: float = Field(default=10.0, ge=0.0)
    lipschitz: float = Field(default=1.0, ge=0.0)
    penalty_schedule: List[float] = Field(default_factory=lambda: [10.0, 1e2, 1e3, 1e4, 1e5], min_length=1)
    inner_iterations: int = Field(default=40, ge=1)
    wall_clock_ms: Optional[float] = Field(default=50.0, gt=0.0)
    tolerance: float = Field(default=1e-3, gt=0.0)
    gradient_tolerance: float = Field(default=1e-4, gt=0.0)
    armijo: float = Field(default=1e-4, gt=0.0, lt=1.0)
    initial_step: float = Field(default=1.0, gt=0.0)
    brake_deceleration: float = Field(default=3.0, gt=0.0)
    deadlock_steps: int = Field(default=20, ge=1)
    dt: float = Field(default=0.1, gt=0.0)
    v_max: float = Field(default=1.5, gt=0.0)
    omega_max: float = Field(default=1.5, gt=0.0)

    @model_validator(mode="after")
    def _check(self) -> "PlanConfig":
        if self.prediction_horizon > self.planning_horizon:
            raise ValueError("The prediction horizon H must not exceed the planning horizon T.")
        if any(rho <= 0.0 for rho in self.penalty_schedule):
            raise ValueError("Penalty weights must be positive.")
        return self


class ConstraintSet(BaseModel):
    """
    Collision constraints for obstacles in M_t.
    Attributes:
        obstacle_ids (List[int]): One entry per constrained obstacle.
        points (np.ndarray): (K, H, 2) predicted obstacle positions for h = 1..H.
        margins (np.ndarray): (K, H) required clearances r_A + r_k + L eps[h].
        base_margins (np.ndarray): (K,) r_A + r_k, the floor every margin respects.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    obstacle_ids: List[int] = Field(default_factory=list)
    points: np.ndarray = Field(default_factory=lambda: np.empty((0, 0, 2)))
    margins: np.ndarray = Field(default_factory=lambda: np.empty((0, 0)))
    base_margins: np.ndarray = Field(default_factory=lambda: np.empty(0))

    @model_validator(mode="after")
    def _check(self) -> "ConstraintSet":
        count = len(self.obstacle_ids)
        if self.points.shape[0] != count or self.margins.shape[0] != count or self.base_margins.shape[0] != count:
            raise ValueError("ConstraintSet arrays must have one row per obstacle.")
        if count and self.points.shape[:2] != self.margins.shape:
            raise ValueError("points and margins must agree on (K, H).")
        if count and np.any(self.margins < self.base_margins[:, None] - 1e-12):
            raise ValueError("Margins must be at least r_A + r_k.")
        return self

    @property
    def count(self) -> int:
        return len(self.obstacle_ids)

    @property
    def horizon(self) -> int:
        return int(self.points.shape[1]) if self.count else 0


class PlanResult(BaseModel):
    """
    Outcome of one MPC solve.
    Attributes:
        controls (np.ndarray): (T, 2) inputs (v, omega), always inside the control box.
        states (np.ndarray): (T + 1, 3) rolled-out poses (x, y, heading).
        status (PlanStatus): optimal, feasible or infeasible-fallback.
        max_violation (float): Largest constraint shortfall over the rollout, meters.
        solve_time (float): Wall time of the solve in seconds.
        cost (float): J of the returned controls, penalty excluded.
        iterations (int): Accepted inner steps summed over penalty weights.
        penalty (float): Last penalty weight used.
        merit_history (List[List[float]]): Merit values per penalty weight, one per accepted step.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    controls: np.ndarray
    states: np.ndarray
    status: PlanStatus
    max_violation: float = 0.0
    solve_time: float = 0.0
    cost: float = 0.0
    iterations: int = 0
    penalty: float = 0.0
    merit_history: List[List[float]] = Field(default_factory=list)

    @property
    def positions(self) -> np.ndarray:
        return self.states[:, :2]

    @property
    def first_control(self) -> Tuple[float, float]:
        return float(self.controls[0, 0]), float(self.controls[0, 1])


class RealizedTrack(BaseModel):
    """Ground-truth positions of one constrained obstacle after a planning step, h = 1..available."""
    obstacle_id: int
    radius: float = Field(..., gt=0.0)
    positions: List[Point]


class SafetyObservation(BaseModel):
    """One planning step as seen by the empirical safety check."""
    t: int
    status: PlanStatus
    planned: List[Point] = Field(..., description="Planned agent positions for h = 0..H.")
    agent_radius: float = Field(..., gt=0.0)
    obstacles: List[RealizedTrack] = Field(default_factory=list)


class SafetyReport(BaseModel):
    """Frequency of horizon-wide realized non-collision over feasible-status steps."""
    n_steps: int
    n_safe: int
    frequency: float
    target: float
    passed: bool
