# The module defines the world-side domain models: agent pose, controls, obstacles, world config.
# Date: 2026-10-19
# Version: 0.1.0

import math
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Point = Tuple[float, float]


def wrap_angle(theta: float) -> float:
    """Maps an angle to (-pi, pi]."""
    wrapped = math.remainder(theta, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


class AgentState(BaseModel):
    """
    Pose of the differential-drive agent.
    Attributes:
        x (float): Position along the workspace x axis, meters.
        y (float): Position along the workspace y axis, meters.
        heading (float): Orientation in radians, normalized to (-pi, pi].
    """
    model_config = ConfigDict(frozen=True)

    x: float = Field(..., allow_inf_nan=False, description="x position in meters.")
    y: float = Field(..., allow_inf_nan=False, description="y position in meters.")
    heading: float = Field(default=0.0, allow_inf_nan=False, description="Heading in radians.")

    @field_validator("heading")
    @classmethod
    def _normalize_heading(cls, value: float) -> float:
        return wrap_angle(value)

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.heading])

    @classmethod
    def from_array(cls, values) -> "AgentState":
        return cls(x=float(values[0]), y=float(values[1]), heading=float(values[2]))


class ControlInput(BaseModel):
    """
    Actuation of the agent for one step.
    Attributes:
        linear_velocity (float): Forward speed in m/s, admissible range [0, v_max].
        angular_velocity (float): Turn rate in rad/s, admissible range [-omega_max, omega_max].
    """
    model_config = ConfigDict(frozen=True)

    linear_velocity: float = Field(default=0.0, allow_inf_nan=False)
    angular_velocity: float = Field(default=0.0, allow_inf_nan=False)


class MotionPattern(str, Enum):
    CONSTANT_VELOCITY = "constant_velocity"
    SINUSOIDAL = "sinusoidal"
    WAYPOINT = "waypoint"
    STOP_AND_GO = "stop_and_go"


class MotionState(BaseModel):
    """Hidden per-obstacle state driving its ground-truth pattern."""
    velocity: Point = (0.0, 0.0)
    base_velocity: Point = (0.0, 0.0)
    amplitude: float = 0.0
    period: float = 1.0
    elapsed: float = 0.0
    speed: float = 0.0
    waypoint: Optional[Point] = None
    moving: bool = True
    phase_left: float = 0.0


class ObstacleTrack(BaseModel):
    """
    One moving obstacle and its observed position history Y_k[.].
    Attributes:
        id (int): Obstacle identity in 1..N.
        radius (float): Disc radius in meters.
        pattern (MotionPattern): Ground-truth motion family; never read by the planner.
        history (List[Point]): Positions at consecutive steps, starting at start_step.
        start_step (int): Time index of history[0].
        motion (MotionState): Pattern state advanced by step_obstacles.
    """
    id: int = Field(..., ge=1)
    radius: float = Field(default=0.3, gt=0.0)
    pattern: MotionPattern = MotionPattern.CONSTANT_VELOCITY
    history: List[Point] = Field(..., min_length=1)
    start_step: int = 0
    motion: MotionState = Field(default_factory=MotionState)

    @property
    def position(self) -> np.ndarray:
        return np.asarray(self.history[-1], dtype=float)

    @property
    def current_step(self) -> int:
        return self.start_step + len(self.history) - 1

    def recent(self, count: int) -> np.ndarray:
        """Last `count` positions (fewer if the history is shorter), oldest first."""
        return np.asarray(self.history[-count:], dtype=float)

    def position_at(self, step: int) -> Optional[np.ndarray]:
        index = step - self.start_step
        if 0 <= index < len(self.history):
            return np.asarray(self.history[index], dtype=float)
        return None


class WorldConfig(BaseModel):
    """
    Static parameters of one simulated world; the [world] section of the lab config.
    """
    bounds: Tuple[float, float, float, float] = Field(
        default=(0.0, 0.0, 20.0, 20.0), description="Workspace rectangle (x_min, y_min, x_max, y_max).")
    goal: Point = (19.0, 10.0)
    goal_radius: float = Field(default=0.5, gt=0.0)
    sensing_radius: float = Field(default=6.0, gt=0.0)
    dt: float = Field(default=0.1, gt=0.0)
    agent_radius: float = Field(default=0.3, gt=0.0)
    obstacle_radius: float = Field(default=0.3, gt=0.0)
    v_max: float = Field(default=1.5, gt=0.0)
    omega_max: float = Field(default=1.5, gt=0.0)
    max_steps: int = Field(default=400, ge=1)
    rng_seed: int = Field(default=0, ge=0, lt=2**64)

    # Obstacle motion families
    obstacle_speed_range: Tuple[float, float] = (0.2, 0.6)
    acceleration_noise: float = Field(default=0.05, ge=0.0)
    sinusoid_max_amplitude: float = Field(default=1.0, ge=0.0)
    sinusoid_period_range: Tuple[float, float] = (2.0, 8.0)
    stop_and_go_interval: Tuple[float, float] = (1.0, 3.0)

    @model_validator(mode="after")
    def _check_geometry(self) -> "WorldConfig":
        x_min, y_min, x_max, y_max = self.bounds
        if not (x_min < x_max and y_min < y_max):
            raise ValueError(f"Degenerate workspace bounds {self.bounds}.")
        if self.sensing_radius <= self.agent_radius:
            raise ValueError("sensing_radius must exceed agent_radius.")
        gx, gy = self.goal
        if not (x_min <= gx <= x_max and y_min <= gy <= y_max):
            raise ValueError(f"Goal {self.goal} lies outside the workspace {self.bounds}.")
        return self


class SensedObstacle(BaseModel):
    """Exact measurement of one obstacle inside the sensing disc."""
    model_config = ConfigDict(frozen=True)

    id: int
    position: Point
    distance: float
