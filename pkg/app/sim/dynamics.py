# The module implements the kinematic differential-drive model used by the agent.
# Date: 2026-10-19
# Version: 0.1.0

import math

from app.core.errors import ControlBoundError
from app.models.world import AgentState, ControlInput

# Slack for float round-off in solver outputs that sit exactly on a box face.
BOUND_SLACK = 1e-9


def check_control(u: ControlInput, v_max: float, omega_max: float) -> None:
    """Raises ControlBoundError when u lies outside [0, v_max] x [-omega_max, omega_max]."""
    v, omega = u.linear_velocity, u.angular_velocity
    if not (-BOUND_SLACK <= v <= v_max + BOUND_SLACK):
        raise ControlBoundError(f"linear_velocity {v} outside [0, {v_max}].")
    if not (abs(omega) <= omega_max + BOUND_SLACK):
        raise ControlBoundError(f"angular_velocity {omega} outside [-{omega_max}, {omega_max}].")


def step_agent(state: AgentState, u: ControlInput, dt: float,
               v_max: float = 1.5, omega_max: float = 1.5) -> AgentState:
    """
    Advances the agent one step: x' = x + v cos(theta) dt, y' = y + v sin(theta) dt,
    theta' = wrap(theta + omega dt).
    """
    check_control(u, v_max, omega_max)
    v, omega = u.linear_velocity, u.angular_velocity
    return AgentState(
        x=state.x + v * math.cos(state.heading) * dt,
        y=state.y + v * math.sin(state.heading) * dt,
        heading=state.heading + omega * dt,
    )
