# Prediction-based collision risk index: approach distances, approach times, and the proximity
# baseline metric.
# Date: 2026-10-19
# Version: 0.1.0

import math
from typing import Optional

import numpy as np

from app.core.errors import ProfileShapeError
from app.models.risk import ApproachProfile, RouterConfig

# Relative speeds below this (in (m/s)^2) make PAT undefined.
MIN_RELATIVE_SPEED_SQ = 1e-6


def _as_sequences(agent_plan, obstacle_pred):
    agent = np.asarray(agent_plan, dtype=float).reshape(-1, 2)
    obstacle = np.asarray(obstacle_pred, dtype=float).reshape(-1, 2)
    if agent.shape != obstacle.shape:
        raise ProfileShapeError(f"Agent plan has {len(agent)} points, obstacle prediction {len(obstacle)}.")
    return agent, obstacle


def backward_velocities(positions: np.ndarray, dt: float, previous: Optional[np.ndarray] = None) -> np.ndarray:
    """v[h] = (p[h] - p[h-1]) / dt; v[0] uses `previous` when given, else repeats v[1]."""
    positions = np.asarray(positions, dtype=float).reshape(-1, 2)
    velocities = np.zeros_like(positions)
    if len(positions) > 1:
        velocities[1:] = np.diff(positions, axis=0) / dt
        velocities[0] = velocities[1]
    if previous is not None:
        velocities[0] = (positions[0] - np.asarray(previous, dtype=float)) / dt
    return velocities


def compute_pad(agent_plan, obstacle_pred) -> np.ndarray:
    """PAD_h = ||p_A(t+h) - p_k(t+h)|| for h = 0..H."""
    agent, obstacle = _as_sequences(agent_plan, obstacle_pred)
    return np.linalg.norm(agent - obstacle, axis=1)


def approach_time(p_agent, v_agent, p_obstacle, v_obstacle) -> float:
    """(p_k - p_A)^T (v_A - v_k) / ||v_A - v_k||^2, or +inf for a vanishing relative velocity."""
    relative_velocity = np.asarray(v_agent, dtype=float) - np.asarray(v_obstacle, dtype=float)
    speed_sq = float(relative_velocity @ relative_velocity)
    if speed_sq < MIN_RELATIVE_SPEED_SQ:
        return math.inf
    offset = np.asarray(p_obstacle, dtype=float) - np.asarray(p_agent, dtype=float)
    return float(offset @ relative_velocity) / speed_sq


def compute_pat(agent_plan, obstacle_pred, dt: float, agent_previous=None, obstacle_previous=None) -> np.ndarray:
    """Signed approach times for h = 0..H with velocities from backward differences."""
    agent, obstacle = _as_sequences(agent_plan, obstacle_pred)
    v_agent = backward_velocities(agent, dt, agent_previous)
    v_obstacle = backward_velocities(obstacle, dt, obstacle_previous)
    relative_velocity = v_agent - v_obstacle
    speed_sq = np.einsum("ij,ij->i", relative_velocity, relative_velocity)
    offsets = obstacle - agent
    numerator = np.einsum("ij,ij->i", offsets, relative_velocity)
    degenerate = speed_sq < MIN_RELATIVE_SPEED_SQ
    return np.where(degenerate, np.inf, numerator / np.where(degenerate, 1.0, speed_sq))


def approach_profile(agent_plan, obstacle_pred, dt: float, agent_previous=None,
                     obstacle_previous=None) -> ApproachProfile:
    return ApproachProfile(
        pad=compute_pad(agent_plan, obstacle_pred).tolist(),
        pat=compute_pat(agent_plan, obstacle_pred, dt, agent_previous, obstacle_previous).tolist(),
    )


def distance_term(pad, config: RouterConfig) -> np.ndarray:
    """g1: exp(-PAD / d0), decreasing in distance."""
    return np.exp(-np.asarray(pad, dtype=float) / config.distance_scale)


def time_term(pat, config: RouterConfig) -> np.ndarray:
    """g2: double-sided exponential exp(-|PAT| / tau0); the +inf sentinel maps to 0."""
    pat = np.abs(np.asarray(pat, dtype=float))
    return np.where(np.isfinite(pat), np.exp(-np.where(np.isfinite(pat), pat, 0.0) / config.time_scale), 0.0)


def pcri_per_step(profile: ApproachProfile, config: RouterConfig) -> np.ndarray:
    return config.w_distance * distance_term(profile.pad, config) + config.w_time * time_term(profile.pat, config)


def compute_pcri(profile: ApproachProfile, config: RouterConfig) -> float:
    """psi = max_h [w1 g1(PAD_h) + w2 g2(PAT_h)], the worst moment over the horizon."""
    scores = pcri_per_step(profile, config)
    return float(np.clip(scores.max(), 0.0, 1.0)) if len(scores) else 0.0


def proximity_risk(current_distance: float, config: RouterConfig) -> float:
    """Distance-only baseline: exp(-d / d0)."""
    if current_distance < 0.0:
        raise ValueError("Distance must be non-negative.")
    if math.isinf(current_distance):
        return 0.0
    return math.exp(-current_distance / config.distance_scale)
