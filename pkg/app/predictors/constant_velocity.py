# Constant-velocity extrapolation: the fast predictor P2 and the level-0 simple model.
# Date: 2026-10-19
# Version: 0.1.0

import numpy as np

from app.models.prediction import PredictorLevel
from .base_predictor import BasePredictor

# Increments averaged when estimating the current velocity.
VELOCITY_WINDOW = 3


def estimate_velocity(history: np.ndarray, dt: float) -> np.ndarray:
    """Mean of the last min(3, available) backward differences, in m/s."""
    history = np.asarray(history, dtype=float).reshape(-1, 2)
    if len(history) < 2:
        return np.zeros(2)
    increments = np.diff(history[-(VELOCITY_WINDOW + 1):], axis=0)
    return increments.mean(axis=0) / dt


def predict_stationary(history: np.ndarray, horizon: int) -> np.ndarray:
    current = np.asarray(history, dtype=float).reshape(-1, 2)[-1]
    return np.tile(current, (horizon, 1))


def predict_const_velocity(history: np.ndarray, horizon: int) -> np.ndarray:
    """Linear extrapolation of the averaged recent increment, anchored at the current position."""
    history = np.asarray(history, dtype=float).reshape(-1, 2)
    if len(history) < 2:
        return predict_stationary(history, horizon)
    step = estimate_velocity(history, 1.0)
    offsets = np.arange(1, horizon + 1, dtype=float)[:, None]
    return history[-1] + offsets * step


class ConstantVelocityPredictor(BasePredictor):
    """P2: O(H) arithmetic, coarse on curved or intermittent motion."""
    level = PredictorLevel.FAST
    name = "constant_velocity"
    description = "Extrapolates the mean of the last three position increments."
    min_history = 2

    def forecast(self, history: np.ndarray, horizon: int) -> np.ndarray:
        return predict_const_velocity(history, horizon)


class SimplePredictor(BasePredictor):
    """Level 0: keeps PAD/PAT defined for obstacles that get no MPC constraint."""
    level = PredictorLevel.SIMPLE
    name = "simple_constant_velocity"
    description = "Constant-velocity placeholder for unrouted obstacles; never constrains the MPC."
    min_history = 2

    def forecast(self, history: np.ndarray, horizon: int) -> np.ndarray:
        return predict_const_velocity(history, horizon)
