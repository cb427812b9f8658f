# The module builds the trajectory-segment library and implements the level-1 k-nearest-neighbour
# predictor on position increments expressed in a heading-aligned frame.
# Date: 2026-10-19
# Version: 0.2.0

import time
from typing import Optional, Sequence

import numpy as np

from app.core.errors import InsufficientHistoryError
from app.models.prediction import PredictorLevel
from app.sim.obstacles import mirror_into_bounds
from app.utils.logger import console
from .base_predictor import BasePredictor


def heading_frames(increments: np.ndarray) -> np.ndarray:
    """
    (..., 2, 2) matrices R with v @ R mapping world increments into the frame whose x axis
    follows the net displacement of the window. A window without displacement keeps the world frame.
    """
    net = np.asarray(increments, dtype=float).sum(axis=-2)
    angle = np.arctan2(net[..., 1], net[..., 0])
    cos, sin = np.cos(angle), np.sin(angle)
    return np.stack([np.stack([cos, -sin], axis=-1), np.stack([sin, cos], axis=-1)], axis=-2)


class TrajectoryLibrary:
    """
    Immutable set of (history increments, future increments) segments, both rotated into the
    heading frame of their own history window.

    Attributes:
        window (int): W, increments per history part.
        horizon (int): H, increments per future part.
        stride (int): Step between consecutive window starts inside one rollout.
        features (np.ndarray): (n, 2W) flattened history increments.
        futures (np.ndarray): (n, H, 2) future increments.
    """
    def __init__(self, features: np.ndarray, futures: np.ndarray, window: int, horizon: int,
                 stride: int = 10, seed: Optional[int] = None, skipped: int = 0):
        features = np.ascontiguousarray(features, dtype=float).reshape(-1, 2 * window)
        futures = np.ascontiguousarray(futures, dtype=float).reshape(-1, horizon, 2)
        if len(features) != len(futures):
            raise ValueError("features and futures must hold the same number of segments.")
        features.setflags(write=False)
        futures.setflags(write=False)
        self.features = features
        self.futures = futures
        self.window = window
        self.horizon = horizon
        self.stride = stride
        self.seed = seed
        self.skipped = skipped

    def __len__(self) -> int:
        return len(self.features)

    def __repr__(self) -> str:
        return f"TrajectoryLibrary(segments={len(self)}, W={self.window}, H={self.horizon}, stride={self.stride})"


def build_library(rollouts: Sequence[np.ndarray], window: int, horizon: int, stride: int = 10,
                  seed: Optional[int] = None) -> TrajectoryLibrary:
    """
    Slices every (W, H) window out of each rollout with the given stride.
    Rollout length is counted in steps (increments); rollouts shorter than W + H steps are skipped.
    """
    span = window + horizon
    features, futures = [], []
    skipped = 0
    for rollout in rollouts:
        increments = np.diff(np.asarray(rollout, dtype=float).reshape(-1, 2), axis=0)
        steps = len(increments)
        if steps < span:
            skipped += 1
            continue
        for start in range(0, steps - span + 1, stride):
            past = increments[start:start + window]
            frame = heading_frames(past)
            features.append((past @ frame).reshape(-1))
            futures.append(increments[start + window:start + span] @ frame)
    if skipped:
        console.warning(f"build_library skipped {skipped} rollout(s) shorter than W+H={span} steps.")
    if not features:
        return TrajectoryLibrary(np.empty((0, 2 * window)), np.empty((0, horizon, 2)),
                                 window, horizon, stride, seed, skipped)
    return TrajectoryLibrary(np.stack(features), np.stack(futures), window, horizon, stride, seed, skipped)


def predict_knn(library: TrajectoryLibrary, history: np.ndarray, k: int, horizon: int) -> np.ndarray:
    """
    Averages the future increments of the k segments whose history increments are closest (L2)
    to the query, both compared in their heading frames, then rotates the mean back and
    integrates it from the current position.
    """
    if len(library) == 0:
        raise ValueError("Trajectory library is empty.")
    if horizon > library.horizon:
        raise ValueError(f"Requested horizon {horizon} exceeds library horizon {library.horizon}.")
    history = np.asarray(history, dtype=float).reshape(-1, 2)
    if len(history) < library.window + 1:
        raise InsufficientHistoryError(library.window + 1, len(history))
    history = history[-(library.window + 1):]

    increments = np.diff(history, axis=0)
    frame = heading_frames(increments)
    query = (increments @ frame).reshape(-1)
    residual = library.features - query
    distances = np.einsum("ij,ij->i", residual, residual)
    k_eff = min(max(k, 1), len(library))
    if k_eff < len(library):
        candidates = np.argpartition(distances, k_eff - 1)[:k_eff]
        nearest = candidates[np.lexsort((candidates, distances[candidates]))]
    else:
        nearest = np.arange(len(library))
    steps = library.futures[nearest, :horizon].mean(axis=0) @ frame.T
    return history[-1] + np.cumsum(steps, axis=0)


class KnnLibraryPredictor(BasePredictor):
    """P1: library retrieval, accurate on learnable patterns but O(n W) per call."""
    level = PredictorLevel.ACCURATE
    name = "knn_library"
    description = ("Averages the futures of the k library segments nearest to the recent increments "
                   "and folds the path back into the workspace.")

    def __init__(self, context):
        super().__init__(context)
        if context.library is None or len(context.library) == 0:
            raise ValueError("The level-1 predictor needs a non-empty trajectory library.")
        self.library = context.library
        self.min_history = self.library.window + 1

    def forecast(self, history: np.ndarray, horizon: int) -> np.ndarray:
        started = time.perf_counter()
        points = predict_knn(self.library, history, self.context.k_neighbors, horizon)
        if self.context.bounds is not None:
            points = mirror_into_bounds(points, self.context.bounds)
        multiplier = self.context.busy_wait_multiplier
        if multiplier > 1.0:
            deadline = started + (time.perf_counter() - started) * multiplier
            while time.perf_counter() < deadline:
                pass
        return points
