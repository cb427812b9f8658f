# The module generates obstacle-only rollouts, calibration datasets of (prediction, truth) pairs,
# and measures the per-call cost of each predictor.
# Date: 2026-10-19
# Version: 0.1.0

import time
from typing import TYPE_CHECKING, Dict, Iterable, List, Optional, Sequence

import numpy as np

from app.core.errors import CostOrderingError
from app.models.prediction import CONFORMAL_LEVELS, PredictorLevel
from app.models.world import MotionPattern, ObstacleTrack, WorldConfig
from app.sim.obstacles import advance_obstacle, sample_motion, sample_pattern
from app.utils.logger import console

if TYPE_CHECKING:
    from app.core.predictor_registry import PredictorRegistry

# Independent RNG streams derived from one configured seed.
LIBRARY_STREAM = 0
CALIBRATION_STREAM = 1
HOLDOUT_STREAM = 2


def stream_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(stream)])


def simulate_obstacle_rollouts(rng: np.random.Generator, n_rollouts: int, steps: int, config: WorldConfig,
                               pattern_weights: Optional[Dict[MotionPattern, float]] = None) -> List[np.ndarray]:
    """Single-obstacle rollouts from the scenario pattern distribution; each is (steps + 1, 2)."""
    x_min, y_min, x_max, y_max = config.bounds
    rollouts = []
    for index in range(n_rollouts):
        pattern = sample_pattern(rng, pattern_weights)
        start = (float(rng.uniform(x_min, x_max)), float(rng.uniform(y_min, y_max)))
        track = ObstacleTrack(id=index + 1, radius=config.obstacle_radius, pattern=pattern,
                              history=[start], motion=sample_motion(rng, pattern, config))
        for _ in range(steps):
            advance_obstacle(track, rng, config)
        rollouts.append(np.asarray(track.history, dtype=float))
    return rollouts


class CalibrationSet:
    """
    Immutable (prediction, truth) pairs per conformal level.

    Attributes:
        predictions (Dict[PredictorLevel, np.ndarray]): (n, H, 2) predicted positions per level.
        truths (Dict[PredictorLevel, np.ndarray]): (n, H, 2) realized positions per level.
        horizon (int): H.
        window (int): History window W used when sampling.
        seed (int | None): Seed the set was generated from.
    """
    def __init__(self, predictions: Dict[PredictorLevel, np.ndarray], truths: Dict[PredictorLevel, np.ndarray],
                 horizon: int, window: int, seed: Optional[int] = None):
        self.predictions: Dict[PredictorLevel, np.ndarray] = {}
        self.truths: Dict[PredictorLevel, np.ndarray] = {}
        for level, predicted in predictions.items():
            level = PredictorLevel(level)
            predicted = np.asarray(predicted, dtype=float).reshape(-1, horizon, 2)
            truth = np.asarray(truths[level], dtype=float).reshape(-1, horizon, 2)
            if predicted.shape != truth.shape:
                raise ValueError(f"Level {int(level)}: predictions and truths differ in shape.")
            predicted.setflags(write=False)
            truth.setflags(write=False)
            self.predictions[level] = predicted
            self.truths[level] = truth
        self.horizon = horizon
        self.window = window
        self.seed = seed

    @property
    def levels(self) -> List[PredictorLevel]:
        return sorted(self.predictions)

    def size(self, level: PredictorLevel) -> int:
        level = PredictorLevel(level)
        return len(self.predictions[level]) if level in self.predictions else 0

    def scores(self, level: PredictorLevel) -> np.ndarray:
        """(n, H) nonconformity scores ||Y - Y_hat|| for one level."""
        level = PredictorLevel(level)
        return np.linalg.norm(self.truths[level] - self.predictions[level], axis=-1)

    def __repr__(self) -> str:
        sizes = {int(level): self.size(level) for level in self.levels}
        return f"CalibrationSet(H={self.horizon}, W={self.window}, n={sizes})"


def generate_calibration_set(rng_seed: int, n_rollouts: int, levels: Iterable[PredictorLevel],
                             registry: "PredictorRegistry", world: WorldConfig, horizon: int, window: int,
                             samples_per_rollout: int = 5, rollout_steps: int = 120,
                             stream: int = CALIBRATION_STREAM,
                             pattern_weights: Optional[Dict[MotionPattern, float]] = None) -> CalibrationSet:
    """
    Simulates obstacle-only rollouts and records, at sampled times, every level's prediction
    next to the realized future. Deterministic given (rng_seed, stream).
    """
    levels = [PredictorLevel(level) for level in levels]
    if rollout_steps < window + horizon:
        raise ValueError(f"rollout_steps={rollout_steps} cannot fit W+H={window + horizon}.")
    sim_rng = stream_rng(rng_seed, stream)
    sample_rng = stream_rng(rng_seed, stream + 100)
    rollouts = simulate_obstacle_rollouts(sim_rng, n_rollouts, rollout_steps, world, pattern_weights)

    predictions: Dict[PredictorLevel, List[np.ndarray]] = {level: [] for level in levels}
    truths: Dict[PredictorLevel, List[np.ndarray]] = {level: [] for level in levels}
    for rollout in rollouts:
        times = sample_rng.integers(window, rollout_steps - horizon, size=samples_per_rollout, endpoint=True)
        for t in times:
            history = rollout[t - window:t + 1]
            truth = rollout[t + 1:t + 1 + horizon]
            for level in levels:
                outcome = registry.predict(level, history, horizon)
                predictions[level].append(outcome.points)
                truths[level].append(truth)

    empty = np.empty((0, horizon, 2))
    calibration = CalibrationSet(
        {level: np.stack(predictions[level]) if predictions[level] else empty for level in levels},
        {level: np.stack(truths[level]) if truths[level] else empty for level in levels},
        horizon=horizon, window=window, seed=rng_seed,
    )
    console.info(f"Generated {calibration!r} from {n_rollouts} rollouts.")
    return calibration


def predictor_error_profile(calibration: CalibrationSet) -> Dict[PredictorLevel, np.ndarray]:
    """Mean per-step error (H,) for every level present in the set."""
    return {level: calibration.scores(level).mean(axis=0) for level in calibration.levels
            if calibration.size(level) > 0}


def _timing_history(window: int, dt: float) -> np.ndarray:
    steps = np.arange(window + 1, dtype=float)
    return np.stack([5.0 + 0.8 * dt * steps, 5.0 + 0.3 * np.sin(0.2 * steps)], axis=1)


def prediction_cost(level: PredictorLevel, registry: "PredictorRegistry", horizon: int,
                    n_calls: int = 1000, window: Optional[int] = None) -> float:
    """Mean wall time in seconds of one prediction call at this level (monotonic clock)."""
    if n_calls < 1:
        raise ValueError("n_calls must be positive.")
    predictor = registry.get(level)
    if window is None:
        library = registry.context.library
        window = library.window if library is not None else 10
    history = _timing_history(max(window, predictor.min_history - 1), registry.context.dt)
    predictor.forecast(history, horizon)
    started = time.perf_counter()
    for _ in range(n_calls):
        predictor.forecast(history, horizon)
    return (time.perf_counter() - started) / n_calls


def measure_prediction_costs(registry: "PredictorRegistry", horizon: int, n_calls: int = 1000,
                             levels: Sequence[PredictorLevel] = CONFORMAL_LEVELS) -> Dict[PredictorLevel, float]:
    """Measures dT per level and enforces the dT1 > dT2 premise."""
    costs = {PredictorLevel(level): prediction_cost(level, registry, horizon, n_calls) for level in levels}
    slow, fast = costs.get(PredictorLevel.ACCURATE), costs.get(PredictorLevel.FAST)
    if slow is not None and fast is not None and not slow > fast:
        raise CostOrderingError(
            f"Measured dT1={slow:.3e}s is not above dT2={fast:.3e}s; enlarge the trajectory library.")
    return costs
