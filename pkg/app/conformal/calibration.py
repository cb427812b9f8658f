# Hybrid conformal calibration: nonconformity scores, split-conformal radii and the epsilon-table
# indexed by (predictor level, obstacle count M, horizon step h).
# Date: 2026-10-19
# Version: 0.1.0

import math
from typing import Dict, NamedTuple, Optional, Sequence

import numpy as np

from app.core.errors import CalibrationInfeasibleError, EpsilonLookupError
from app.models.conformal import DeltaBudgeting, FailureBudget
from app.models.prediction import CONFORMAL_LEVELS, PredictorLevel
from app.predictors.calibration import CalibrationSet
from app.utils.logger import console

# Guards ceil() against products such as 20 * 0.95 landing a hair above an integer.
RANK_EPS = 1e-9


def nonconformity_score(true_point, predicted_point) -> float:
    """||Y[t+h] - Y_hat[t+h|t]||_2."""
    return float(np.linalg.norm(np.asarray(true_point, dtype=float) - np.asarray(predicted_point, dtype=float)))


def required_calibration_size(delta_bar: float) -> int:
    """Smallest n with ceil((n + 1)(1 - delta_bar)) <= n."""
    return max(1, math.ceil((1.0 - delta_bar) / delta_bar - RANK_EPS))


def conformal_rank(n: int, delta_bar: float) -> int:
    """r = ceil((n + 1)(1 - delta_bar)); raises CalibrationInfeasibleError when r > n."""
    if not 0.0 < delta_bar < 1.0:
        raise ValueError(f"delta_bar must lie in (0, 1), got {delta_bar}.")
    rank = math.ceil((n + 1) * (1.0 - delta_bar) - RANK_EPS)
    if rank > n:
        raise CalibrationInfeasibleError(required_calibration_size(delta_bar), n, delta_bar)
    return max(rank, 1)


def calibrate_radius(scores: Sequence[float], delta_bar: float) -> float:
    """The r-th smallest score, r = ceil((n + 1)(1 - delta_bar)); duplicates are kept."""
    scores = np.asarray(scores, dtype=float).reshape(-1)
    rank = conformal_rank(len(scores), delta_bar)
    return float(np.partition(scores, rank - 1)[rank - 1])


class EpsilonLookup(NamedTuple):
    epsilon: float
    clamped: bool


class EpsilonTable:
    """
    Immutable epsilon[level][M][h] in meters for level in {1, 2}, M in 1..M_max, h in 1..H.
    """
    def __init__(self, values: np.ndarray, delta: float, calibration_sizes: Dict[int, int],
                 mode: DeltaBudgeting = DeltaBudgeting.OBSTACLES_HORIZON, seed: Optional[int] = None,
                 total_obstacles: Optional[int] = None):
        values = np.array(values, dtype=float)
        if values.ndim != 3 or values.shape[0] != len(CONFORMAL_LEVELS):
            raise ValueError("Epsilon table must have shape (2, M_max, H).")
        if np.any(values < 0.0):
            raise ValueError("Conformal radii must be non-negative.")
        values.setflags(write=False)
        self.values = values
        self.delta = delta
        self.calibration_sizes = {int(k): int(v) for k, v in calibration_sizes.items()}
        self.mode = DeltaBudgeting(mode)
        self.seed = seed
        self.total_obstacles = total_obstacles

    @property
    def m_max(self) -> int:
        return self.values.shape[1]

    @property
    def horizon(self) -> int:
        return self.values.shape[2]

    @staticmethod
    def _level_index(level: PredictorLevel) -> int:
        level = PredictorLevel(level)
        if level is PredictorLevel.SIMPLE:
            raise EpsilonLookupError("Level 0 has no conformal region: it is never an MPC constraint.")
        return CONFORMAL_LEVELS.index(level)

    def radii(self, level: PredictorLevel, obstacle_count: int) -> EpsilonLookup:
        """All H radii of one (level, M) column; returns (array, clamped)."""
        index = self._level_index(level)
        if obstacle_count < 1:
            raise EpsilonLookupError(f"Obstacle count must be >= 1, got {obstacle_count}.")
        clamped = obstacle_count > self.m_max
        column = min(obstacle_count, self.m_max) - 1
        return EpsilonLookup(self.values[index, column], clamped)

    def eps_tilde(self, level: PredictorLevel, obstacle_count: int) -> float:
        """Average radius over the horizon, (1/H) sum_h epsilon[h]."""
        return float(np.mean(self.radii(level, obstacle_count).epsilon))

    def summary(self) -> Dict[str, object]:
        return {
            "delta": self.delta,
            "mode": self.mode.value,
            "m_max": self.m_max,
            "horizon": self.horizon,
            "calibration_sizes": self.calibration_sizes,
            "eps_tilde_M1": {int(level): round(self.eps_tilde(level, 1), 6) for level in CONFORMAL_LEVELS},
            "eps_tilde_Mmax": {int(level): round(self.eps_tilde(level, self.m_max), 6) for level in CONFORMAL_LEVELS},
        }


def lookup_epsilon(table: EpsilonTable, level: PredictorLevel, obstacle_count: int, h: int) -> EpsilonLookup:
    """epsilon[level][min(M_t, M_max)][h]; h starts at 1."""
    if not 1 <= h <= table.horizon:
        raise EpsilonLookupError(f"Horizon step h={h} outside 1..{table.horizon}.")
    column, clamped = table.radii(level, obstacle_count)
    if clamped:
        console.debug(f"Epsilon lookup clamped M_t={obstacle_count} to M_max={table.m_max}.")
    return EpsilonLookup(float(column[h - 1]), clamped)


def build_epsilon_table(calibration: CalibrationSet, delta: float, horizon: int, m_max: int,
                        mode: DeltaBudgeting = DeltaBudgeting.OBSTACLES_HORIZON,
                        total_obstacles: Optional[int] = None) -> EpsilonTable:
    """Calibrates every (level, M, h) cell at delta_bar from the budgeting rule."""
    if calibration.horizon < horizon:
        raise ValueError(f"Calibration horizon {calibration.horizon} shorter than H={horizon}.")
    values = np.zeros((len(CONFORMAL_LEVELS), m_max, horizon))
    sizes = {}
    for index, level in enumerate(CONFORMAL_LEVELS):
        n = calibration.size(level)
        sizes[int(level)] = n
        ordered = np.sort(calibration.scores(level)[:, :horizon], axis=0) if n else None
        for m in range(1, m_max + 1):
            budget = FailureBudget(delta=delta, horizon=horizon, obstacle_count=m, mode=mode,
                                   total_obstacles=total_obstacles)
            try:
                rank = conformal_rank(n, budget.delta_bar)
            except CalibrationInfeasibleError as e:
                raise e.at_cell((int(level), m, 1)) from None
            values[index, m - 1] = ordered[rank - 1]
    table = EpsilonTable(values, delta, sizes, mode, calibration.seed, total_obstacles)
    console.success(
        f"Built epsilon table (M_max={m_max}, H={horizon}, delta={delta}, mode={table.mode.value}); "
        f"eps_tilde at M=1: {table.summary()['eps_tilde_M1']}")
    return table
