# Empirical verification of the conformal guarantees on held-out (prediction, truth) pairs.
# Date: 2026-10-19
# Version: 0.1.0

from typing import Dict

import numpy as np

from app.conformal.bounds import bonferroni_bound, independent_bound, minimum_covered, partial_coverage_bound
from app.conformal.calibration import EpsilonTable
from app.core.errors import EmptyHoldoutError
from app.models.conformal import CoverageReport, FailureBudget
from app.models.prediction import PredictorLevel
from app.predictors.calibration import CalibrationSet


def _covered(holdout: CalibrationSet, table: EpsilonTable, level: PredictorLevel, obstacle_count: int) -> np.ndarray:
    """Boolean (n, H): score within the radius of the (level, M) column."""
    level = PredictorLevel(level)
    if holdout.size(level) == 0:
        raise EmptyHoldoutError(f"Holdout set has no examples for level {int(level)}.")
    radii = table.radii(level, obstacle_count).epsilon
    return holdout.scores(level)[:, :table.horizon] <= radii


def _delta_bar(table: EpsilonTable, obstacle_count: int) -> float:
    budget = FailureBudget(delta=table.delta, horizon=table.horizon, obstacle_count=min(obstacle_count, table.m_max),
                           mode=table.mode, total_obstacles=table.total_obstacles)
    return budget.delta_bar


def _reference_bounds(obstacle_count: int, delta_bar: float, horizon: int) -> Dict[str, float]:
    horizon_bar = min(horizon * delta_bar, 1.0)
    return {
        "bonferroni_step": bonferroni_bound(obstacle_count, delta_bar).value,
        "independent_step": independent_bound(obstacle_count, delta_bar).value,
        "bonferroni_horizon": bonferroni_bound(obstacle_count, horizon_bar).value,
        "independent_horizon": independent_bound(obstacle_count, horizon_bar).value,
    }


def empirical_coverage(holdout: CalibrationSet, table: EpsilonTable, level: PredictorLevel,
                       obstacle_count: int, joint: bool = False) -> CoverageReport:
    """
    Per-h marginal coverage at the (level, M) radii and, with `joint`, the frequency that all
    examples of consecutive groups of M are covered (per step and over the whole horizon).
    """
    covered = _covered(holdout, table, level, obstacle_count)
    delta_bar = _delta_bar(table, obstacle_count)
    report = CoverageReport(
        level=int(level), obstacle_count=obstacle_count, delta_bar=delta_bar, n_holdout=len(covered),
        marginal=covered.mean(axis=0).tolist(), marginal_target=1.0 - delta_bar,
    )
    if joint:
        n_groups = len(covered) // obstacle_count
        if n_groups == 0:
            raise EmptyHoldoutError(f"Need at least {obstacle_count} holdout examples to form one joint group.")
        grouped = covered[:n_groups * obstacle_count].reshape(n_groups, obstacle_count, -1)
        report.joint_per_step = grouped.all(axis=1).mean(axis=0).tolist()
        report.joint_horizon = float(grouped.all(axis=(1, 2)).mean())
        report.n_groups = n_groups
        report.bounds = _reference_bounds(obstacle_count, delta_bar, table.horizon)
    return report


def joint_coverage_study(holdout: CalibrationSet, table: EpsilonTable, level: PredictorLevel,
                         obstacle_count: int = 5, n_trials: int = 5000, seed: int = 0) -> CoverageReport:
    """
    Monte Carlo over `n_trials` draws of M independent obstacle streams (examples sampled with
    replacement from the holdout set).
    """
    covered = _covered(holdout, table, level, obstacle_count)
    rng = np.random.default_rng(seed)
    draws = rng.integers(0, len(covered), size=(n_trials, obstacle_count))
    grouped = covered[draws]
    delta_bar = _delta_bar(table, obstacle_count)
    return CoverageReport(
        level=int(level), obstacle_count=obstacle_count, delta_bar=delta_bar, n_holdout=len(covered),
        marginal=covered.mean(axis=0).tolist(), marginal_target=1.0 - delta_bar,
        joint_per_step=grouped.all(axis=1).mean(axis=0).tolist(),
        joint_horizon=float(grouped.all(axis=(1, 2)).mean()), n_groups=n_trials,
        bounds=_reference_bounds(obstacle_count, delta_bar, table.horizon),
    )


def partial_coverage_study(holdout: CalibrationSet, table: EpsilonTable, accurate_count: int, fast_count: int,
                           alpha: float, n_trials: int = 5000, seed: int = 0) -> Dict[str, float]:
    """
    Frequency, per step and worst over h, that all P1 obstacles and at least ceil(alpha M2) of
    the P2 obstacles are covered, next to the closed-form partial-coverage bound.
    """
    total = accurate_count + fast_count
    accurate = _covered(holdout, table, PredictorLevel.ACCURATE, total)
    fast = _covered(holdout, table, PredictorLevel.FAST, total)
    rng = np.random.default_rng(seed)
    accurate_ok = accurate[rng.integers(0, len(accurate), size=(n_trials, accurate_count))].all(axis=1)
    fast_hits = fast[rng.integers(0, len(fast), size=(n_trials, fast_count))].sum(axis=1)
    event = accurate_ok & (fast_hits >= minimum_covered(alpha, fast_count))
    per_step = event.mean(axis=0)
    delta_bar = _delta_bar(table, total)
    return {
        "frequency_min_over_h": float(per_step.min()),
        "frequency_mean_over_h": float(per_step.mean()),
        "bound": partial_coverage_bound(accurate_count, fast_count, alpha, delta_bar).value,
        "delta_bar": delta_bar,
    }
