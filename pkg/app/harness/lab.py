# Builds the immutable lab context (predictors, epsilon table, planner settings) from artifacts,
# and runs the calibration pipeline that produces those artifacts.
# Date: 2026-10-19
# Version: 0.1.0

from dataclasses import dataclass, field
from typing import Dict, Optional

from app.conformal.calibration import EpsilonTable, build_epsilon_table
from app.core.config import LabConfig
from app.core.predictor_registry import PredictorRegistry
from app.models.harness import Architecture
from app.models.planning import PlanConfig
from app.models.prediction import CONFORMAL_LEVELS, PredictorLevel
from app.models.risk import RouterConfig
from app.predictors.base_predictor import PredictorContext
from app.predictors.calibration import (CALIBRATION_STREAM, HOLDOUT_STREAM, LIBRARY_STREAM, CalibrationSet,
                                        generate_calibration_set, measure_prediction_costs,
                                        predictor_error_profile, simulate_obstacle_rollouts, stream_rng)
from app.predictors.library import TrajectoryLibrary, build_library
from app.services.artifact_store import ArtifactStore
from app.utils.logger import console


@dataclass
class LabContext:
    """Everything a trial needs besides its scenario; shared read-only across trials."""
    config: LabConfig
    registry: PredictorRegistry
    table: EpsilonTable
    plan: PlanConfig
    costs: Dict[PredictorLevel, float] = field(default_factory=dict)

    @property
    def horizon(self) -> int:
        return self.config.predictors.horizon

    def router_for(self, architecture: Architecture) -> RouterConfig:
        return self.config.router.for_architecture(architecture)


def make_registry(config: LabConfig, library: Optional[TrajectoryLibrary]) -> PredictorRegistry:
    predictors = config.predictors
    return PredictorRegistry(PredictorContext(dt=config.world.dt, library=library,
                                              k_neighbors=predictors.k_neighbors,
                                              busy_wait_multiplier=predictors.busy_wait_multiplier,
                                              bounds=tuple(config.world.bounds)))


def build_lab_context(config: LabConfig, store: ArtifactStore) -> LabContext:
    """Loads the library and epsilon table; raises ArtifactFormatError when they are missing or stale."""
    library = store.load_library()
    table = store.load_epsilon_table()
    if table.horizon < config.predictors.horizon:
        console.warning(f"Epsilon table horizon {table.horizon} is shorter than H={config.predictors.horizon}.")
    return LabContext(config=config, registry=make_registry(config, library), table=table,
                      plan=config.plan_config(), costs=store.load_costs())


def build_library_from_config(config: LabConfig) -> TrajectoryLibrary:
    predictors = config.predictors
    rollouts = simulate_obstacle_rollouts(stream_rng(config.calibration.seed, LIBRARY_STREAM),
                                          predictors.library_rollouts, predictors.library_steps,
                                          config.world, predictors.pattern_weights)
    library = build_library(rollouts, predictors.window, predictors.horizon, predictors.library_stride,
                            seed=config.calibration.seed)
    console.info(f"Built {library!r}.")
    return library


def generate_sets(config: LabConfig, registry: PredictorRegistry) -> tuple[CalibrationSet, CalibrationSet]:
    """Calibration and held-out sets from independent streams of the calibration seed."""
    cal = config.calibration
    common = dict(levels=CONFORMAL_LEVELS, registry=registry, world=config.world,
                  horizon=config.predictors.horizon, window=config.predictors.window,
                  samples_per_rollout=cal.samples_per_rollout, rollout_steps=cal.rollout_steps,
                  pattern_weights=config.predictors.pattern_weights)
    calibration = generate_calibration_set(cal.seed, cal.n_rollouts, stream=CALIBRATION_STREAM, **common)
    holdout = generate_calibration_set(cal.seed, cal.holdout_rollouts, stream=HOLDOUT_STREAM, **common)
    return calibration, holdout


def calibrate_lab(config: LabConfig, store: ArtifactStore) -> EpsilonTable:
    """Library -> calibration/held-out sets -> epsilon table -> measured costs, all written to the store."""
    console.rule("Calibration")
    library = build_library_from_config(config)
    store.save_library(library)
    registry = make_registry(config, library)

    calibration, holdout = generate_sets(config, registry)
    store.save_calibration(calibration)
    store.save_calibration(holdout, holdout=True)

    profile = predictor_error_profile(calibration)
    console.display_data_as_table({f"level {int(level)} mean error (m)": f"{errors.mean():.4f}"
                                   for level, errors in profile.items()}, "Predictor accuracy")

    conformal = config.conformal
    table = build_epsilon_table(calibration, conformal.delta, config.predictors.horizon, conformal.m_max,
                                conformal.mode, conformal.total_obstacles)
    store.save_epsilon_table(table)

    costs = measure_prediction_costs(registry, config.predictors.horizon, config.calibration.cost_calls)
    store.save_costs(costs)
    console.display_data_as_table({f"dT{int(level)} (s)": f"{value:.3e}" for level, value in costs.items()},
                                  "Prediction cost per call")
    return table
