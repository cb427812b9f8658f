# Shared fixtures: a library, calibration sets and epsilon tables built once per session.
# Date: 2026-10-19
# Version: 0.2.0

import pytest

from app.conformal.calibration import build_epsilon_table
from app.core.config import BatchConfig, CalibrationConfig, ConformalConfig, LabConfig, PredictorsConfig
from app.core.predictor_registry import PredictorRegistry
from app.harness.lab import LabContext
from app.models.planning import PlanConfig
from app.models.prediction import CONFORMAL_LEVELS
from app.models.world import WorldConfig
from app.predictors.base_predictor import PredictorContext
from app.predictors.calibration import HOLDOUT_STREAM, generate_calibration_set, simulate_obstacle_rollouts, stream_rng
from app.predictors.library import build_library

WINDOW = 10
HORIZON = 10
ROLLOUT_STEPS = 40
M_MAX = 4
DELTA = 0.05
LIBRARY_ROLLOUTS = 100
LIBRARY_STEPS = 200
LIBRARY_STRIDE = 5
# Eight obstacles at H = 10 need at least 1599 examples per level.
LARGE_M_MAX = 8
LARGE_ROLLOUTS = 400


@pytest.fixture(scope="session")
def world_config():
    return WorldConfig()


@pytest.fixture(scope="session")
def library(world_config):
    rollouts = simulate_obstacle_rollouts(stream_rng(3, 0), LIBRARY_ROLLOUTS, LIBRARY_STEPS, world_config)
    return build_library(rollouts, WINDOW, HORIZON, stride=LIBRARY_STRIDE, seed=3)


@pytest.fixture(scope="session")
def registry(world_config, library):
    return PredictorRegistry(PredictorContext(dt=world_config.dt, library=library, k_neighbors=5,
                                              bounds=world_config.bounds))


@pytest.fixture(scope="session")
def calibration_set(registry, world_config):
    return generate_calibration_set(7, 200, CONFORMAL_LEVELS, registry, world_config, HORIZON, WINDOW,
                                    samples_per_rollout=5, rollout_steps=ROLLOUT_STEPS)


@pytest.fixture(scope="session")
def holdout_set(registry, world_config):
    return generate_calibration_set(7, 200, CONFORMAL_LEVELS, registry, world_config, HORIZON, WINDOW,
                                    samples_per_rollout=5, rollout_steps=ROLLOUT_STEPS, stream=HOLDOUT_STREAM)


@pytest.fixture(scope="session")
def epsilon_table(calibration_set):
    return build_epsilon_table(calibration_set, DELTA, HORIZON, M_MAX)


@pytest.fixture(scope="session")
def large_calibration_set(registry, world_config):
    return generate_calibration_set(11, LARGE_ROLLOUTS, CONFORMAL_LEVELS, registry, world_config, HORIZON, WINDOW,
                                    samples_per_rollout=5, rollout_steps=ROLLOUT_STEPS)


@pytest.fixture(scope="session")
def large_holdout_set(registry, world_config):
    return generate_calibration_set(11, LARGE_ROLLOUTS, CONFORMAL_LEVELS, registry, world_config, HORIZON, WINDOW,
                                    samples_per_rollout=5, rollout_steps=ROLLOUT_STEPS, stream=HOLDOUT_STREAM)


@pytest.fixture(scope="session")
def large_epsilon_table(large_calibration_set):
    return build_epsilon_table(large_calibration_set, DELTA, HORIZON, LARGE_M_MAX)


@pytest.fixture(scope="session")
def lab_config(world_config):
    return LabConfig(
        world=world_config.model_copy(update={"max_steps": 250}),
        predictors=PredictorsConfig(window=WINDOW, horizon=HORIZON, library_rollouts=LIBRARY_ROLLOUTS,
                                    library_steps=LIBRARY_STEPS, library_stride=LIBRARY_STRIDE),
        calibration=CalibrationConfig(n_rollouts=200, rollout_steps=ROLLOUT_STEPS, holdout_rollouts=50,
                                      cost_calls=20),
        conformal=ConformalConfig(delta=DELTA, m_max=M_MAX),
        planner=PlanConfig(planning_horizon=HORIZON, prediction_horizon=HORIZON),
        batch=BatchConfig(n_scenarios=2, obstacle_range=(5, 10), parallelism=1),
    )


@pytest.fixture(scope="session")
def lab_context(lab_config, registry, epsilon_table):
    return LabContext(config=lab_config, registry=registry, table=epsilon_table, plan=lab_config.plan_config())
