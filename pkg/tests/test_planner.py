# Single-shooting MPC: rollout, constraints, adjoint gradient, solver statuses, fallback brake and
# the empirical safety check.
# Date: 2026-10-19
# Version: 0.1.0

import numpy as np
import pytest

from app.core.errors import EmptyTraceError
from app.models.planning import ConstraintSet, PlanConfig, PlanStatus, RealizedTrack, SafetyObservation
from app.models.prediction import PredictedTrajectory, PredictorLevel
from app.models.world import AgentState
from app.planner.mpc import (ShootingProblem, audit_plan, build_constraints, collision_margin, fallback_brake,
                             restore_feasibility, rollout_dynamics, shift_warm_start, solve_mpc)
from app.planner.safety import check_empirical_safety, step_is_safe

ORIGIN = AgentState(x=0.0, y=0.0, heading=0.0)


def _config(horizon=10, **overrides):
    return PlanConfig(planning_horizon=horizon, prediction_horizon=horizon, wall_clock_ms=None, **overrides)


def _static_obstacle(point, horizon, radius=0.0, obstacle_id=1, level=PredictorLevel.FAST):
    return PredictedTrajectory(obstacle_id=obstacle_id, predictor=level, base_time=0,
                               points=[point] * horizon, radii=[radius] * horizon)


def test_rollout_examples():
    states = rollout_dynamics(ORIGIN, np.zeros((4, 2)))
    assert len(states) == 5 and all(state == ORIGIN for state in states)
    straight = rollout_dynamics(ORIGIN, [(1.0, 0.0)] * 3, dt=0.1)
    np.testing.assert_allclose([state.x for state in straight], [0.0, 0.1, 0.2, 0.3], atol=1e-12)


def test_closed_form_rollout_matches_step_by_step():
    config = _config()
    controls = np.random.default_rng(2).uniform([0.0, -1.5], [1.5, 1.5], size=(10, 2))
    problem = ShootingProblem(ORIGIN, (5.0, 0.0), ConstraintSet(), config)
    fast = problem.rollout(controls)
    slow = np.array([state.as_array() for state in rollout_dynamics(ORIGIN, controls, config.dt)])
    np.testing.assert_allclose(fast[:, :2], slow[:, :2], atol=1e-12)
    np.testing.assert_array_equal(problem.rollout(controls), fast)


@pytest.mark.parametrize("point, margin, expected", [((2.0, 0.0), 1.0, 1.0), ((1.0, 0.0), 1.0, 0.0),
                                                     ((0.5, 0.0), 1.0, -0.5)])
def test_collision_margin(point, margin, expected):
    assert collision_margin(ORIGIN, point, margin) == pytest.approx(expected)


def test_build_constraints_skips_level_zero():
    predictions = [_static_obstacle((3.0, 0.0), 5, radius=0.2, obstacle_id=1),
                   _static_obstacle((4.0, 0.0), 5, obstacle_id=2, level=PredictorLevel.SIMPLE)]
    constraints = build_constraints(predictions, {1: 0.3, 2: 0.3}, agent_radius=0.3, lipschitz=2.0)
    assert constraints.obstacle_ids == [1]
    np.testing.assert_allclose(constraints.margins, [[1.0] * 5])
    np.testing.assert_allclose(constraints.base_margins, [0.6])
    assert build_constraints([], {}, 0.3).count == 0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_adjoint_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    config = _config(horizon=8)
    predictions = [_static_obstacle(tuple(rng.uniform(0.2, 0.8, size=2)), 8, radius=0.1, obstacle_id=1),
                   _static_obstacle(tuple(rng.uniform(0.0, 0.6, size=2)), 8, radius=0.05, obstacle_id=2)]
    constraints = build_constraints(predictions, {1: 0.3, 2: 0.3}, 0.3)
    problem = ShootingProblem(AgentState(x=0.0, y=0.0, heading=0.3), (3.0, 1.0), constraints, config)
    controls = rng.uniform([0.2, -1.0], [1.2, 1.0], size=(8, 2))
    rho = 100.0
    value, grad = problem.gradient(controls, rho)
    assert value == pytest.approx(problem.merit(controls, rho))

    numeric = np.zeros_like(controls)
    step = 1e-6
    for index in np.ndindex(*controls.shape):
        plus, minus = controls.copy(), controls.copy()
        plus[index] += step
        minus[index] -= step
        numeric[index] = (problem.merit(plus, rho) - problem.merit(minus, rho)) / (2 * step)
    np.testing.assert_allclose(grad, numeric, rtol=1e-4, atol=1e-4)


def test_obstacle_free_run_is_optimal():
    config = _config(horizon=30)
    result = solve_mpc(ORIGIN, (5.0, 0.0), ConstraintSet(), None, config)
    assert result.status is PlanStatus.OPTIMAL
    assert result.controls.shape == (30, 2)
    assert result.first_control[0] > 0.0
    final = np.linalg.norm(result.positions[-1] - (5.0, 0.0))
    assert final < 5.0
    np.testing.assert_allclose(result.controls[:, 1], 0.0, atol=1e-9)


def test_at_goal_stays_put():
    config = _config()
    result = solve_mpc(AgentState(x=5.0, y=5.0), (5.0, 5.0), ConstraintSet(), None, config)
    assert result.status.is_feasible
    assert np.max(np.abs(result.controls)) < 1e-6
    assert result.cost == pytest.approx(0.0, abs=1e-9)


def test_far_obstacle_does_not_change_the_plan():
    config = _config()
    free = solve_mpc(ORIGIN, (5.0, 0.0), ConstraintSet(), None, config)
    constraints = build_constraints([_static_obstacle((2.0, 8.0), 10, radius=0.1)], {1: 0.3}, 0.3)
    constrained = solve_mpc(ORIGIN, (5.0, 0.0), constraints, None, config)
    assert constrained.status is PlanStatus.OPTIMAL
    np.testing.assert_allclose(constrained.controls, free.controls, atol=1e-9)


@pytest.mark.parametrize("offset", [0.0, 0.3, 0.7])
def test_reported_status_survives_an_independent_audit(offset):
    config = _config(horizon=20)
    constraints = build_constraints([_static_obstacle((1.5, offset), 20, radius=0.2)], {1: 0.3}, 0.3)
    result = solve_mpc(ORIGIN, (4.0, 0.0), constraints, None, config)
    audited = audit_plan(ORIGIN, (4.0, 0.0), result.controls, constraints, config)
    assert audited == pytest.approx(result.max_violation, abs=1e-12)
    if result.status.is_feasible:
        assert audited <= config.tolerance
    else:
        assert audited > config.tolerance
    assert np.all(result.controls[:, 0] >= 0.0) and np.all(result.controls[:, 0] <= config.v_max)
    assert np.all(np.abs(result.controls[:, 1]) <= config.omega_max)
    assert result.controls.shape == (20, 2)


def test_obstacle_dead_ahead_yields_a_safe_plan():
    config = _config(horizon=20)
    obstacle = _static_obstacle((1.5, 0.0), 20, radius=0.2)
    constraints = build_constraints([obstacle], {1: 0.3}, 0.3)
    result = solve_mpc(ORIGIN, (4.0, 0.0), constraints, None, config)
    assert result.status.is_feasible
    assert audit_plan(ORIGIN, (4.0, 0.0), result.controls, constraints, config) <= config.tolerance
    states = rollout_dynamics(ORIGIN, result.controls, config.dt, config.v_max, config.omega_max)
    margins = [collision_margin(state, point, margin)
               for state, point, margin in zip(states[1:], obstacle.points, constraints.margins[0])]
    assert min(margins) >= -config.tolerance


def test_restoration_slows_an_infeasible_plan_down():
    config = _config(horizon=10)
    constraints = build_constraints([_static_obstacle((1.0, 0.0), 10, radius=0.0)], {1: 0.3}, 0.3)
    problem = ShootingProblem(ORIGIN, (4.0, 0.0), constraints, config)
    full_speed = np.tile([config.v_max, 0.0], (10, 1))
    assert problem.max_violation(problem.rollout(full_speed)) > config.tolerance
    restored = restore_feasibility(problem, full_speed, config.tolerance)
    assert restored is not None
    assert problem.max_violation(problem.rollout(restored)) <= config.tolerance
    np.testing.assert_array_equal(restored[:, 1], full_speed[:, 1])
    # An obstacle sitting on the agent cannot be escaped by slowing down.
    blocked = build_constraints([_static_obstacle((0.1, 0.0), 10, radius=0.0)], {1: 0.3}, 0.3)
    stuck = ShootingProblem(ORIGIN, (4.0, 0.0), blocked, config)
    assert restore_feasibility(stuck, full_speed, config.tolerance) is None


def test_merit_never_increases_within_a_penalty_weight():
    config = _config(horizon=20)
    constraints = build_constraints([_static_obstacle((1.5, 0.2), 20, radius=0.2)], {1: 0.3}, 0.3)
    result = solve_mpc(ORIGIN, (4.0, 0.0), constraints, None, config)
    assert result.merit_history
    for merits in result.merit_history:
        assert all(later <= earlier + 1e-9 for earlier, later in zip(merits, merits[1:]))


def test_warm_start_shift():
    config = _config()
    first = solve_mpc(ORIGIN, (5.0, 0.0), ConstraintSet(), None, config)
    shifted = shift_warm_start(first, config.planning_horizon)
    np.testing.assert_array_equal(shifted[:-1], first.controls[1:])
    np.testing.assert_array_equal(shifted[-1], first.controls[-1])
    moved = AgentState.from_array(first.states[1])
    second = solve_mpc(moved, (5.0, 0.0), ConstraintSet(), first, config)
    assert second.cost <= first.cost + config.tolerance


def test_fallback_brake_ramps_down():
    config = _config()
    result = fallback_brake(ORIGIN, config, current_speed=config.v_max)
    speeds = result.controls[:, 0]
    assert result.status is PlanStatus.INFEASIBLE_FALLBACK
    assert np.all(np.diff(speeds) <= 0.0) and speeds[-1] == 0.0
    np.testing.assert_allclose(result.controls[:, 1], 0.0)
    stopped = fallback_brake(ORIGIN, config)
    np.testing.assert_array_equal(stopped.controls, 0.0)


def _observation(obstacle_positions, status=PlanStatus.FEASIBLE):
    planned = [(0.1 * h, 0.0) for h in range(4)]
    return SafetyObservation(t=0, status=status, planned=planned, agent_radius=0.3,
                             obstacles=[RealizedTrack(obstacle_id=1, radius=0.3, positions=obstacle_positions)])


def test_step_safety():
    assert step_is_safe(_observation([(2.0, 0.0)] * 3))
    assert not step_is_safe(_observation([(2.0, 0.0), (0.5, 0.0), (2.0, 0.0)]))
    assert step_is_safe(SafetyObservation(t=0, status=PlanStatus.OPTIMAL, planned=[(0.0, 0.0)], agent_radius=0.3))


def test_empirical_safety_frequency():
    trace = [_observation([(2.0, 0.0)] * 3), _observation([(0.2, 0.0)] * 3),
             _observation([(0.2, 0.0)] * 3, status=PlanStatus.INFEASIBLE_FALLBACK)]
    report = check_empirical_safety(trace, 0.05)
    assert report.n_steps == 2 and report.n_safe == 1
    assert report.frequency == 0.5 and not report.passed
    assert check_empirical_safety(trace, 1.0).passed
    assert check_empirical_safety(trace[:1], 0.05).frequency == 1.0


def test_empirical_safety_rejects_empty_trace():
    with pytest.raises(EmptyTraceError):
        check_empirical_safety([], 0.05)


def test_plan_config_requires_prediction_within_planning_horizon():
    with pytest.raises(ValueError):
        PlanConfig(planning_horizon=10, prediction_horizon=20)
