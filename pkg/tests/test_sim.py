# Agent kinematics, obstacle motion, sensing, collision and goal checks.
# Date: 2026-10-19
# Version: 0.1.0

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.core.errors import ControlBoundError
from app.models.world import AgentState, ControlInput, MotionPattern, MotionState, ObstacleTrack, WorldConfig
from app.sim.dynamics import step_agent
from app.sim.obstacles import advance_obstacle, mirror_into_bounds, step_obstacles
from app.sim.world import World, at_goal, check_collision, sense

QUIET = WorldConfig(acceleration_noise=0.0)


def _track(position, pattern=MotionPattern.CONSTANT_VELOCITY, track_id=1, **motion):
    return ObstacleTrack(id=track_id, pattern=pattern, history=[position], motion=MotionState(**motion))


@pytest.mark.parametrize("state, u, expected", [
    ((0.0, 0.0, 0.0), (1.0, 0.0), (0.1, 0.0, 0.0)),
    ((0.0, 0.0, 0.0), (0.0, 1.0), (0.0, 0.0, 0.1)),
    ((1.0, 1.0, math.pi / 2), (2.0, 0.0), (1.0, 1.2, math.pi / 2)),
])
def test_step_agent_examples(state, u, expected):
    result = step_agent(AgentState(x=state[0], y=state[1], heading=state[2]),
                        ControlInput(linear_velocity=u[0], angular_velocity=u[1]), 0.1, v_max=2.0)
    np.testing.assert_allclose(result.as_array(), expected, atol=1e-12)


@pytest.mark.parametrize("u", [(-0.1, 0.0), (1.6, 0.0), (1.0, 1.6), (1.0, -1.6)])
def test_step_agent_rejects_controls_outside_box(u):
    with pytest.raises(ControlBoundError):
        step_agent(AgentState(x=0.0, y=0.0), ControlInput(linear_velocity=u[0], angular_velocity=u[1]), 0.1)


@given(st.floats(-20.0, 20.0), st.floats(0.0, 1.5), st.floats(-1.5, 1.5))
def test_heading_stays_wrapped(heading, v, omega):
    result = step_agent(AgentState(x=0.0, y=0.0, heading=heading),
                        ControlInput(linear_velocity=v, angular_velocity=omega), 0.1)
    assert -math.pi < result.heading <= math.pi


def test_constant_velocity_obstacle_advances_by_v_dt():
    track = _track((5.0, 5.0), velocity=(1.0, 0.0), base_velocity=(1.0, 0.0))
    advance_obstacle(track, np.random.default_rng(0), QUIET)
    np.testing.assert_allclose(track.position, (5.1, 5.0))
    assert len(track.history) == 2


def test_stopped_obstacle_holds_position():
    track = _track((5.0, 5.0), MotionPattern.STOP_AND_GO, velocity=(1.0, 0.0), base_velocity=(1.0, 0.0),
                   moving=False, phase_left=10.0)
    advance_obstacle(track, np.random.default_rng(0), QUIET)
    np.testing.assert_allclose(track.position, (5.0, 5.0))


def test_zero_amplitude_sinusoid_matches_constant_velocity():
    sinusoid = _track((5.0, 5.0), MotionPattern.SINUSOIDAL, velocity=(0.6, 0.8), base_velocity=(0.6, 0.8),
                      amplitude=0.0, period=4.0)
    straight = _track((5.0, 5.0), velocity=(0.6, 0.8), base_velocity=(0.6, 0.8))
    for _ in range(20):
        advance_obstacle(sinusoid, np.random.default_rng(0), QUIET)
        advance_obstacle(straight, np.random.default_rng(0), QUIET)
    np.testing.assert_allclose(sinusoid.position, straight.position, atol=1e-12)


def test_obstacle_reflects_at_boundary():
    track = _track((19.95, 5.0), velocity=(1.0, 0.0), base_velocity=(1.0, 0.0))
    advance_obstacle(track, np.random.default_rng(0), QUIET)
    np.testing.assert_allclose(track.position, (19.95, 5.0), atol=1e-12)
    assert track.motion.velocity == (-1.0, 0.0)


def test_reflected_weave_is_the_mirror_image_of_the_free_path():
    motion = dict(velocity=(0.5, 0.0), base_velocity=(0.5, 0.0), amplitude=0.5, period=3.0)
    bounded = _track((19.0, 5.0), MotionPattern.SINUSOIDAL, **motion)
    free = _track((19.0, 5.0), MotionPattern.SINUSOIDAL, **motion)
    wide = QUIET.model_copy(update={"bounds": (0.0, 0.0, 60.0, 20.0)})
    for _ in range(40):
        advance_obstacle(bounded, np.random.default_rng(0), QUIET)
        advance_obstacle(free, np.random.default_rng(0), wide)
    assert bounded.motion.amplitude == -0.5
    np.testing.assert_allclose(bounded.history, mirror_into_bounds(free.history, QUIET.bounds), atol=1e-9)


def test_mirror_into_bounds():
    folded = mirror_into_bounds([(21.0, 5.0), (-0.5, 20.5), (3.0, 4.0)], (0.0, 0.0, 20.0, 20.0))
    np.testing.assert_allclose(folded, [(19.0, 5.0), (0.5, 19.5), (3.0, 4.0)])


def test_obstacles_stay_inside_workspace():
    config = WorldConfig()
    rng = np.random.default_rng(11)
    tracks = [_track((float(x), 10.0), pattern, track_id=i + 1, velocity=(1.0, 0.3), base_velocity=(1.0, 0.3),
                     speed=1.0, waypoint=(18.0, 2.0), amplitude=0.5, period=3.0, phase_left=1.0)
              for i, (x, pattern) in enumerate(zip((2, 6, 10, 14), MotionPattern))]
    for _ in range(300):
        step_obstacles(tracks, rng, config)
    for track in tracks:
        history = np.asarray(track.history)
        assert np.all(history >= 0.0) and np.all(history <= 20.0)


def test_sense_uses_closed_disc():
    agent = AgentState(x=0.0, y=0.0)
    tracks = [_track((5.9, 0.0), track_id=2), _track((0.0, 6.1), track_id=1), _track((0.0, 6.0), track_id=3)]
    sensed = sense(agent, tracks, 6.0)
    assert [obstacle.id for obstacle in sensed] == [2, 3]
    assert sensed[0].distance == pytest.approx(5.9)


def test_sense_empty_world():
    assert sense(AgentState(x=0.0, y=0.0), [], 6.0) == []


@pytest.mark.parametrize("distance, expected", [(0.59, True), (0.61, False), (0.60, False)])
def test_collision_is_strict(distance, expected):
    assert check_collision(AgentState(x=0.0, y=0.0), [_track((distance, 0.0))], 0.3) is expected


@pytest.mark.parametrize("offset, expected", [(0.0, True), (0.5, True), (1.0, False)])
def test_goal_disc_is_closed(offset, expected):
    config = WorldConfig()
    agent = AgentState(x=config.goal[0] + offset, y=config.goal[1])
    assert at_goal(agent, config) is expected


def test_world_step_advances_time_and_history():
    world = World(QUIET, AgentState(x=1.0, y=1.0), [_track((10.0, 10.0), velocity=(0.0, 1.0),
                                                          base_velocity=(0.0, 1.0))])
    world.step(ControlInput(linear_velocity=1.0, angular_velocity=0.0))
    assert world.t == 1
    assert len(world.agent_history) == 2
    np.testing.assert_allclose(world.tracks[1].position, (10.0, 10.1))


def test_world_config_rejects_goal_outside_bounds():
    with pytest.raises(ValueError):
        WorldConfig(goal=(25.0, 10.0))
