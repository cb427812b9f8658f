# Seeded scenario generation: start and goal on opposite sides, obstacles placed by rejection
# sampling.
# Date: 2026-10-19
# Version: 0.1.0

import math
from typing import List, Tuple

import numpy as np

from app.core.errors import ScenarioGenerationError
from app.models.harness import ScenarioSpec
from app.models.world import AgentState, ObstacleTrack
from app.sim.obstacles import sample_motion, sample_pattern
from app.sim.world import World

MAX_PLACEMENT_ATTEMPTS = 10_000
# Distance of start and goal from the left and right workspace edges, meters.
EDGE_OFFSET = 1.0
# Start and goal y stay this far from the bottom and top edges.
SIDE_MARGIN = 2.0
# Placement and motion draw from separate streams of the scenario seed.
PLACEMENT_STREAM = 0
MOTION_STREAM = 1


def _place_obstacles(rng: np.random.Generator, spec: ScenarioSpec, anchors: List[np.ndarray]) -> List[np.ndarray]:
    world = spec.world
    x_min, y_min, x_max, y_max = world.bounds
    r = world.obstacle_radius
    placed: List[np.ndarray] = []
    for index in range(spec.n_obstacles):
        for _ in range(MAX_PLACEMENT_ATTEMPTS):
            candidate = np.array([rng.uniform(x_min + r, x_max - r), rng.uniform(y_min + r, y_max - r)])
            if any(np.linalg.norm(candidate - anchor) < spec.min_clearance for anchor in anchors):
                continue
            if any(np.linalg.norm(candidate - other) < 2.0 * r for other in placed):
                continue
            placed.append(candidate)
            break
        else:
            raise ScenarioGenerationError(
                f"Could not place obstacle {index + 1} of {spec.n_obstacles} after "
                f"{MAX_PLACEMENT_ATTEMPTS} attempts (seed {spec.seed}).")
    return placed


def start_and_goal(rng: np.random.Generator, spec: ScenarioSpec) -> Tuple[np.ndarray, np.ndarray]:
    x_min, y_min, x_max, y_max = spec.world.bounds
    low, high = y_min + SIDE_MARGIN, y_max - SIDE_MARGIN
    if low > high:
        low = high = 0.5 * (y_min + y_max)
    start = np.array([x_min + EDGE_OFFSET, rng.uniform(low, high)])
    goal = np.array([x_max - EDGE_OFFSET, rng.uniform(low, high)])
    return start, goal


def generate_scenario(spec: ScenarioSpec) -> World:
    """Builds the initial world for a spec; identical specs give identical worlds."""
    rng = np.random.default_rng([spec.seed, PLACEMENT_STREAM])
    start, goal = start_and_goal(rng, spec)
    config = spec.world.model_copy(update={"goal": (float(goal[0]), float(goal[1])), "rng_seed": spec.seed})

    tracks = []
    for index, position in enumerate(_place_obstacles(rng, spec, [start, goal]), start=1):
        pattern = sample_pattern(rng, spec.pattern_weights)
        tracks.append(ObstacleTrack(id=index, radius=config.obstacle_radius, pattern=pattern,
                                    history=[(float(position[0]), float(position[1]))],
                                    motion=sample_motion(rng, pattern, config)))

    heading = math.atan2(goal[1] - start[1], goal[0] - start[0])
    agent = AgentState(x=float(start[0]), y=float(start[1]), heading=heading)
    return World(config, agent, tracks, rng=np.random.default_rng([spec.seed, MOTION_STREAM]))


def scenario_specs(n_scenarios: int, base_seed: int, obstacle_range: Tuple[int, int], world,
                   pattern_weights=None) -> List[ScenarioSpec]:
    """Seeds base_seed + i; obstacle counts drawn uniformly from the inclusive range per seed."""
    specs = []
    for i in range(n_scenarios):
        seed = base_seed + i
        count = int(np.random.default_rng([seed, 2]).integers(obstacle_range[0], obstacle_range[1], endpoint=True))
        specs.append(ScenarioSpec(seed=seed, n_obstacles=count, world=world, pattern_weights=pattern_weights))
    return specs
