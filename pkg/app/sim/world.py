# The module provides local sensing, collision and goal checks, and the World container
# that owns one agent, its obstacles and the scenario RNG.
# Date: 2026-10-19
# Version: 0.1.0

from typing import Dict, Iterable, List, Optional

import numpy as np

from app.models.world import AgentState, ControlInput, ObstacleTrack, SensedObstacle, WorldConfig
from app.sim.dynamics import step_agent
from app.sim.obstacles import step_obstacles


def sense(agent: AgentState, tracks: Iterable[ObstacleTrack], sensing_radius: float) -> List[SensedObstacle]:
    """Returns exactly the obstacles with ||p_k - p_A|| <= sensing_radius, sorted by id."""
    sensed = []
    origin = agent.position
    for track in tracks:
        position = track.position
        distance = float(np.linalg.norm(position - origin))
        if distance <= sensing_radius:
            sensed.append(SensedObstacle(id=track.id, position=(float(position[0]), float(position[1])),
                                         distance=distance))
    sensed.sort(key=lambda obstacle: obstacle.id)
    return sensed


def check_collision(agent: AgentState, tracks: Iterable[ObstacleTrack], agent_radius: float) -> bool:
    """True iff some obstacle is strictly closer than the sum of radii."""
    origin = agent.position
    return any(
        float(np.linalg.norm(track.position - origin)) < agent_radius + track.radius
        for track in tracks
    )


def at_goal(agent: AgentState, config: WorldConfig) -> bool:
    """True iff the agent is within the (closed) goal disc."""
    return float(np.linalg.norm(agent.position - np.asarray(config.goal))) <= config.goal_radius


class World:
    """
    A discrete-time world instance. Distinct instances share no mutable state.
    """
    def __init__(self, config: WorldConfig, agent: AgentState, tracks: List[ObstacleTrack],
                 rng: Optional[np.random.Generator] = None):
        self.config = config
        self.agent = agent
        self.tracks: Dict[int, ObstacleTrack] = {track.id: track for track in tracks}
        self.rng = rng if rng is not None else np.random.default_rng(config.rng_seed)
        self.t = 0
        self.agent_history: List[AgentState] = [agent]

    @property
    def obstacles(self) -> List[ObstacleTrack]:
        return [self.tracks[key] for key in sorted(self.tracks)]

    def sense(self) -> List[SensedObstacle]:
        return sense(self.agent, self.obstacles, self.config.sensing_radius)

    def in_collision(self) -> bool:
        return check_collision(self.agent, self.obstacles, self.config.agent_radius)

    def reached_goal(self) -> bool:
        return at_goal(self.agent, self.config)

    def step(self, u: ControlInput) -> None:
        """Applies u to the agent, then advances every obstacle one dt."""
        self.agent = step_agent(self.agent, u, self.config.dt, self.config.v_max, self.config.omega_max)
        step_obstacles(self.obstacles, self.rng, self.config)
        self.agent_history.append(self.agent)
        self.t += 1
