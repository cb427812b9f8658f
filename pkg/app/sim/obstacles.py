# The module implements ground-truth stochastic obstacle motion (four pattern families)
# and reflection at the workspace boundary.
# Date: 2026-10-19
# Version: 0.2.0

import math
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from app.models.world import MotionPattern, MotionState, ObstacleTrack, WorldConfig

DEFAULT_PATTERN_WEIGHTS: Dict[MotionPattern, float] = {pattern: 1.0 for pattern in MotionPattern}


def sample_pattern(rng: np.random.Generator,
                   weights: Optional[Dict[MotionPattern, float]] = None) -> MotionPattern:
    weights = weights or DEFAULT_PATTERN_WEIGHTS
    patterns = list(MotionPattern)
    probs = np.array([max(weights.get(p, 0.0), 0.0) for p in patterns], dtype=float)
    if probs.sum() <= 0.0:
        raise ValueError("Pattern mix weights must contain a positive entry.")
    return patterns[int(rng.choice(len(patterns), p=probs / probs.sum()))]


def _random_heading_velocity(rng: np.random.Generator, config: WorldConfig) -> Tuple[float, float]:
    speed = rng.uniform(*config.obstacle_speed_range)
    angle = rng.uniform(-math.pi, math.pi)
    return speed * math.cos(angle), speed * math.sin(angle)


def _random_waypoint(rng: np.random.Generator, config: WorldConfig) -> Tuple[float, float]:
    x_min, y_min, x_max, y_max = config.bounds
    return float(rng.uniform(x_min, x_max)), float(rng.uniform(y_min, y_max))


def sample_motion(rng: np.random.Generator, pattern: MotionPattern, config: WorldConfig) -> MotionState:
    """Draws the initial hidden state of one obstacle for the given pattern."""
    base = _random_heading_velocity(rng, config)
    if pattern is MotionPattern.CONSTANT_VELOCITY:
        return MotionState(velocity=base, base_velocity=base)
    if pattern is MotionPattern.SINUSOIDAL:
        return MotionState(
            velocity=base,
            base_velocity=base,
            amplitude=float(rng.uniform(0.0, config.sinusoid_max_amplitude)),
            period=float(rng.uniform(*config.sinusoid_period_range)),
            elapsed=float(rng.uniform(0.0, config.sinusoid_period_range[1])),
        )
    if pattern is MotionPattern.WAYPOINT:
        return MotionState(
            speed=float(rng.uniform(*config.obstacle_speed_range)),
            waypoint=_random_waypoint(rng, config),
        )
    return MotionState(
        velocity=base,
        base_velocity=base,
        moving=bool(rng.random() < 0.5),
        phase_left=float(rng.uniform(*config.stop_and_go_interval)),
    )


def _reflect(position: np.ndarray, velocity: np.ndarray, bounds) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mirrors a tentative position back into the box; returns the per-axis flip mask too."""
    lows = np.array(bounds[:2], dtype=float)
    highs = np.array(bounds[2:], dtype=float)
    flipped = np.zeros(2, dtype=bool)
    for axis in range(2):
        if position[axis] < lows[axis]:
            position[axis] = 2.0 * lows[axis] - position[axis]
            flipped[axis] = True
        elif position[axis] > highs[axis]:
            position[axis] = 2.0 * highs[axis] - position[axis]
            flipped[axis] = True
    position = np.clip(position, lows, highs)
    velocity = np.where(flipped, -velocity, velocity)
    return position, velocity, flipped


def mirror_into_bounds(points: np.ndarray, bounds) -> np.ndarray:
    """Folds a path that leaves the box back inside with the same mirror rule obstacles obey."""
    points = np.asarray(points, dtype=float)
    lows = np.array(bounds[:2], dtype=float)
    highs = np.array(bounds[2:], dtype=float)
    folded = np.where(points < lows, 2.0 * lows - points, points)
    folded = np.where(folded > highs, 2.0 * highs - folded, folded)
    return np.clip(folded, lows, highs)


def _noisy(velocity: np.ndarray, rng: np.random.Generator, sigma: float, dt: float) -> np.ndarray:
    if sigma <= 0.0:
        return velocity
    return velocity + rng.normal(0.0, sigma, size=2) * dt


def advance_obstacle(track: ObstacleTrack, rng: np.random.Generator, config: WorldConfig) -> None:
    """Moves one obstacle by dt under its pattern and appends the new position to its history."""
    dt = config.dt
    motion = track.motion
    position = track.position.copy()
    sigma = config.acceleration_noise

    if track.pattern is MotionPattern.CONSTANT_VELOCITY:
        velocity = _noisy(np.asarray(motion.velocity), rng, sigma, dt)
        position, velocity, _ = _reflect(position + velocity * dt, velocity, config.bounds)
        motion.velocity = motion.base_velocity = (float(velocity[0]), float(velocity[1]))

    elif track.pattern is MotionPattern.SINUSOIDAL:
        base = _noisy(np.asarray(motion.base_velocity), rng, sigma, dt)
        speed = float(np.linalg.norm(base))
        lateral = np.array([-base[1], base[0]]) / speed if speed > 1e-12 else np.zeros(2)
        omega = 2.0 * math.pi / motion.period
        weave = motion.amplitude * omega * math.cos(omega * motion.elapsed)
        velocity = base + lateral * weave
        position, _, flipped = _reflect(position + velocity * dt, velocity, config.bounds)
        base = np.where(flipped, -base, base)
        # A single-axis bounce mirrors the lateral direction, so the weave changes sense.
        if int(flipped.sum()) == 1:
            motion.amplitude = -motion.amplitude
        motion.base_velocity = (float(base[0]), float(base[1]))
        motion.velocity = (float(velocity[0]), float(velocity[1]))
        motion.elapsed += dt

    elif track.pattern is MotionPattern.WAYPOINT:
        target = np.asarray(motion.waypoint, dtype=float)
        offset = target - position
        distance = float(np.linalg.norm(offset))
        step = motion.speed * dt
        if distance <= step:
            position = target
            motion.waypoint = _random_waypoint(rng, config)
            velocity = offset / dt
        else:
            velocity = _noisy(offset / distance * motion.speed, rng, sigma, dt)
            position, velocity, _ = _reflect(position + velocity * dt, velocity, config.bounds)
        motion.velocity = (float(velocity[0]), float(velocity[1]))

    else:
        motion.phase_left -= dt
        if motion.phase_left <= 0.0:
            motion.moving = not motion.moving
            motion.phase_left += float(rng.uniform(*config.stop_and_go_interval))
        if motion.moving:
            velocity = _noisy(np.asarray(motion.base_velocity), rng, sigma, dt)
            position, velocity, _ = _reflect(position + velocity * dt, velocity, config.bounds)
            motion.base_velocity = (float(velocity[0]), float(velocity[1]))
            motion.velocity = motion.base_velocity
        else:
            motion.velocity = (0.0, 0.0)

    track.history.append((float(position[0]), float(position[1])))


def step_obstacles(tracks: Iterable[ObstacleTrack], rng: np.random.Generator,
                   config: WorldConfig) -> List[ObstacleTrack]:
    """Advances every obstacle one dt, in id order so a fixed seed replays bit-identically."""
    ordered = sorted(tracks, key=lambda track: track.id)
    for track in ordered:
        advance_obstacle(track, rng, config)
    return ordered
