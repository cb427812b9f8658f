# Empirical check of the horizon-wide collision-avoidance guarantee on executed runs.
# Date: 2026-10-19
# Version: 0.1.0

from typing import Sequence

import numpy as np

from app.core.errors import EmptyTraceError
from app.models.planning import SafetyObservation, SafetyReport


def step_is_safe(observation: SafetyObservation) -> bool:
    """True when no constrained obstacle came within r_A + r_k of the planned positions."""
    planned = np.asarray(observation.planned, dtype=float).reshape(-1, 2)
    for track in observation.obstacles:
        realized = np.asarray(track.positions, dtype=float).reshape(-1, 2)
        steps = min(len(realized), len(planned) - 1)
        if not steps:
            continue
        gaps = np.linalg.norm(planned[1:steps + 1] - realized[:steps], axis=1)
        if np.any(gaps < observation.agent_radius + track.radius):
            return False
    return True


def check_empirical_safety(trace: Sequence[SafetyObservation], delta: float) -> SafetyReport:
    """Frequency of realized non-collision over feasible-status steps, compared with 1 - delta."""
    if not trace:
        raise EmptyTraceError("Empirical safety needs at least one recorded step.")
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1].")
    feasible = [observation for observation in trace if observation.status.is_feasible]
    n_safe = sum(step_is_safe(observation) for observation in feasible)
    frequency = n_safe / len(feasible) if feasible else 1.0
    target = 1.0 - delta
    return SafetyReport(n_steps=len(feasible), n_safe=n_safe, frequency=frequency, target=target,
                        passed=frequency >= target)
