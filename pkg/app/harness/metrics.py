# Accuracy metric E and per-architecture aggregation helpers.
# Date: 2026-10-19
# Version: 0.1.0

import math

from app.core.errors import UndefinedAccuracyError


def compute_E(m1: int, m2: int, eps_tilde_1: float, eps_tilde_2: float) -> float:
    """E = (M1 exp(-eps~1) + M2 exp(-eps~2)) / (M1 + M2), in (0, 1]."""
    if m1 < 0 or m2 < 0:
        raise ValueError("Obstacle counts must be non-negative.")
    if m1 + m2 == 0:
        raise UndefinedAccuracyError("E is undefined when no obstacle is predicted at level 1 or 2.")
    return (m1 * math.exp(-eps_tilde_1) + m2 * math.exp(-eps_tilde_2)) / (m1 + m2)


def lemma_time(m1: int, m2: int, cost_1: float, cost_2: float) -> float:
    """Theoretical prediction time M1 dT1 + M2 dT2."""
    return m1 * cost_1 + m2 * cost_2
