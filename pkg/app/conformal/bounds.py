# Closed-form lower bounds on the probability that every predicted obstacle stays inside its
# conformal region at one horizon step.
# Date: 2026-10-19
# Version: 0.1.0

import math

from scipy.stats import binom

from app.models.conformal import BoundResult

# Tolerance used when turning alpha * M2 into an integer count.
COUNT_EPS = 1e-9


def bonferroni_bound(obstacle_count: int, delta_bar: float) -> BoundResult:
    """1 - M_t delta_bar, valid for arbitrarily dependent obstacles (union bound)."""
    value = 1.0 - obstacle_count * delta_bar
    return BoundResult(value=value, trivial=value <= 0.0)


def independent_bound(obstacle_count: int, delta_bar: float) -> BoundResult:
    """(1 - delta_bar)^M_t for non-interacting obstacles."""
    value = (1.0 - delta_bar) ** obstacle_count
    return BoundResult(value=value, trivial=value <= 0.0)


def minimum_covered(alpha: float, count: int) -> int:
    """ceil(alpha * count), robust to products like (2/3) * 3."""
    return max(0, math.ceil(alpha * count - COUNT_EPS))


def partial_coverage_bound(accurate_count: int, fast_count: int, alpha: float, delta_bar: float) -> BoundResult:
    """
    (1 - delta_bar)^M1 * P[Binomial(M2, 1 - delta_bar) >= ceil(alpha M2)]: every P1 obstacle is
    covered and at least a fraction alpha of the P2 obstacles are.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}.")
    required = minimum_covered(alpha, fast_count)
    tail = float(binom.sf(required - 1, fast_count, 1.0 - delta_bar)) if fast_count > 0 else 1.0
    value = (1.0 - delta_bar) ** accurate_count * tail
    return BoundResult(value=value, trivial=value <= 0.0)
