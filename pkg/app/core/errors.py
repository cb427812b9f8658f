# The module defines the exception types raised across the planning lab.
# Date: 2026-10-19
# Version: 0.1.0

from typing import Optional, Tuple


class HyprapError(Exception):
    """Base class for all lab errors."""


class ControlBoundError(HyprapError, ValueError):
    """A control input lies outside the admissible box U."""


class InsufficientHistoryError(HyprapError, ValueError):
    """A predictor was queried with fewer history points than it needs."""

    def __init__(self, required: int, available: int):
        super().__init__(f"Predictor needs {required} history points, got {available}.")
        self.required = required
        self.available = available


class CalibrationInfeasibleError(HyprapError, ValueError):
    """Too few calibration scores for the requested quantile level."""

    def __init__(self, required_n: int, available_n: int, delta_bar: float,
                 cell: Optional[Tuple[int, int, int]] = None):
        where = f" at cell (level, M, h) = {cell}" if cell is not None else ""
        super().__init__(
            f"Calibration infeasible{where}: delta_bar={delta_bar:.6g} needs n >= {required_n}, "
            f"got n = {available_n}."
        )
        self.required_n = required_n
        self.available_n = available_n
        self.delta_bar = delta_bar
        self.cell = cell

    def at_cell(self, cell: Tuple[int, int, int]) -> "CalibrationInfeasibleError":
        return CalibrationInfeasibleError(self.required_n, self.available_n, self.delta_bar, cell)


class EpsilonLookupError(HyprapError, ValueError):
    """Invalid epsilon-table query (level 0 or horizon step out of range)."""


class ProfileShapeError(HyprapError, ValueError):
    """Agent plan and obstacle prediction sequences differ in length."""


class EmptyHoldoutError(HyprapError, ValueError):
    """Coverage evaluation was asked to run on an empty holdout set."""


class UndefinedAccuracyError(HyprapError, ValueError):
    """The accuracy metric E is undefined when no obstacle is predicted."""


class ScenarioGenerationError(HyprapError, ValueError):
    """Obstacle placement failed: the scenario is overcrowded."""


class EmptyTraceError(HyprapError, ValueError):
    """The empirical safety check received an empty trace."""


class ArtifactFormatError(HyprapError, ValueError):
    """An artifact file has the wrong kind or format version."""


class CostOrderingError(HyprapError, AssertionError):
    """Measured prediction costs do not satisfy dT1 > dT2."""
