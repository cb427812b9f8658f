# The module is to define the base class for all trajectory predictors.
# Date: 2026-10-19
# Version: 0.2.0

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple, TYPE_CHECKING

import numpy as np

from app.models.prediction import PredictorLevel

if TYPE_CHECKING:
    from app.predictors.library import TrajectoryLibrary


@dataclass(frozen=True)
class PredictorContext:
    """
    Shared, read-only inputs handed to every predictor at registration time.
    Attributes:
        dt (float): Simulation step in seconds.
        library (TrajectoryLibrary | None): Segment library backing the level-1 predictor.
        k_neighbors (int): Neighbours averaged by the level-1 predictor.
        busy_wait_multiplier (float): Level-1 cost multiplier for timing studies (1 = off).
        bounds (Tuple | None): Workspace box the level-1 predictor folds its paths into.
    """
    dt: float = 0.1
    library: Optional["TrajectoryLibrary"] = None
    k_neighbors: int = 5
    busy_wait_multiplier: float = 1.0
    bounds: Optional[Tuple[float, float, float, float]] = None


class BasePredictor(ABC):
    """
    Abstract Base Class for all predictors in P.

    Attributes:
        level (PredictorLevel): Slot of the predictor in the routing bands.
        name (str): Identifier used in traces and reports.
        description (str): One-line summary.
        min_history (int): Positions needed before forecast() can run.
    """
    level: PredictorLevel
    name: str
    description: str
    min_history: int = 2

    def __init__(self, context: PredictorContext):
        self.context = context

    @abstractmethod
    def forecast(self, history: np.ndarray, horizon: int) -> np.ndarray:
        """
        Predicts the next `horizon` positions.

        Args:
            history: Array (n, 2) of recent positions, oldest first, n >= min_history.
            horizon: Number of future steps H.

        Returns:
            Array (H, 2) anchored at history[-1].
        """

    def get_definition(self) -> Dict[str, Any]:
        return {
            "level": int(self.level),
            "name": self.name,
            "description": self.description,
            "min_history": self.min_history,
        }
