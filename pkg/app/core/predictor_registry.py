# Discovers the predictor set P and dispatches predictions by level.
# Date: 2026-10-19
# Version: 0.2.0

import inspect
import pkgutil
from typing import Any, Dict, List

import numpy as np

from app import predictors as predictors_package
from app.core.errors import InsufficientHistoryError
from app.models.prediction import PredictionOutcome, PredictorLevel
from app.predictors.base_predictor import BasePredictor, PredictorContext
from app.predictors.constant_velocity import predict_stationary
from app.utils.logger import console


class PredictorRegistry:
    """
    Scans the app.predictors package, instantiates every BasePredictor subclass with the
    shared context and indexes the instances by level.
    """
    def __init__(self, context: PredictorContext):
        self.context = context
        self.predictors: Dict[PredictorLevel, BasePredictor] = {}
        self._discover_predictors()
        console.debug(f"Predictor discovery complete: {[p.name for p in self.predictors.values()]}")

    def _discover_predictors(self):
        for _, modname, _ in pkgutil.iter_modules(predictors_package.__path__, f"{predictors_package.__name__}."):
            if modname.endswith(".base_predictor"):
                continue
            module = __import__(modname, fromlist="dummy")
            for _, obj in inspect.getmembers(module, inspect.isclass):
                if not issubclass(obj, BasePredictor) or inspect.isabstract(obj) or obj.__module__ != modname:
                    continue
                try:
                    instance = obj(self.context)
                except ValueError as e:
                    console.warning(f"Predictor '{obj.__name__}' not registered: {e}")
                    continue
                self.predictors[instance.level] = instance

    def get_definitions(self) -> List[Dict[str, Any]]:
        return [self.predictors[level].get_definition() for level in sorted(self.predictors)]

    def has(self, level: PredictorLevel) -> bool:
        return PredictorLevel(level) in self.predictors

    def get(self, level: PredictorLevel) -> BasePredictor:
        level = PredictorLevel(level)
        if level not in self.predictors:
            raise ValueError(f"No predictor registered for level {int(level)}.")
        return self.predictors[level]

    def predict(self, level: PredictorLevel, history: np.ndarray, horizon: int) -> PredictionOutcome:
        """
        Dispatches to the level's predictor. With too little history the level-0 model answers
        (stationary if even that lacks history) and the outcome is flagged as a fallback.
        """
        level = PredictorLevel(level)
        history = np.asarray(history, dtype=float).reshape(-1, 2)
        predictor = self.get(level)
        try:
            if len(history) < predictor.min_history:
                raise InsufficientHistoryError(predictor.min_history, len(history))
            points = predictor.forecast(history, horizon)
            return PredictionOutcome(points=points, requested=level, used=level)
        except InsufficientHistoryError:
            simple = self.predictors.get(PredictorLevel.SIMPLE)
            if simple is not None and len(history) >= simple.min_history:
                points = simple.forecast(history, horizon)
            else:
                points = predict_stationary(history, horizon)
            return PredictionOutcome(points=points, requested=level, used=PredictorLevel.SIMPLE, fallback=True)
