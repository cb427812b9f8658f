# This module exposes the loaded calibration artifacts and the predictor set built from them.
# Date: 2026-10-19
# Version: 0.2.0

from typing import List

from fastapi import APIRouter, Depends

from app.api.v1.dependencies import get_lab_context
from app.harness.lab import LabContext
from app.models.api_models import EpsilonSummary, PredictorDefinition

router = APIRouter()


@router.get("/epsilon", response_model=EpsilonSummary, summary="Epsilon Table Summary")
def epsilon_summary(context: LabContext = Depends(get_lab_context)):
    return EpsilonSummary(**context.table.summary())


@router.get("/predictors", response_model=List[PredictorDefinition], summary="Registered Predictors")
def list_predictors(context: LabContext = Depends(get_lab_context)):
    return [PredictorDefinition(**definition) for definition in context.registry.get_definitions()]
