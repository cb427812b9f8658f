# This module provides API endpoints for polling queued batches.
# Date: 2026-10-19
# Version: 0.2.0

from typing import Optional

from celery.result import AsyncResult
from fastapi import APIRouter
from pydantic import BaseModel

from app.models.harness import BatchReport
from app.worker import celery_app

router = APIRouter()


class TaskStatusResponse(BaseModel):
    """Celery state of a batch task; `report` is set once it succeeded, `error` once it failed."""
    task_id: str
    status: str
    report: Optional[BatchReport] = None
    error: Optional[str] = None


@router.get("/status/{task_id}", response_model=TaskStatusResponse, summary="Check Task Status")
def get_task_status(task_id: str):
    task_result = AsyncResult(task_id, app=celery_app)
    response = TaskStatusResponse(task_id=task_id, status=task_result.state)
    if task_result.ready():
        if task_result.successful():
            response.report = BatchReport.model_validate(task_result.get())
        else:
            response.error = str(task_result.result)
    return response
