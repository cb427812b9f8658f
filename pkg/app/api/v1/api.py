# The module is to define the API router for the application.
# Date: 2026-10-19
# Version: 0.2.0

from fastapi import APIRouter
from app.api.v1.endpoints import artifacts, batches, tasks, trials

api_router = APIRouter()

api_router.include_router(trials.router, prefix="/trials", tags=["Trials"])
api_router.include_router(batches.router, prefix="/batches", tags=["Batches"])
api_router.include_router(tasks.router, prefix="/tasks", tags=["Task Management"])
api_router.include_router(artifacts.router, prefix="/artifacts", tags=["Artifacts"])
