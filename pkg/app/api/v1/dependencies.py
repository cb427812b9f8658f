# Shared FastAPI dependencies.
# Date: 2026-10-19
# Version: 0.1.0

from functools import lru_cache

from app.core.config import load_lab_config
from app.harness.lab import LabContext, build_lab_context
from app.services.artifact_store import get_artifact_store


# Loaded on first use and kept for the life of the process.
@lru_cache
def get_lab_context() -> LabContext:
    return build_lab_context(load_lab_config(), get_artifact_store())
