# This module initializes and configures the Celery application instance.
# Date: 2026-10-19
# Version: 0.2.0

from celery import Celery
from app.core.config import get_settings

# Get the application settings
settings = get_settings()
broker_url = settings.REDIS_URL or "redis://localhost:6379/0"

# Trials are CPU-bound and independent; one task per trial.
celery_app = Celery(
    'hyprap_tasks',
    broker=broker_url,
    backend=broker_url,
    include=['app.tasks']
)

celery_app.conf.update(
    task_track_started=True,
    result_expires=24 * 3600,
    task_serializer='json',
    result_serializer='json',
    accept_content=['json'],
    worker_prefetch_multiplier=1,
    enable_utc=True,
)
