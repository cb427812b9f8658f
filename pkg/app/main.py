# The module provides the FastAPI application serving the planning lab.
# Date: 2026-10-19
# Version: 0.2.0

from fastapi import FastAPI
from app.api.v1.api import api_router
from app.utils.logger import console

app = FastAPI(
    title="HyPRAP Lab",
    version="0.1.0",
    description="Risk-routed, conformal-backed MPC planning among dynamic obstacles.",
)

@app.get("/", summary="Health Check", tags=["Status"])
def read_root():
    """Root endpoint to check if the service is alive."""
    console.info("Health check endpoint was hit.")
    return {"message": "HyPRAP Lab is alive and running!"}

# Include the v1 router with a global '/v1' prefix
app.include_router(api_router, prefix="/v1")
