# HTTP surface: health check, epsilon summary, synchronous trials and batch submission.
# Date: 2026-10-19
# Version: 0.1.0

from types import SimpleNamespace

import pytest
from fastapi.testclient import TestClient

from app.api.v1.dependencies import get_lab_context
from app.main import app


@pytest.fixture
def client(lab_context):
    app.dependency_overrides[get_lab_context] = lambda: lab_context
    yield TestClient(app)
    app.dependency_overrides.clear()


def test_health(client):
    response = client.get("/")
    assert response.status_code == 200
    assert "alive" in response.json()["message"]


def test_epsilon_summary(client, epsilon_table):
    response = client.get("/v1/artifacts/epsilon")
    assert response.status_code == 200
    body = response.json()
    assert body["m_max"] == epsilon_table.m_max and body["horizon"] == epsilon_table.horizon
    assert set(body["eps_tilde_M1"]) == {"1", "2"}


def test_predictor_listing(client):
    response = client.get("/v1/artifacts/predictors")
    assert response.status_code == 200
    body = response.json()
    assert [entry["level"] for entry in body] == [0, 1, 2]
    assert body[1]["name"] == "knn_library" and body[1]["min_history"] == 11
    assert body[2]["min_history"] == 2


def test_run_trial_in_empty_world(client):
    response = client.post("/v1/trials/run", json={"seed": 5, "architecture": "HYPRAP", "n_obstacles": 0})
    assert response.status_code == 200
    body = response.json()
    assert body["n_obstacles"] == 0 and body["success"]
    assert body["calls"]["1"] == 0 and body["calls"]["2"] == 0


def test_run_trial_validates_request(client):
    assert client.post("/v1/trials/run", json={"seed": -1}).status_code == 422
    assert client.post("/v1/trials/run", json={"seed": 1, "architecture": "SP9"}).status_code == 422


def test_batch_submission_is_queued(client, monkeypatch):
    submitted = {}

    def delay(*args):
        submitted["args"] = args
        return SimpleNamespace(id="task-123")

    monkeypatch.setattr("app.api.v1.endpoints.batches.run_batch_task", SimpleNamespace(delay=delay))
    response = client.post("/v1/batches", json={"seeds": [1, 2], "architectures": ["SP1", "HYPRAP"]})
    assert response.status_code == 202
    assert response.json() == {"task_id": "task-123", "trials": 4}
    assert submitted["args"][:2] == ([1, 2], ["SP1", "HYPRAP"])


def test_batch_needs_seeds(client):
    assert client.post("/v1/batches", json={"seeds": []}).status_code == 422
