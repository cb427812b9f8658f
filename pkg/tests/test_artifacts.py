# Artifact store: versioned .npz archives for the library, calibration sets and epsilon table.
# Date: 2026-10-19
# Version: 0.1.0

import shutil

import numpy as np
import pytest

from app.core.errors import ArtifactFormatError
from app.models.prediction import CONFORMAL_LEVELS, PredictorLevel
from app.services.artifact_store import (EPSILON_FILE, LIBRARY_FILE, ArtifactHeader, ArtifactStore, _write)


def test_library_round_trip(tmp_path, library):
    store = ArtifactStore(tmp_path)
    store.save_library(library)
    loaded = store.load_library()
    np.testing.assert_array_equal(loaded.features, library.features)
    np.testing.assert_array_equal(loaded.futures, library.futures)
    assert (loaded.window, loaded.horizon, loaded.stride, loaded.seed) == (
        library.window, library.horizon, library.stride, library.seed)


def test_calibration_and_holdout_are_kept_apart(tmp_path, calibration_set, holdout_set):
    store = ArtifactStore(tmp_path)
    store.save_calibration(calibration_set)
    store.save_calibration(holdout_set, holdout=True)
    loaded = store.load_calibration()
    held = store.load_calibration(holdout=True)
    assert loaded.levels == calibration_set.levels
    for level in CONFORMAL_LEVELS:
        np.testing.assert_array_equal(loaded.scores(level), calibration_set.scores(level))
        np.testing.assert_array_equal(held.scores(level), holdout_set.scores(level))


def test_epsilon_table_round_trip(tmp_path, epsilon_table):
    store = ArtifactStore(tmp_path)
    store.save_epsilon_table(epsilon_table)
    loaded = store.load_epsilon_table()
    np.testing.assert_array_equal(loaded.values, epsilon_table.values)
    assert loaded.delta == epsilon_table.delta
    assert loaded.mode is epsilon_table.mode
    assert loaded.calibration_sizes == epsilon_table.calibration_sizes
    assert loaded.summary() == epsilon_table.summary()


def test_costs_round_trip(tmp_path):
    store = ArtifactStore(tmp_path)
    assert store.load_costs() == {}
    costs = {PredictorLevel.ACCURATE: 2.5e-4, PredictorLevel.FAST: 1.0e-5}
    store.save_costs(costs)
    assert store.load_costs() == costs


def test_missing_artifact(tmp_path):
    with pytest.raises(ArtifactFormatError, match="not found"):
        ArtifactStore(tmp_path).load_epsilon_table()


def test_wrong_kind_is_rejected(tmp_path, library):
    store = ArtifactStore(tmp_path)
    store.save_library(library)
    shutil.copy(tmp_path / LIBRARY_FILE, tmp_path / EPSILON_FILE)
    with pytest.raises(ArtifactFormatError, match="expected 'epsilon_table'"):
        store.load_epsilon_table()


def test_future_format_version_is_rejected(tmp_path):
    header = ArtifactHeader(kind="epsilon_table", format_version=99, horizon=1)
    _write(tmp_path / EPSILON_FILE, header, {"values": np.zeros((2, 1, 1))})
    with pytest.raises(ArtifactFormatError, match="format version 99"):
        ArtifactStore(tmp_path).load_epsilon_table()


def test_corrupt_file_is_rejected(tmp_path):
    (tmp_path / LIBRARY_FILE).write_bytes(b"definitely not an archive")
    with pytest.raises(ArtifactFormatError):
        ArtifactStore(tmp_path).load_library()
