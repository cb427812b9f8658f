# This module persists calibration artifacts (trajectory library, calibration and held-out sets,
# epsilon table) as versioned .npz archives.
# Date: 2026-10-19
# Version: 0.2.0

import json
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from app.core.config import get_settings
from app.core.errors import ArtifactFormatError
from app.models.conformal import DeltaBudgeting
from app.models.prediction import PredictorLevel
from app.conformal.calibration import EpsilonTable
from app.predictors.calibration import CalibrationSet
from app.predictors.library import TrajectoryLibrary
from app.utils.logger import console

FORMAT_VERSION = 2

LIBRARY_FILE = "library.npz"
CALIBRATION_FILE = "calibration.npz"
HOLDOUT_FILE = "holdout.npz"
EPSILON_FILE = "epsilon.npz"
COSTS_FILE = "costs.json"


class ArtifactHeader(BaseModel):
    """
    JSON header stored next to the arrays of every artifact.
    Attributes:
        kind (str): library, calibration or epsilon_table.
        format_version (int): Layout version; loading rejects any other value.
        window (int | None): W.
        horizon (int): H.
        n (int): Segments or examples contained.
        seed (int | None): Seed the artifact was generated from.
        extra (Dict): Kind-specific metadata.
    """
    kind: str
    format_version: int = FORMAT_VERSION
    window: Optional[int] = None
    horizon: int
    n: int = 0
    seed: Optional[int] = None
    extra: Dict[str, Any] = Field(default_factory=dict)


def _write(path: Path, header: ArtifactHeader, arrays: Dict[str, np.ndarray]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as handle:
        np.savez(handle, header=np.array(header.model_dump_json()), **arrays)
    console.success(f"Wrote {header.kind} artifact to {path} (n={header.n}).")
    return path


def _read(path: Path, kind: str):
    if not path.is_file():
        raise ArtifactFormatError(f"Artifact not found: {path}")
    try:
        archive = np.load(path, allow_pickle=False)
        header = ArtifactHeader.model_validate_json(str(archive["header"]))
    except (OSError, ValueError, KeyError, ValidationError) as e:
        raise ArtifactFormatError(f"Unreadable artifact {path}: {e}") from e
    if header.kind != kind:
        raise ArtifactFormatError(f"{path} holds a '{header.kind}' artifact, expected '{kind}'.")
    if header.format_version != FORMAT_VERSION:
        raise ArtifactFormatError(
            f"{path} has format version {header.format_version}, this build reads {FORMAT_VERSION}.")
    return header, archive


class ArtifactStore:
    """
    Reads and writes the artifacts of one calibration run under a root directory.
    """
    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)

    def save_library(self, library: TrajectoryLibrary) -> Path:
        header = ArtifactHeader(kind="library", window=library.window, horizon=library.horizon, n=len(library),
                                seed=library.seed, extra={"stride": library.stride, "skipped": library.skipped})
        return _write(self.root / LIBRARY_FILE, header, {"features": library.features, "futures": library.futures})

    def load_library(self) -> TrajectoryLibrary:
        header, archive = _read(self.root / LIBRARY_FILE, "library")
        return TrajectoryLibrary(archive["features"], archive["futures"], header.window, header.horizon,
                                 stride=header.extra.get("stride", 10), seed=header.seed,
                                 skipped=header.extra.get("skipped", 0))

    def save_calibration(self, calibration: CalibrationSet, holdout: bool = False) -> Path:
        arrays = {}
        for level in calibration.levels:
            arrays[f"predictions_{int(level)}"] = calibration.predictions[level]
            arrays[f"truths_{int(level)}"] = calibration.truths[level]
        header = ArtifactHeader(kind="calibration", window=calibration.window, horizon=calibration.horizon,
                                n=max((calibration.size(level) for level in calibration.levels), default=0),
                                seed=calibration.seed, extra={"levels": [int(l) for l in calibration.levels]})
        return _write(self.root / (HOLDOUT_FILE if holdout else CALIBRATION_FILE), header, arrays)

    def load_calibration(self, holdout: bool = False) -> CalibrationSet:
        header, archive = _read(self.root / (HOLDOUT_FILE if holdout else CALIBRATION_FILE), "calibration")
        levels = [PredictorLevel(level) for level in header.extra.get("levels", [])]
        return CalibrationSet({level: archive[f"predictions_{int(level)}"] for level in levels},
                              {level: archive[f"truths_{int(level)}"] for level in levels},
                              horizon=header.horizon, window=header.window, seed=header.seed)

    def save_epsilon_table(self, table: EpsilonTable) -> Path:
        header = ArtifactHeader(
            kind="epsilon_table", horizon=table.horizon, n=sum(table.calibration_sizes.values()), seed=table.seed,
            extra={"delta": table.delta, "mode": table.mode.value, "total_obstacles": table.total_obstacles,
                   "calibration_sizes": {str(k): v for k, v in table.calibration_sizes.items()}},
        )
        return _write(self.root / EPSILON_FILE, header, {"values": table.values})

    def load_epsilon_table(self) -> EpsilonTable:
        header, archive = _read(self.root / EPSILON_FILE, "epsilon_table")
        extra = header.extra
        return EpsilonTable(archive["values"], extra["delta"],
                            {int(k): v for k, v in extra["calibration_sizes"].items()},
                            mode=DeltaBudgeting(extra["mode"]), seed=header.seed,
                            total_obstacles=extra.get("total_obstacles"))

    def save_costs(self, costs: Dict[PredictorLevel, float]) -> Path:
        path = self.root / COSTS_FILE
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps({str(int(level)): value for level, value in costs.items()}, indent=2))
        return path

    def load_costs(self) -> Dict[PredictorLevel, float]:
        path = self.root / COSTS_FILE
        if not path.is_file():
            return {}
        return {PredictorLevel(int(level)): float(value) for level, value in json.loads(path.read_text()).items()}


def get_artifact_store(root: Optional[Union[str, Path]] = None) -> ArtifactStore:
    return ArtifactStore(root or get_settings().HYPRAP_ARTIFACT_DIR)
