# This module writes and reads per-step trace records as JSON lines.
# Date: 2026-10-19
# Version: 0.1.0

from pathlib import Path
from typing import IO, Iterator, List, Optional, Union

from app.models.harness import StepRecord


class TraceWriter:
    """Appends one StepRecord per line; a writer without a path only counts records."""
    def __init__(self, path: Optional[Union[str, Path]] = None):
        self.path = Path(path) if path is not None else None
        self._handle: Optional[IO[str]] = None
        self.count = 0

    def __enter__(self) -> "TraceWriter":
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._handle = self.path.open("w", encoding="utf-8")
        return self

    def __exit__(self, *exc) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None

    def write(self, record: StepRecord) -> None:
        if self._handle is not None:
            self._handle.write(record.model_dump_json() + "\n")
        self.count += 1


def read_trace(path: Union[str, Path]) -> List[StepRecord]:
    return list(iter_trace(path))


def iter_trace(path: Union[str, Path]) -> Iterator[StepRecord]:
    with Path(path).open("r", encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                yield StepRecord.model_validate_json(line)
