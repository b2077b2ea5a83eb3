from __future__ import annotations

import json
import os
from contextlib import suppress
from pathlib import Path

from pydantic import BaseModel, Field, ValidationError

from .search import Algorithm, Problem, SearchStats, Verdict

CHECKPOINT_VERSION = 1


class CheckpointError(RuntimeError):
    """Raised when a checkpoint is unreadable or was written for different inputs."""


class TargetProgress(BaseModel):
    """Cursor of the target currently being scanned."""

    q: int
    n: int
    problem: Problem
    algorithm: Algorithm
    next_k: int = 0
    stats: SearchStats
    elapsed_ms: int = 0


class Checkpoint(BaseModel):
    version: int = CHECKPOINT_VERSION
    fixture_sha: str
    targets_sha: str
    completed: list[Verdict] = Field(default_factory=list)
    current: TargetProgress | None = None

    def check_inputs(self, fixture_sha: str, targets_sha: str) -> None:
        if self.version != CHECKPOINT_VERSION:
            raise CheckpointError(f"checkpoint version {self.version} is not {CHECKPOINT_VERSION}")
        if self.fixture_sha != fixture_sha:
            raise CheckpointError("checkpoint was written against different fixtures")
        if self.targets_sha != targets_sha:
            raise CheckpointError("checkpoint was written for a different target list")


class CheckpointStore:
    """Persists campaign progress as JSON next to the run's output."""

    def __init__(self, path: Path) -> None:
        self.path = path

    def load(self) -> Checkpoint | None:
        if not self.path.exists():
            return None
        try:
            data = json.loads(self.path.read_text())
            return Checkpoint.model_validate(data)
        except (json.JSONDecodeError, ValidationError) as exc:
            raise CheckpointError(f"checkpoint {self.path} is unreadable: {exc}") from exc

    def save(self, checkpoint: Checkpoint) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        partial = self.path.with_suffix(self.path.suffix + ".tmp")
        partial.write_text(checkpoint.model_dump_json(indent=2))
        os.replace(partial, self.path)

    def delete(self) -> None:
        with suppress(FileNotFoundError):
            self.path.unlink()
