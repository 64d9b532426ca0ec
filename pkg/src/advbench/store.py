"""Leaderboard store: a directory of attack records plus the derived rankings.

Layout:

    <store>/<attack>__<model>__<norm>.json   one AttackRecord per file
    <store>/leaderboard.json                 rankings over every record
    <store>/.lock                            exclusive lock held while merging
"""

import fcntl
import json
import logging
import os
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

from pydantic import ValidationError
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt, wait_exponential

from .config import get_settings
from .errors import DataError, FormatError, StoreIOError
from .harness import build_leaderboard
from .models import AttackRecord, Leaderboard

logger = logging.getLogger(__name__)

LEADERBOARD_FILE = "leaderboard.json"
LOCK_FILE = ".lock"


def load_record(path: Path) -> AttackRecord:
    """Read one record file.

    Raises:
        FormatError: If the file is not a valid record
    """
    try:
        return AttackRecord.model_validate_json(path.read_bytes())
    except ValidationError as e:
        raise FormatError(f"{path}: {e}") from e


def save_record(record: AttackRecord, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    _write_atomic(path, record.to_json())


def load_records(directory: Path) -> list[AttackRecord]:
    """Every record file in a directory, in filename order.

    Raises:
        DataError: If the directory holds no records
    """
    paths = sorted(p for p in directory.glob("*.json") if p.name != LEADERBOARD_FILE)
    if not paths:
        raise DataError(f"No record files in {directory}")
    return [load_record(path) for path in paths]


def save_leaderboard(board: Leaderboard, path: Path) -> None:
    document = board.model_dump(mode="json", by_alias=True)
    text = json.dumps(document, indent=2, sort_keys=True) + "\n"
    _write_atomic(path, text)


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _file_part(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-." else "_" for c in name)


class LeaderboardStore:
    """Record directory that refreshes `leaderboard.json` on every merge."""

    def __init__(self, root: Path) -> None:
        self.root = root

    @property
    def leaderboard_path(self) -> Path:
        return self.root / LEADERBOARD_FILE

    def record_path(self, record: AttackRecord) -> Path:
        parts = (_file_part(record.attack), _file_part(record.model), record.norm.value)
        return self.root / ("__".join(parts) + ".json")

    def records(self) -> list[AttackRecord]:
        if not self.root.exists():
            return []
        paths = sorted(p for p in self.root.glob("*.json") if p.name != LEADERBOARD_FILE)
        return [load_record(path) for path in paths]

    @contextmanager
    def lock(self) -> Iterator[None]:
        """Hold an exclusive lock on the store, retrying while another merge runs.

        Raises:
            StoreIOError: If the lock stays busy after the configured attempts
        """
        settings = get_settings()
        self.root.mkdir(parents=True, exist_ok=True)
        with open(self.root / LOCK_FILE, "a+") as handle:
            retrying = Retrying(
                stop=stop_after_attempt(settings.lock_attempts),
                wait=wait_exponential(multiplier=0.1, max=settings.lock_wait_max),
                retry=retry_if_exception_type(BlockingIOError),
                reraise=True,
            )
            try:
                retrying(fcntl.flock, handle.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
            except BlockingIOError as e:
                raise StoreIOError(f"Store {self.root} is locked by another process") from e
            try:
                yield
            finally:
                fcntl.flock(handle.fileno(), fcntl.LOCK_UN)

    def merge(self, record: AttackRecord) -> Leaderboard:
        """Add or replace a record and recompute every ranking.

        Stored records are never re-run; only the ensemble, ε₀, LO and GO
        are refreshed.

        Raises:
            DataError: If the record covers different samples than the
                records already stored for its model and norm
        """
        with self.lock():
            existing = self.records()
            for other in existing:
                if other.model == record.model and other.norm == record.norm:
                    if other.hashes != record.hashes:
                        raise DataError(
                            f"{record.attack} covers different samples than stored "
                            f"{other.attack} for {record.model}/{record.norm.value}"
                        )
            target = self.record_path(record)
            kept = [r for r in existing if self.record_path(r) != target]
            board = build_leaderboard([*kept, record])
            save_record(record, target)
            save_leaderboard(board, self.leaderboard_path)
        logger.info("Merged %s into %s", record.attack, self.root)
        return board


def merge_leaderboard(store: Path, record: AttackRecord) -> Leaderboard:
    return LeaderboardStore(store).merge(record)
