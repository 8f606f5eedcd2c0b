"""Recipe store.

Layout of a store directory::

    index.json          one JSON document describing every entry
    <recipe_id>.wrcp    encrypted recipe blobs
    quarantine/         orphan blobs found during repair
    .lock               advisory lock serializing writers

Every file is written to a temporary name and atomically renamed into
place. put writes the blob before the index; remove deletes the blob before
the index. Reopening a store repairs whatever an interrupted mutation left
behind: orphan blobs are quarantined, entries without blobs are dropped and
temporary files are removed.
"""

import json
import logging
import os
from datetime import datetime
from pathlib import Path

from filelock import FileLock
from pydantic import ValidationError

from ..core.exceptions import (
    RecipeNotFoundError,
    StoreCollisionError,
    StoreError,
    StoreNotInitializedError,
)
from ..models import Recipe, RecipeStatus, RepairReport, StoreIndexEntry

logger = logging.getLogger(__name__)

INDEX_NAME = "index.json"
BLOB_SUFFIX = ".wrcp"
QUARANTINE_DIR = "quarantine"
LOCK_NAME = ".lock"
TEMP_SUFFIX = ".tmp"
INDEX_VERSION = 1


def entry_for(
    recipe: Recipe, status: RecipeStatus = RecipeStatus.ACTIVE
) -> StoreIndexEntry:
    """Index summary of a recipe."""
    return StoreIndexEntry(
        recipe_id=recipe.recipe_id,
        original_path=recipe.original_path,
        file_name=recipe.file_name,
        size_bytes=recipe.size_bytes,
        status=status,
        last_maintained_at=recipe.last_maintained_at,
    )


class RecipeStore:
    """Directory of encrypted recipe blobs plus a JSON index.

    A single handle is the only writer; mutations are additionally
    serialized across processes by an advisory lock file.
    """

    def __init__(self, store_dir: Path | str):
        """Initialize store handle.

        Args:
            store_dir: Store directory (``~`` is expanded).
        """
        self.store_dir = Path(store_dir).expanduser()
        self._lock: FileLock | None = None

    @property
    def index_path(self) -> Path:
        return self.store_dir / INDEX_NAME

    @property
    def quarantine_dir(self) -> Path:
        return self.store_dir / QUARANTINE_DIR

    def blob_path(self, recipe_id: str) -> Path:
        return self.store_dir / f"{recipe_id}{BLOB_SUFFIX}"

    @property
    def initialized(self) -> bool:
        return self.index_path.is_file()

    @property
    def lock(self) -> FileLock:
        if self._lock is None:
            self._lock = FileLock(str(self.store_dir / LOCK_NAME))
        return self._lock

    def initialize(self) -> "RecipeStore":
        """Create the store layout if missing."""
        self.store_dir.mkdir(parents=True, exist_ok=True)
        self.quarantine_dir.mkdir(exist_ok=True)
        with self.lock:
            if not self.initialized:
                self._commit_index({})
                logger.info(f"Initialized recipe store at {self.store_dir}")
        return self

    def open(self, create: bool = False) -> RepairReport:
        """Open the store, repairing interrupted mutations.

        Args:
            create: Initialize the store when it does not exist yet.

        Returns:
            What repair had to fix.

        Raises:
            StoreNotInitializedError: No index and create is False.
        """
        if create:
            self.initialize()
        self._require_index()
        return self.repair()

    # Filesystem steps of every mutation.

    def _write_temp(self, path: Path, data: bytes) -> Path:
        temp = path.with_name(path.name + TEMP_SUFFIX)
        with open(temp, "wb") as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        return temp

    def _rename(self, source: Path, target: Path) -> None:
        os.replace(source, target)

    def _unlink(self, path: Path) -> None:
        os.unlink(path)

    def _require_index(self) -> None:
        if not self.initialized:
            raise StoreNotInitializedError(self.store_dir)

    def _load_index(self) -> dict[str, StoreIndexEntry]:
        self._require_index()
        try:
            data = json.loads(self.index_path.read_text(encoding="utf-8"))
            entries = [StoreIndexEntry.model_validate(e) for e in data.get("entries", [])]
        except (OSError, json.JSONDecodeError, AttributeError, ValidationError) as e:
            raise StoreError(f"corrupt store index {self.index_path}: {e}") from e
        return {entry.recipe_id: entry for entry in entries}

    @staticmethod
    def _render_index(entries: dict[str, StoreIndexEntry]) -> bytes:
        document = {
            "version": INDEX_VERSION,
            "entries": [entries[k].model_dump(mode="json") for k in sorted(entries)],
        }
        return (json.dumps(document, indent=2, sort_keys=True) + "\n").encode("utf-8")

    def _commit_index(self, entries: dict[str, StoreIndexEntry]) -> None:
        temp = self._write_temp(self.index_path, self._render_index(entries))
        self._rename(temp, self.index_path)

    def put(self, blob: bytes, summary: StoreIndexEntry) -> str:
        """Store an encrypted recipe blob.

        Putting the same recipe id again for the same size replaces the blob
        and entry.

        Args:
            blob: Encrypted recipe bytes.
            summary: Index entry describing the recipe.

        Returns:
            The recipe id.

        Raises:
            StoreCollisionError: Recipe id exists for a different size.
        """
        with self.lock:
            entries = self._load_index()
            existing = entries.get(summary.recipe_id)
            if existing is not None and existing.size_bytes != summary.size_bytes:
                raise StoreCollisionError(
                    f"recipe id {summary.recipe_id} already used by a "
                    f"{existing.size_bytes}-byte file"
                )
            blob_path = self.blob_path(summary.recipe_id)
            self._rename(self._write_temp(blob_path, blob), blob_path)
            entries[summary.recipe_id] = summary
            self._commit_index(entries)
        logger.debug(f"Stored recipe {summary.recipe_id}")
        return summary.recipe_id

    def get(self, recipe_id: str) -> bytes:
        """Encrypted blob of a recipe.

        Raises:
            RecipeNotFoundError: Unknown recipe id.
        """
        self.entry(recipe_id)
        try:
            return self.blob_path(recipe_id).read_bytes()
        except FileNotFoundError as e:
            raise RecipeNotFoundError(f"blob for recipe {recipe_id} is missing") from e

    def entry(self, recipe_id: str) -> StoreIndexEntry:
        """Index entry of a recipe.

        Raises:
            RecipeNotFoundError: Unknown recipe id.
        """
        entry = self._load_index().get(recipe_id)
        if entry is None:
            raise RecipeNotFoundError(f"unknown recipe id: {recipe_id}")
        return entry

    def remove(self, recipe_id: str) -> StoreIndexEntry:
        """Delete a recipe's blob, then its entry.

        Returns:
            The removed entry.

        Raises:
            RecipeNotFoundError: Unknown recipe id.
        """
        with self.lock:
            entries = self._load_index()
            entry = entries.pop(recipe_id, None)
            if entry is None:
                raise RecipeNotFoundError(f"unknown recipe id: {recipe_id}")
            blob_path = self.blob_path(recipe_id)
            if blob_path.exists():
                self._unlink(blob_path)
            self._commit_index(entries)
        logger.debug(f"Removed recipe {recipe_id}")
        return entry

    def update_status(
        self, recipe_id: str, status: RecipeStatus, timestamp: datetime | None = None
    ) -> StoreIndexEntry:
        """Set a recipe's status and, when given, its maintenance timestamp.

        Raises:
            RecipeNotFoundError: Unknown recipe id.
        """
        with self.lock:
            entries = self._load_index()
            entry = entries.get(recipe_id)
            if entry is None:
                raise RecipeNotFoundError(f"unknown recipe id: {recipe_id}")
            update: dict[str, object] = {"status": status}
            if timestamp is not None:
                update["last_maintained_at"] = timestamp
            entries[recipe_id] = StoreIndexEntry.model_validate(
                {**entry.model_dump(), **update}
            )
            self._commit_index(entries)
        return entries[recipe_id]

    def repair(self) -> RepairReport:
        """Bring blobs and index back into agreement.

        Returns:
            Quarantined blobs, dropped entries and removed temporary files.
        """
        report = RepairReport()
        with self.lock:
            for temp in sorted(self.store_dir.glob(f"*{TEMP_SUFFIX}")):
                temp.unlink()
                report.removed_temp_files.append(temp.name)

            entries = self._load_index()
            blob_ids = {p.name[: -len(BLOB_SUFFIX)] for p in self.store_dir.glob(f"*{BLOB_SUFFIX}")}

            for recipe_id in sorted(blob_ids - set(entries)):
                self.quarantine_dir.mkdir(exist_ok=True)
                target = self.quarantine_dir / f"{recipe_id}{BLOB_SUFFIX}"
                counter = 1
                while target.exists():
                    target = self.quarantine_dir / f"{recipe_id}.{counter}{BLOB_SUFFIX}"
                    counter += 1
                os.replace(self.blob_path(recipe_id), target)
                report.quarantined.append(target.name)
                logger.warning(f"Quarantined orphan recipe blob {recipe_id}")

            dangling = sorted(set(entries) - blob_ids)
            for recipe_id in dangling:
                del entries[recipe_id]
                report.dropped_entries.append(recipe_id)
                logger.warning(f"Dropped index entry {recipe_id} without a blob")
            if dangling:
                self._commit_index(entries)
        return report

    def list(self) -> list[StoreIndexEntry]:
        """All entries ordered by recipe id."""
        entries = self._load_index()
        return [entries[k] for k in sorted(entries)]
