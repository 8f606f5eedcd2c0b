"""Largest-file scanning.

Walks a directory tree without following symbolic links, keeps the N
largest readable files in a bounded heap, attaches download provenance and
reports the capacity of the volume holding the root.
"""

import heapq
import logging
import os
import shutil
from collections.abc import Iterator
from datetime import datetime

try:
    from datetime import UTC
except ImportError:  # Python < 3.11
    from datetime import timezone

    UTC = timezone.utc
from pathlib import Path

from ..config import ScanConfig
from ..core.exceptions import ScanError
from ..models import DriveInfo, FileRecord, ScanResult
from .origin_meta import SIDECAR_SUFFIX, read_origin

logger = logging.getLogger(__name__)

DEFAULT_TOP_N = 25
TRASH_DIR_NAME = ".webpurge-trash"
MARKER_SUFFIX = ".wrcp-ref"
PARTIAL_SUFFIX = ".wrcp-part"


class _Walk:
    """State of one traversal: skipped entries and excluded suffixes."""

    def __init__(self, root: Path, excluded_suffixes: tuple[str, ...]):
        self.root = root
        self.excluded_suffixes = excluded_suffixes
        self.skipped_count = 0
        self.skipped: list[FileRecord] = []

    def entries(self) -> Iterator[tuple[int, bytes, str, float]]:
        """Yield (-size, path bytes, path, mtime) for every readable file."""
        stack = [str(self.root)]
        while stack:
            directory = stack.pop()
            try:
                with os.scandir(directory) as it:
                    entries = list(it)
            except OSError as e:
                if directory == str(self.root):
                    raise ScanError(f"cannot read scan root {directory}: {e}") from e
                self.skipped_count += 1
                logger.debug(f"Skipping unreadable directory {directory}: {e}")
                continue

            for entry in entries:
                try:
                    if entry.is_symlink():
                        continue
                    if entry.is_dir(follow_symlinks=False):
                        if entry.name != TRASH_DIR_NAME:
                            stack.append(entry.path)
                        continue
                    if not entry.is_file(follow_symlinks=False):
                        continue
                    stat = entry.stat(follow_symlinks=False)
                except OSError as e:
                    self.skipped_count += 1
                    logger.debug(f"Skipping {entry.path}: {e}")
                    continue

                if entry.name.endswith(self.excluded_suffixes):
                    continue
                if not os.access(entry.path, os.R_OK):
                    self.skipped_count += 1
                    self.skipped.append(
                        FileRecord(
                            path=Path(entry.path),
                            size_bytes=stat.st_size,
                            modified_at=datetime.fromtimestamp(stat.st_mtime, tz=UTC),
                            skipped_reason="permission denied",
                        )
                    )
                    continue
                yield -stat.st_size, os.fsencode(entry.path), entry.path, stat.st_mtime


def _check_root(root: Path | str) -> Path:
    path = Path(os.path.abspath(root))
    if not path.exists():
        raise ScanError(f"scan root does not exist: {path}")
    if not path.is_dir():
        raise ScanError(f"scan root is not a directory: {path}")
    return path


def drive_info(root: Path | str) -> DriveInfo:
    """Report capacity of the volume holding root.

    Args:
        root: Any path on the volume.

    Returns:
        DriveInfo with used, free and total bytes.

    Raises:
        ScanError: Path is not on a mounted volume.
    """
    path = Path(os.path.abspath(root))
    try:
        usage = shutil.disk_usage(path)
    except OSError as e:
        raise ScanError(f"cannot read volume statistics for {path}: {e}") from e
    return DriveInfo(
        root=path, used_bytes=usage.used, free_bytes=usage.free, total_bytes=usage.total
    )


def attach_origin(records: list[FileRecord], fixture_mode: bool = False) -> list[FileRecord]:
    """Populate each record's origin from its metadata channel.

    Args:
        records: Records produced by walk_largest.
        fixture_mode: Read ``.zoneid`` sidecars instead of platform metadata.

    Returns:
        New records in the same order.
    """
    return [record.with_origin(read_origin(record.path, fixture_mode)) for record in records]


class ScanService:
    """Largest-file scanner bound to scan settings."""

    def __init__(self, config: ScanConfig):
        """Initialize scanner.

        Args:
            config: Scan settings (default N, fixture mode).
        """
        self.config = config

    @property
    def excluded_suffixes(self) -> tuple[str, ...]:
        suffixes = (MARKER_SUFFIX, PARTIAL_SUFFIX)
        if self.config.fixture_mode:
            suffixes += (SIDECAR_SUFFIX,)
        return suffixes

    def scan(self, root: Path | str, n: int | None = None, with_drive: bool = True) -> ScanResult:
        """Find the n largest readable files under root.

        Sizes are sorted descending with ties broken by ascending path byte
        order. Unreadable entries are skipped and counted.

        Args:
            root: Directory to scan.
            n: Number of files to keep, defaults to the configured top_n.
            with_drive: Also report the volume's capacity.

        Returns:
            ScanResult with records (origin not yet attached).

        Raises:
            ScanError: Root missing, not a directory or unreadable.
            ValueError: n < 1.
        """
        n = self.config.top_n if n is None else n
        if n < 1:
            raise ValueError("n must be at least 1")
        root_path = _check_root(root)

        walk = _Walk(root_path, self.excluded_suffixes)
        largest = heapq.nsmallest(n, walk.entries())
        records = [
            FileRecord(
                path=Path(path),
                size_bytes=-neg_size,
                modified_at=datetime.fromtimestamp(mtime, tz=UTC),
            )
            for neg_size, _, path, mtime in largest
        ]
        logger.info(
            f"Scanned {root_path}: kept {len(records)} files, skipped {walk.skipped_count}"
        )
        return ScanResult(
            root=root_path,
            records=records,
            skipped_count=walk.skipped_count,
            skipped=walk.skipped,
            drive=drive_info(root_path) if with_drive else None,
        )

    def walk_largest(self, root: Path | str, n: int | None = None) -> list[FileRecord]:
        """Ordered list of the n largest files under root."""
        return self.scan(root, n, with_drive=False).records

    def attach_origin(self, records: list[FileRecord]) -> list[FileRecord]:
        return attach_origin(records, self.config.fixture_mode)

    def scan_with_origin(self, root: Path | str, n: int | None = None) -> ScanResult:
        """Scan and attach provenance to the kept records."""
        result = self.scan(root, n)
        return result.model_copy(update={"records": self.attach_origin(result.records)})


def walk_largest(root: Path | str, n: int = DEFAULT_TOP_N) -> list[FileRecord]:
    """Convenience function: n largest files under root."""
    return ScanService(ScanConfig(top_n=n)).walk_largest(root, n)
