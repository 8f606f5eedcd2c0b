"""Unit tests for the largest-file scanner."""

import os
import random

import pytest

from app.config import ScanConfig
from app.core.exceptions import ScanError
from app.services.origin_meta import sidecar_path
from app.services.scanner import ScanService, walk_largest


def _brute_force_largest(root, n):
    """Enumerate every regular file and sort by size desc, then path bytes."""
    found = []
    for directory, _, names in os.walk(root):
        for name in names:
            path = os.path.join(directory, name)
            if os.path.islink(path):
                continue
            found.append((-os.path.getsize(path), os.fsencode(path), path))
    return [(path, -neg) for neg, _, path in sorted(found)[:n]]


def _random_tree(root, rng, file_count):
    directories = [root]
    for i in range(rng.randint(1, 12)):
        child = rng.choice(directories) / f"dir_{i}"
        child.mkdir()
        directories.append(child)
    for i in range(file_count):
        # narrow size range to force ties
        size = rng.randint(0, 64)
        (rng.choice(directories) / f"f{rng.randint(0, 9)}_{i}.bin").write_bytes(b"x" * size)


class TestWalkLargest:
    """Test ordering, bounds and exclusions of walk_largest."""

    def test_keeps_25_largest_of_30(self, tmp_path):
        for size in range(1, 31):
            (tmp_path / f"file_{size:02d}.bin").write_bytes(b"a" * size)

        records = walk_largest(tmp_path, 25)

        assert [r.size_bytes for r in records] == list(range(30, 5, -1))

    def test_fewer_files_than_n(self, tmp_path):
        (tmp_path / "a.bin").write_bytes(b"aa")
        (tmp_path / "b.bin").write_bytes(b"a")

        records = walk_largest(tmp_path, 25)

        assert [r.name for r in records] == ["a.bin", "b.bin"]

    def test_ties_break_by_path_bytes(self, tmp_path):
        for name in ("c.bin", "a.bin", "B.bin"):
            (tmp_path / name).write_bytes(b"same")

        records = walk_largest(tmp_path, 3)

        assert [r.name for r in records] == ["B.bin", "a.bin", "c.bin"]

    @pytest.mark.parametrize("seed", range(50))
    def test_matches_brute_force_oracle(self, tmp_path, seed):
        rng = random.Random(seed)
        _random_tree(tmp_path, rng, rng.randint(0, 300))
        n = rng.randint(1, 40)

        records = walk_largest(tmp_path, n)

        assert [(str(r.path), r.size_bytes) for r in records] == _brute_force_largest(
            tmp_path, n
        )

    def test_symlinks_are_not_followed(self, tmp_path):
        outside = tmp_path / "outside"
        outside.mkdir()
        (outside / "huge.bin").write_bytes(b"x" * 1000)
        root = tmp_path / "root"
        root.mkdir()
        (root / "small.bin").write_bytes(b"x")
        (root / "link.bin").symlink_to(outside / "huge.bin")
        (root / "linked_dir").symlink_to(outside, target_is_directory=True)

        records = walk_largest(root, 10)

        assert [r.name for r in records] == ["small.bin"]

    def test_markers_and_trash_are_excluded(self, tmp_path):
        (tmp_path / "kept.bin").write_bytes(b"x" * 10)
        (tmp_path / "gone.iso.wrcp-ref").write_text("abc\n/store\n")
        trash = tmp_path / ".webpurge-trash"
        trash.mkdir()
        (trash / "old.iso").write_bytes(b"x" * 100)

        records = walk_largest(tmp_path, 10)

        assert [r.name for r in records] == ["kept.bin"]

    def test_n_must_be_positive(self, tmp_path):
        with pytest.raises(ValueError):
            walk_largest(tmp_path, 0)

    def test_missing_root(self, tmp_path):
        with pytest.raises(ScanError, match="does not exist"):
            walk_largest(tmp_path / "missing", 5)

    def test_root_is_a_file(self, tmp_path):
        target = tmp_path / "file.bin"
        target.write_bytes(b"x")

        with pytest.raises(ScanError, match="not a directory"):
            walk_largest(target, 5)

    @pytest.mark.skipif(
        not hasattr(os, "geteuid") or os.geteuid() == 0, reason="root can read everything"
    )
    def test_unreadable_file_is_skipped_and_counted(self, tmp_path):
        (tmp_path / "ok.bin").write_bytes(b"x" * 5)
        locked = tmp_path / "locked.bin"
        locked.write_bytes(b"x" * 50)
        locked.chmod(0)
        try:
            result = ScanService(ScanConfig()).scan(tmp_path, 10)
        finally:
            locked.chmod(0o644)

        assert [r.name for r in result.records] == ["ok.bin"]
        assert result.skipped_count == 1
        assert result.skipped[0].skipped_reason == "permission denied"


class TestScanService:
    """Test scans with provenance and drive information."""

    def test_fixture_mode_attaches_sidecar_origin_and_hides_sidecars(self, tmp_path):
        video = tmp_path / "talk.mp4"
        video.write_bytes(b"v" * 100)
        sidecar_path(video).write_text(
            "[ZoneTransfer]\nZoneId=3\nHostUrl=https://cdn.example.net/talk.mp4\n" + "#" * 200
        )
        (tmp_path / "notes.txt").write_bytes(b"n" * 10)
        service = ScanService(ScanConfig(fixture_mode=True))

        result = service.scan_with_origin(tmp_path, 5)

        assert [r.name for r in result.records] == ["talk.mp4", "notes.txt"]
        assert result.records[0].origin is not None
        assert result.records[0].origin.host_url == "https://cdn.example.net/talk.mp4"
        assert result.records[1].origin is None

    def test_default_n_comes_from_config(self, tmp_path):
        for i in range(5):
            (tmp_path / f"{i}.bin").write_bytes(b"x" * (i + 1))

        records = ScanService(ScanConfig(top_n=2)).walk_largest(tmp_path)

        assert [r.size_bytes for r in records] == [5, 4]

    def test_drive_info_is_reported(self, tmp_path):
        result = ScanService(ScanConfig()).scan(tmp_path, 1)

        assert result.drive is not None
        assert result.drive.total_bytes > 0
        assert result.drive.free_bytes <= result.drive.total_bytes
