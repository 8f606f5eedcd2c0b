"""Recipes: hashing, creation and canonical serialization.

A recipe is the small replacement artifact left for a purged file. This
module hashes file content (streamed, bounded memory), builds recipes from
scanned records, serializes them as canonical sorted-key JSON, and verifies
downloaded bytes against a recipe while they stream in.
"""

import asyncio
import hashlib
import json
import logging
from datetime import datetime
from pathlib import Path

from pydantic import ValidationError

from ..core.exceptions import RecipeFormatError, UnsupportedHashError
from ..models import FileHashes, FileRecord, Recipe

logger = logging.getLogger(__name__)

SUPPORTED_ALGORITHMS = ("sha256", "sha512", "sha1", "blake2b", "sha3_256")
DEFAULT_ALGORITHM = "sha256"
DEFAULT_PARTIAL_LEN = 1_048_576
READ_CHUNK_SIZE = 1_048_576


def new_hasher(algo: str) -> "hashlib._Hash":
    """Create a hash object for a supported algorithm.

    Raises:
        UnsupportedHashError: Algorithm not in SUPPORTED_ALGORITHMS.
    """
    if algo not in SUPPORTED_ALGORITHMS:
        raise UnsupportedHashError(f"unsupported hash algorithm: {algo}")
    return hashlib.new(algo)


def hash_file(
    path: Path | str, algo: str = DEFAULT_ALGORITHM, partial_len: int = DEFAULT_PARTIAL_LEN
) -> FileHashes:
    """Hash a file's full content and its leading partial_len bytes.

    Args:
        path: File to hash.
        algo: Digest algorithm.
        partial_len: Prefix length for the partial hash; 0 disables it.

    Returns:
        FileHashes; partial_hash covers min(partial_len, size) bytes.

    Raises:
        UnsupportedHashError: Unknown algorithm.
        OSError: File unreadable.
    """
    full = new_hasher(algo)
    partial = new_hasher(algo) if partial_len > 0 else None
    remaining = partial_len
    with open(path, "rb") as f:
        while chunk := f.read(READ_CHUNK_SIZE):
            full.update(chunk)
            if partial is not None and remaining > 0:
                partial.update(chunk[:remaining])
                remaining -= min(remaining, len(chunk))
    return FileHashes(
        hash_full=full.hexdigest(),
        partial_hash=partial.hexdigest() if partial is not None else None,
        hash_algo=algo,
        partial_len=partial_len,
    )


async def hash_file_async(
    path: Path | str, algo: str = DEFAULT_ALGORITHM, partial_len: int = DEFAULT_PARTIAL_LEN
) -> FileHashes:
    """hash_file in a worker thread."""
    return await asyncio.to_thread(hash_file, path, algo, partial_len)


def create_recipe(record: FileRecord, now: datetime, hashes: FileHashes) -> Recipe:
    """Build a recipe for a scanned file.

    Args:
        record: Scanned file with origin attached.
        now: Creation timestamp; also the first maintenance timestamp.
        hashes: Digests computed from the live file.

    Returns:
        Recipe with RU/HU copied verbatim from the record's origin.
    """
    origin = record.origin
    return Recipe(
        created_at=now,
        last_maintained_at=now,
        referrer_url=origin.referrer_url if origin else None,
        host_url=origin.host_url if origin else None,
        original_path=str(record.path),
        file_name=record.path.name,
        size_bytes=record.size_bytes,
        hash_full=hashes.hash_full,
        hash_algo=hashes.hash_algo,
        partial_hash=hashes.partial_hash,
        partial_len=hashes.partial_len,
    )


def serialize_recipe(recipe: Recipe) -> str:
    """Canonical JSON: every recipe field, sorted keys, compact separators."""
    return json.dumps(
        recipe.model_dump(mode="json"), sort_keys=True, ensure_ascii=False, separators=(",", ":")
    )


def deserialize_recipe(text: str | bytes) -> Recipe:
    """Parse recipe JSON.

    Unknown fields are dropped with a warning.

    Args:
        text: Recipe JSON.

    Returns:
        The recipe.

    Raises:
        RecipeFormatError: Invalid JSON, or a field is missing or has the
            wrong type (the error names the field).
    """
    try:
        data = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise RecipeFormatError(f"invalid recipe JSON: {e}") from e
    if not isinstance(data, dict):
        raise RecipeFormatError("recipe must be a JSON object")

    unknown = sorted(set(data) - set(Recipe.model_fields))
    if unknown:
        logger.warning(f"Ignoring unknown recipe fields: {', '.join(unknown)}")
        data = {k: v for k, v in data.items() if k not in unknown}

    try:
        return Recipe.model_validate_json(json.dumps(data), strict=True)
    except ValidationError as e:
        error = e.errors()[0]
        field = str(error["loc"][0]) if error["loc"] else None
        label = field or "recipe"
        raise RecipeFormatError(f"{label}: {error['msg']}", field=field) from e


class ContentVerifier:
    """Incremental check of streamed bytes against a recipe.

    Feeds a full-content hasher and, when the recipe has a partial hash, a
    prefix hasher. ``update`` returns False as soon as the outcome is known
    to be a mismatch: the prefix digest differs, or more bytes arrived than
    the original file had.
    """

    def __init__(self, recipe: Recipe):
        self.recipe = recipe
        self.bytes_seen = 0
        self.mismatch_reason: str | None = None
        self._full = new_hasher(recipe.hash_algo)
        self._prefix_target = 0
        self._prefix = None
        if recipe.partial_hash is not None and recipe.partial_len > 0:
            self._prefix_target = min(recipe.partial_len, recipe.size_bytes)
            self._prefix = new_hasher(recipe.hash_algo)

    def update(self, chunk: bytes) -> bool:
        """Feed a chunk.

        Returns:
            False once the content can no longer match.
        """
        if self.mismatch_reason is not None:
            return False
        self._full.update(chunk)
        if self._prefix is not None:
            wanted = self._prefix_target - self.bytes_seen
            if wanted > 0:
                self._prefix.update(chunk[:wanted])
            if self.bytes_seen < self._prefix_target <= self.bytes_seen + len(chunk):
                if self._prefix.hexdigest() != self.recipe.partial_hash:
                    self.mismatch_reason = "content mismatch (fail-fast)"
        self.bytes_seen += len(chunk)
        if self.mismatch_reason is None and self.bytes_seen > self.recipe.size_bytes:
            self.mismatch_reason = "content mismatch (longer than original)"
        return self.mismatch_reason is None

    def matches(self) -> bool:
        """Whether the complete stream equals the recipe's content."""
        return self.mismatch_reason is None and self._full.hexdigest() == self.recipe.hash_full
