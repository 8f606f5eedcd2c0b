"""Purge engine.

Runs the three stages of a purged file's life:

* creation: plan_purge finds the largest files whose exact bytes are still
  served on the web, execute_purge replaces approved ones with encrypted
  recipes;
* maintenance: maintain re-checks stored recipes and marks dead sources
  stale;
* reconstitution: reconstitute downloads a file again and only writes it
  once its hash matches the recipe.

No original is deleted before its recipe is in the store, and no recipe is
created for bytes that were not verified against the live file.
"""

import asyncio
import logging
import os
import shutil
import tempfile
from collections.abc import Mapping
from datetime import datetime

try:
    from datetime import UTC
except ImportError:  # Python < 3.11
    from datetime import timezone

    UTC = timezone.utc
from pathlib import Path

from ..config import Config
from ..core.exceptions import (
    DestinationExistsError,
    IntegrityError,
    SourceUnavailableError,
    WebpurgeError,
)
from ..models import (
    Availability,
    AvailabilityOutcome,
    Decision,
    EncryptedRecipe,
    FileHashes,
    FileRecord,
    MaintenanceItem,
    MaintenanceReport,
    PurgeCandidate,
    PurgeItemResult,
    PurgeItemStatus,
    PurgePlan,
    PurgeResult,
    Recipe,
    RecipeStatus,
    RestoreResult,
)
from ..webcheck.availability import LINKS_NOT_RECORDED, WebChecker
from ..webcheck.fetcher import Fetcher
from .origin_meta import classify_source
from .recipe import create_recipe, hash_file, hash_file_async, new_hasher, serialize_recipe
from .recipe_crypto import decrypt_recipe, encrypt_recipe
from .scanner import MARKER_SUFFIX, PARTIAL_SUFFIX, TRASH_DIR_NAME, ScanService
from .store import RecipeStore, entry_for

logger = logging.getLogger(__name__)

CHANGED_SINCE_PLAN = "changed since plan"


def marker_path(original_path: Path | str) -> Path:
    """Plaintext marker left at a purged file's location."""
    path = Path(original_path)
    return path.with_name(path.name + MARKER_SUFFIX)


def marker_text(recipe_id: str, store_dir: Path) -> str:
    """Marker content: the recipe id and the store path, one line each."""
    return f"{recipe_id}\n{store_dir}\n"


def read_marker(path: Path | str) -> tuple[str, Path]:
    """Parse a marker file into (recipe_id, store_dir).

    Raises:
        ValueError: The marker does not hold two lines.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if len(lines) < 2 or not lines[0].strip():
        raise ValueError(f"malformed recipe marker: {path}")
    return lines[0].strip(), Path(lines[1].strip())


def outcome_reason(outcome: AvailabilityOutcome) -> str:
    """One-line explanation of an availability outcome."""
    if outcome.reason:
        return outcome.reason
    parts = [
        f"{label}: {result.reason}"
        for label, result in (("HU", outcome.via_hu), ("RU", outcome.via_ru))
        if result is not None
    ]
    return "; ".join(parts)


def _placeholder_hashes(algo: str, partial_len: int) -> FileHashes:
    digest = "0" * (new_hasher(algo).digest_size * 2)
    return FileHashes(
        hash_full=digest,
        partial_hash=digest if partial_len > 0 else None,
        hash_algo=algo,
        partial_len=partial_len,
    )


class PurgeEngine:
    """Orchestrates purge planning, execution, maintenance and restore."""

    def __init__(self, config: Config, scanner: ScanService, checker: WebChecker):
        """Initialize engine.

        Args:
            config: Application configuration.
            scanner: Largest-file scanner.
            checker: Web availability checker.
        """
        self.config = config
        self.scanner = scanner
        self.checker = checker

    def recipe_footprint(self, recipe: Recipe) -> int:
        """Bytes a purged file still occupies: its encrypted blob and marker."""
        blob = (
            len(EncryptedRecipe.MAGIC)
            + EncryptedRecipe.SALT_LEN
            + EncryptedRecipe.NONCE_LEN
            + len(serialize_recipe(recipe).encode("utf-8"))
            + EncryptedRecipe.TAG_LEN
        )
        marker = marker_text(recipe.recipe_id, self.config.purge.store_dir)
        return blob + len(marker.encode("utf-8"))

    def projected_saving(self, record: FileRecord, now: datetime) -> int:
        """size_bytes minus the footprint of the recipe the file would get."""
        placeholder = create_recipe(
            record,
            now,
            _placeholder_hashes(self.config.purge.hash_algo, self.config.purge.partial_len),
        )
        return record.size_bytes - self.recipe_footprint(placeholder)

    async def _assess(
        self, record: FileRecord, fetcher: Fetcher, now: datetime
    ) -> PurgeCandidate | None:
        category = classify_source(record.origin, record.extension, self.config.categories)
        saving = self.projected_saving(record, now)
        if record.origin is None or not record.origin.has_urls:
            return PurgeCandidate(
                record=record,
                category=category,
                outcome=AvailabilityOutcome.combine(None, None, reason=LINKS_NOT_RECORDED),
                projected_saving_bytes=saving,
            )
        try:
            hashes = await hash_file_async(
                record.path, self.config.purge.hash_algo, self.config.purge.partial_len
            )
        except OSError as e:
            logger.warning(f"Cannot hash {record.path}: {e}")
            return None
        recipe = create_recipe(record, now, hashes)
        outcome = await self.checker.check_availability(recipe, fetcher)
        logger.info(f"{record.path}: {category.value}, {outcome.best.value}")
        return PurgeCandidate(
            record=record,
            recipe=recipe,
            category=category,
            outcome=outcome,
            projected_saving_bytes=record.size_bytes - self.recipe_footprint(recipe),
        )

    async def plan_purge(
        self,
        root: Path | str,
        fetcher: Fetcher,
        target_free_bytes: int | None = None,
        n: int | None = None,
        now: datetime | None = None,
    ) -> PurgePlan:
        """Find purge candidates among the n largest files under root.

        Files are examined largest first, in batches of the configured
        concurrency. Candidates are files some channel can serve again, plus
        files without recorded links (listed, never eligible). Planning stops
        once the projected savings of PublicRd candidates reach
        target_free_bytes.

        Args:
            root: Directory to scan.
            fetcher: Fetcher for availability checks.
            target_free_bytes: Bytes to free, None to examine all n files.
            n: Number of largest files, defaults to the configured top_n.
            now: Recipe creation time, defaults to the current time.

        Returns:
            PurgePlan with candidates in largest-first order.

        Raises:
            ScanError: Root missing or unreadable.
        """
        now = now or datetime.now(UTC)
        scan = await asyncio.to_thread(self.scanner.scan_with_origin, root, n)
        plan = PurgePlan(
            root=scan.root, target_free_bytes=target_free_bytes, skipped_count=scan.skipped_count
        )
        public_total = 0
        batch_size = self.config.web.concurrency
        records = scan.records

        for start in range(0, len(records), batch_size):
            batch = records[start : start + batch_size]
            assessed = await asyncio.gather(*(self._assess(r, fetcher, now) for r in batch))
            for candidate in assessed:
                plan.examined += 1
                if candidate is None:
                    continue
                has_source = candidate.outcome.best is not Availability.NOT_RD
                if candidate.recipe is not None and not has_source:
                    continue
                plan.candidates.append(candidate)
                if candidate.outcome.best is Availability.PUBLIC_RD and candidate.is_eligible():
                    public_total += candidate.projected_saving_bytes
                if target_free_bytes is not None and public_total >= target_free_bytes:
                    plan.target_met = True
                    break
            if plan.target_met:
                break

        logger.info(
            f"Planned purge of {plan.root}: {len(plan.candidates)} candidates from "
            f"{plan.examined} files, {public_total} bytes publicly redownloadable"
        )
        return plan

    @staticmethod
    def auto_approvals(plan: PurgePlan) -> dict[Path, Decision]:
        """Approve every eligible PublicRd candidate and nothing else."""
        return {
            c.record.path: Decision.APPROVE
            for c in plan.candidates
            if c.outcome.best is Availability.PUBLIC_RD and c.is_eligible()
        }

    def _trash_target(self, root: Path, path: Path) -> Path:
        try:
            relative = path.relative_to(root)
        except ValueError:
            relative = Path(path.name)
        return root / TRASH_DIR_NAME / relative

    async def _purge_one(
        self,
        candidate: PurgeCandidate,
        root: Path,
        store: RecipeStore,
        passphrase: str,
        trash: bool,
    ) -> PurgeItemResult:
        recipe = candidate.recipe
        assert recipe is not None
        path = candidate.record.path

        try:
            hashes = await hash_file_async(path, recipe.hash_algo, recipe.partial_len)
        except FileNotFoundError:
            return PurgeItemResult(
                path=path, status=PurgeItemStatus.SKIPPED, reason=f"{CHANGED_SINCE_PLAN} (missing)"
            )
        if hashes.hash_full != recipe.hash_full:
            return PurgeItemResult(
                path=path, status=PurgeItemStatus.SKIPPED, reason=CHANGED_SINCE_PLAN
            )

        existing = next((e for e in store.list() if e.recipe_id == recipe.recipe_id), None)
        if (
            existing is not None
            and existing.status is not RecipeStatus.RESTORED
            and existing.original_path != recipe.original_path
        ):
            # Ids are content-derived: storing this one would replace the
            # recipe of a file that is already purged.
            return PurgeItemResult(
                path=path,
                status=PurgeItemStatus.SKIPPED,
                reason=f"duplicate of recipe {recipe.recipe_id}",
            )

        encrypted = await asyncio.to_thread(encrypt_recipe, recipe, passphrase)
        already_stored = existing is not None
        recipe_id = store.put(encrypted.to_bytes(), entry_for(recipe))

        marker = marker_path(path)
        try:
            marker.write_text(marker_text(recipe_id, store.store_dir), encoding="utf-8")
            if trash:
                target = self._trash_target(root, path)
                target.parent.mkdir(parents=True, exist_ok=True)
                shutil.move(path, target)
                status = PurgeItemStatus.TRASHED
            else:
                os.unlink(path)
                status = PurgeItemStatus.PURGED
        except OSError:
            if path.exists():
                marker.unlink(missing_ok=True)
                if not already_stored:
                    try:
                        store.remove(recipe_id)
                    except WebpurgeError as cleanup_error:
                        logger.warning(f"Could not roll back recipe {recipe_id}: {cleanup_error}")
            raise

        logger.info(f"{status.value.capitalize()} {path} (recipe {recipe_id})")
        return PurgeItemResult(
            path=path,
            status=status,
            recipe_id=recipe_id,
            bytes_removed=candidate.record.size_bytes,
            bytes_freed=candidate.projected_saving_bytes,
        )

    async def execute_purge(
        self,
        plan: PurgePlan,
        approvals: Mapping[Path, Decision],
        store: RecipeStore,
        passphrase: str,
        allow_auth: bool | None = None,
        trash: bool | None = None,
    ) -> PurgeResult:
        """Replace approved candidates with encrypted recipes.

        Per candidate: re-hash the live file, encrypt and store the recipe,
        write the marker, then delete the file (or move it to the trash
        directory). A failing step leaves the file in place and only affects
        that candidate.

        Args:
            plan: Plan from plan_purge.
            approvals: Decision per candidate path; missing means deny.
            store: Open recipe store.
            passphrase: Recipe encryption passphrase.
            allow_auth: Permit RdWithAuth candidates, defaults to config.
            trash: Move instead of delete, defaults to config.

        Returns:
            PurgeResult with one item per candidate.
        """
        allow_auth = self.config.purge.allow_auth if allow_auth is None else allow_auth
        trash = self.config.purge.trash if trash is None else trash
        result = PurgeResult(target_free_bytes=plan.target_free_bytes)

        for candidate in plan.candidates:
            path = candidate.record.path
            if approvals.get(path, Decision.DENY) is not Decision.APPROVE:
                result.items.append(
                    PurgeItemResult(
                        path=path, status=PurgeItemStatus.SKIPPED, reason="not approved"
                    )
                )
                continue
            if not candidate.is_eligible(allow_auth):
                result.items.append(
                    PurgeItemResult(
                        path=path,
                        status=PurgeItemStatus.SKIPPED,
                        reason=_ineligible_reason(candidate),
                    )
                )
                continue
            try:
                item = await self._purge_one(candidate, plan.root, store, passphrase, trash)
            except (WebpurgeError, OSError) as e:
                logger.error(f"Failed to purge {path}: {e}")
                item = PurgeItemResult(path=path, status=PurgeItemStatus.FAILED, reason=str(e))
            result.items.append(item)
            result.bytes_removed += item.bytes_removed
            result.bytes_freed += item.bytes_freed
        return result

    def load_recipe(self, store: RecipeStore, recipe_id: str, passphrase: str) -> Recipe:
        """Decrypt one stored recipe."""
        return decrypt_recipe(store.get(recipe_id), passphrase)

    async def maintain(
        self,
        store: RecipeStore,
        fetcher: Fetcher,
        passphrase: str,
        now: datetime | None = None,
    ) -> MaintenanceReport:
        """Check every active or stale recipe for currency.

        A recipe is current when its file is PublicRd, or RdWithAuth while
        presume_auth is on; current recipes are re-sealed with
        last_maintained_at = now. Others become stale with the reason.

        Args:
            store: Open recipe store.
            fetcher: Fetcher for availability checks.
            passphrase: Recipe passphrase.
            now: Maintenance time, defaults to the current time.

        Returns:
            MaintenanceReport with one item per checked recipe.

        Raises:
            RecipeAuthError: A recipe cannot be decrypted.
            StoreError: Store unreadable.
        """
        now = now or datetime.now(UTC)
        report = MaintenanceReport(checked_at=now)
        for entry in store.list():
            if entry.status is RecipeStatus.RESTORED:
                continue
            recipe = self.load_recipe(store, entry.recipe_id, passphrase)
            outcome = await self.checker.check_availability(recipe, fetcher)
            current = outcome.best is Availability.PUBLIC_RD or (
                outcome.best is Availability.RD_WITH_AUTH and self.config.web.presume_auth
            )
            if current:
                refreshed = recipe.model_copy(update={"last_maintained_at": now})
                encrypted = await asyncio.to_thread(encrypt_recipe, refreshed, passphrase)
                store.put(encrypted.to_bytes(), entry_for(refreshed, RecipeStatus.ACTIVE))
                status = RecipeStatus.ACTIVE
                reason = ""
            else:
                store.update_status(entry.recipe_id, RecipeStatus.STALE)
                status = RecipeStatus.STALE
                reason = outcome_reason(outcome)
                logger.warning(f"Recipe {entry.recipe_id} ({entry.file_name}) is stale: {reason}")
            report.items.append(
                MaintenanceItem(
                    recipe_id=entry.recipe_id,
                    file_name=entry.file_name,
                    status=status,
                    best=outcome.best,
                    reason=reason,
                )
            )
        return report

    async def reconstitute(
        self,
        recipe_id: str,
        store: RecipeStore,
        fetcher: Fetcher,
        passphrase: str,
        dest: Path | str | None = None,
        force: bool = False,
    ) -> RestoreResult:
        """Download a purged file again and write it only if its hash matches.

        Bytes stream into a temporary file beside the destination while they
        are hashed; the file is renamed into place after verification, the
        marker is removed and the recipe marked restored.

        Args:
            recipe_id: Stored recipe id.
            store: Open recipe store.
            fetcher: Fetcher to download with.
            passphrase: Recipe passphrase.
            dest: Output path or directory, defaults to the original path.
            force: Overwrite an existing destination file.

        Returns:
            RestoreResult naming the written file and the URL used.

        Raises:
            RecipeNotFoundError: Unknown recipe id.
            RecipeAuthError: Wrong passphrase or tampered recipe.
            DestinationExistsError: Destination occupied and force not set.
            SourceUnavailableError: No channel serves the file publicly.
            IntegrityError: Downloaded bytes differ from the recipe.
        """
        recipe = self.load_recipe(store, recipe_id, passphrase)
        target = Path(dest) if dest is not None else Path(recipe.original_path)
        if target.is_dir():
            target = target / recipe.file_name
        if target.exists() and not force:
            raise DestinationExistsError(f"{target} already exists")
        target.parent.mkdir(parents=True, exist_ok=True)

        with tempfile.NamedTemporaryFile(
            dir=target.parent, prefix=f".{recipe.file_name}.", suffix=PARTIAL_SUFFIX, delete=False
        ) as sink:
            temp_path = Path(sink.name)
            try:
                outcome = await self.checker.check_availability(recipe, fetcher, sink=sink)
            except BaseException:
                sink.close()
                temp_path.unlink(missing_ok=True)
                raise

        try:
            winner = outcome.winning
            if outcome.best is not Availability.PUBLIC_RD or winner is None:
                reasons = [r.reason for r in (outcome.via_hu, outcome.via_ru) if r is not None]
                message = f"cannot restore {recipe.file_name}: {outcome_reason(outcome)}"
                if any(r.startswith("content mismatch") for r in reasons):
                    raise IntegrityError(message)
                raise SourceUnavailableError(message)
            restored = await asyncio.to_thread(hash_file, temp_path, recipe.hash_algo, 0)
            if restored.hash_full != recipe.hash_full:
                raise IntegrityError(f"downloaded bytes of {recipe.file_name} do not match")
            os.replace(temp_path, target)
        finally:
            temp_path.unlink(missing_ok=True)

        marker_path(recipe.original_path).unlink(missing_ok=True)
        store.update_status(recipe_id, RecipeStatus.RESTORED)
        logger.info(f"Restored {target} from {winner.url_used}")
        return RestoreResult(
            recipe_id=recipe_id,
            output_path=target,
            size_bytes=recipe.size_bytes,
            url_used=winner.url_used,
            mode=winner.mode,
        )


def _ineligible_reason(candidate: PurgeCandidate) -> str:
    if candidate.recipe is None:
        return LINKS_NOT_RECORDED
    if candidate.projected_saving_bytes <= 0:
        return "recipe larger than file"
    if candidate.outcome.best is Availability.RD_WITH_AUTH:
        return "only redownloadable with sign-in (needs --allow-auth)"
    return "not redownloadable"
