"""Data models for webpurge.

Defines Pydantic models for every data structure passed between modules:
scanned file records and their download provenance, recipes and their
encrypted form, web availability outcomes, store index entries, purge plans
and results, and the study-style report tables.
"""

import hashlib
import re
from datetime import datetime

try:
    from datetime import UTC
except ImportError:  # Python < 3.11
    from datetime import timezone

    UTC = timezone.utc
from enum import Enum
from pathlib import Path, PurePosixPath, PureWindowsPath
from typing import Annotated, ClassVar

from pydantic import AfterValidator, BaseModel, ConfigDict, Field, field_validator, model_validator

from .core.exceptions import RecipeFormatError

_WINDOWS_PATH_RE = re.compile(r"^(?:[A-Za-z]:[\\/]|\\\\)")
_HEX_RE = re.compile(r"^[0-9a-f]+$")


def final_segment(path_text: str) -> str:
    """Return the final segment of a POSIX or Windows path.

    Args:
        path_text: Path as text, possibly recorded on another platform.

    Returns:
        Last path component, including its extension.
    """
    if _WINDOWS_PATH_RE.match(path_text) or "\\" in path_text:
        return PureWindowsPath(path_text).name
    return PurePosixPath(path_text).name


def is_absolute_path(path_text: str) -> bool:
    """Check whether path text is absolute on either POSIX or Windows."""
    return PurePosixPath(path_text).is_absolute() or PureWindowsPath(path_text).is_absolute()


def extension_of(name: str) -> str:
    """Lower-cased extension of a file name including the dot, or ''."""
    return PurePosixPath(name).suffix.lower()


def _as_utc(value: datetime) -> datetime:
    if value.tzinfo is None:
        return value.replace(tzinfo=UTC)
    return value.astimezone(UTC)


UtcDatetime = Annotated[datetime, AfterValidator(_as_utc)]


class OriginChannel(str, Enum):
    """Metadata channel the provenance was read from."""

    ADS = "ads"
    XATTR = "xattr"
    SIDECAR = "sidecar"


class Channel(str, Enum):
    """Recorded URL role: referrer page or host (resource) URL."""

    RU = "RU"
    HU = "HU"


class SourceCategory(str, Enum):
    """Where a downloaded file came from, as grouped in the study tables."""

    CLOUD_COLLABORATION = "CloudCollaboration"
    WEBMAIL = "Webmail"
    BIG_TECH_CSP = "BigTechCSP"
    SMALL_CSP = "SmallCSP"
    APPLICATIONS_TOOLS = "ApplicationsTools"
    LOCAL_ACCESS = "LocalAccess"
    DIRECT_LINK = "DirectLink"
    LINKS_NOT_RECORDED = "LinksNotRecorded"


class Availability(str, Enum):
    """Redownloadability classification of a file or channel."""

    NOT_RD = "NotRedownloadable"
    PUBLIC_RD = "PublicRd"
    RD_WITH_AUTH = "RdWithAuth"


class CheckMode(str, Enum):
    """How a channel result was obtained."""

    DIRECT = "direct"
    INDIRECT = "indirect"
    PRESUMED = "presumed"


class RecipeStatus(str, Enum):
    """Lifecycle status of a stored recipe."""

    ACTIVE = "active"
    STALE = "stale"
    RESTORED = "restored"


class OriginMetadata(BaseModel):
    """Download provenance of a file (Zone.Identifier or xattr contents).

    URLs are kept verbatim as recorded by the downloading software.

    Attributes:
        zone_id: Security zone, 3 for the Internet zone.
        referrer_url: Page that referred the download (RU).
        host_url: URL of the downloaded resource itself (HU).
        channel: Metadata channel the values were read from.
    """

    model_config = ConfigDict(frozen=True)

    zone_id: int | None = None
    referrer_url: str | None = None
    host_url: str | None = None
    channel: OriginChannel = OriginChannel.ADS

    @model_validator(mode="after")
    def _require_some_field(self) -> "OriginMetadata":
        if self.zone_id is None and self.referrer_url is None and self.host_url is None:
            raise ValueError(
                "origin metadata needs at least one of zone_id, referrer_url, host_url"
            )
        return self

    @property
    def has_urls(self) -> bool:
        """Whether any URL (RU or HU) was recorded."""
        return self.referrer_url is not None or self.host_url is not None

    def url_for(self, channel: Channel) -> str | None:
        """Recorded URL for a channel."""
        return self.host_url if channel is Channel.HU else self.referrer_url

    def restricted_to(self, channel: Channel) -> "OriginMetadata | None":
        """Single-channel view of this origin.

        Args:
            channel: Channel to keep.

        Returns:
            Origin carrying only that channel's URL, or None when the channel
            has no recorded URL.
        """
        url = self.url_for(channel)
        if url is None:
            return None
        if channel is Channel.HU:
            return OriginMetadata(host_url=url, channel=self.channel)
        return OriginMetadata(referrer_url=url, channel=self.channel)


class FileRecord(BaseModel):
    """One scanned file.

    Attributes:
        path: Absolute filesystem path.
        size_bytes: File size in bytes.
        modified_at: Last modification time (UTC).
        origin: Download provenance, None when nothing was recorded.
        skipped_reason: Why the file was skipped; only set on skipped entries.
    """

    model_config = ConfigDict(frozen=True)

    path: Path
    size_bytes: int = Field(ge=0)
    modified_at: UtcDatetime
    origin: OriginMetadata | None = None
    skipped_reason: str | None = None

    @property
    def name(self) -> str:
        return self.path.name

    @property
    def extension(self) -> str:
        return extension_of(self.path.name)

    def with_origin(self, origin: OriginMetadata | None) -> "FileRecord":
        """Copy of this record with origin replaced."""
        return self.model_copy(update={"origin": origin})


class DriveInfo(BaseModel):
    """Capacity of the volume holding a scan root."""

    root: Path
    used_bytes: int = Field(ge=0)
    free_bytes: int = Field(ge=0)
    total_bytes: int = Field(ge=0)


class ScanResult(BaseModel):
    """Largest-file scan of one root.

    Attributes:
        root: Scanned directory.
        records: Largest files, size descending then path byte order.
        skipped_count: Files and directories skipped on errors.
        skipped: Skipped files that could be stat'ed, with skipped_reason.
        drive: Capacity of the root's volume.
    """

    root: Path
    records: list[FileRecord] = Field(default_factory=list)
    skipped_count: int = 0
    skipped: list[FileRecord] = Field(default_factory=list)
    drive: DriveInfo | None = None


class FileHashes(BaseModel):
    """Digests of a file's content."""

    hash_full: str
    partial_hash: str | None = None
    hash_algo: str = "sha256"
    partial_len: int = 1_048_576


class Recipe(BaseModel):
    """Small replacement artifact that allows a purged file to be restored.

    Attributes:
        created_at: When the recipe was created (UTC).
        last_maintained_at: When the source was last confirmed (UTC).
        referrer_url: Recorded referrer page (RU).
        host_url: Recorded resource URL (HU).
        original_path: Absolute path the file lived at.
        file_name: Final segment of original_path.
        size_bytes: Original size in bytes.
        hash_full: Lowercase hex digest of the whole content.
        hash_algo: Digest algorithm name.
        partial_hash: Digest of the first partial_len bytes.
        partial_len: Prefix length covered by partial_hash; 0 disables it.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    created_at: UtcDatetime
    last_maintained_at: UtcDatetime
    referrer_url: str | None = None
    host_url: str | None = None
    original_path: str
    file_name: str
    size_bytes: int = Field(ge=0)
    hash_full: str
    hash_algo: str = "sha256"
    partial_hash: str | None = None
    partial_len: int = Field(default=1_048_576, ge=0)

    @field_validator("original_path")
    @classmethod
    def _absolute(cls, value: str) -> str:
        if not is_absolute_path(value):
            raise ValueError("original_path must be absolute")
        return value

    @model_validator(mode="after")
    def _check_consistency(self) -> "Recipe":
        try:
            digest_len = hashlib.new(self.hash_algo).digest_size * 2
        except ValueError as e:
            raise ValueError(f"unsupported hash_algo {self.hash_algo!r}") from e
        for name, digest in (("hash_full", self.hash_full), ("partial_hash", self.partial_hash)):
            if digest is None:
                continue
            if len(digest) != digest_len or not _HEX_RE.match(digest):
                raise ValueError(f"{name} must be {digest_len} lowercase hex characters")
        if final_segment(self.original_path) != self.file_name:
            raise ValueError("file_name must equal the final segment of original_path")
        if 0 < self.partial_len <= self.size_bytes and self.partial_hash is None:
            raise ValueError("partial_hash required when partial hashing is enabled")
        return self

    @property
    def recipe_id(self) -> str:
        """Store identifier: the first 16 hex characters of hash_full."""
        return self.hash_full[:16]

    @property
    def extension(self) -> str:
        return extension_of(self.file_name)

    @property
    def origin(self) -> OriginMetadata | None:
        """Recorded URLs as origin metadata, None when neither was recorded."""
        if self.referrer_url is None and self.host_url is None:
            return None
        return OriginMetadata(referrer_url=self.referrer_url, host_url=self.host_url)


class EncryptedRecipe(BaseModel):
    """Authenticated-encrypted recipe blob: magic, salt, nonce, ciphertext+tag."""

    MAGIC: ClassVar[bytes] = b"WRCP1"
    SALT_LEN: ClassVar[int] = 16
    NONCE_LEN: ClassVar[int] = 12
    TAG_LEN: ClassVar[int] = 16

    magic: bytes = b"WRCP1"
    salt: bytes
    nonce: bytes
    ciphertext_and_tag: bytes

    def to_bytes(self) -> bytes:
        return self.magic + self.salt + self.nonce + self.ciphertext_and_tag

    @classmethod
    def from_bytes(cls, blob: bytes) -> "EncryptedRecipe":
        """Split a blob into its parts.

        Raises:
            RecipeFormatError: Blob is truncated or carries unknown magic.
        """
        header = len(cls.MAGIC) + cls.SALT_LEN + cls.NONCE_LEN
        if len(blob) < header + cls.TAG_LEN:
            raise RecipeFormatError(f"truncated recipe blob ({len(blob)} bytes)")
        if blob[: len(cls.MAGIC)] != cls.MAGIC:
            raise RecipeFormatError("not a WRCP1 recipe blob")
        salt_end = len(cls.MAGIC) + cls.SALT_LEN
        return cls(
            magic=blob[: len(cls.MAGIC)],
            salt=blob[len(cls.MAGIC) : salt_end],
            nonce=blob[salt_end:header],
            ciphertext_and_tag=blob[header:],
        )


class ChannelResult(BaseModel):
    """Availability of a file through one recorded URL."""

    status: Availability
    url_used: str
    mode: CheckMode
    reason: str


class AvailabilityOutcome(BaseModel):
    """Combined availability over the HU and RU channels.

    Attributes:
        via_hu: Result through the host URL, None when not evaluated.
        via_ru: Result through the referrer URL, None when not evaluated.
        best: Best status any channel achieved.
        reason: Explanation when no channel was evaluated.
    """

    via_hu: ChannelResult | None = None
    via_ru: ChannelResult | None = None
    best: Availability = Availability.NOT_RD
    reason: str | None = None

    @classmethod
    def combine(
        cls,
        via_hu: ChannelResult | None,
        via_ru: ChannelResult | None,
        reason: str | None = None,
    ) -> "AvailabilityOutcome":
        """Build an outcome whose best status follows from its channels."""
        statuses = {r.status for r in (via_hu, via_ru) if r is not None}
        if Availability.PUBLIC_RD in statuses:
            best = Availability.PUBLIC_RD
        elif Availability.RD_WITH_AUTH in statuses:
            best = Availability.RD_WITH_AUTH
        else:
            best = Availability.NOT_RD
        return cls(via_hu=via_hu, via_ru=via_ru, best=best, reason=reason)

    def for_channel(self, channel: Channel) -> ChannelResult | None:
        return self.via_hu if channel is Channel.HU else self.via_ru

    @property
    def winning(self) -> ChannelResult | None:
        """First channel result (HU before RU) that achieved the best status."""
        for result in (self.via_hu, self.via_ru):
            if result is not None and result.status is self.best:
                return result
        return None


class StoreIndexEntry(BaseModel):
    """Plaintext index entry describing one stored recipe blob."""

    recipe_id: str
    original_path: str
    file_name: str
    size_bytes: int = Field(ge=0)
    status: RecipeStatus = RecipeStatus.ACTIVE
    last_maintained_at: UtcDatetime


class RepairReport(BaseModel):
    """What reopening a store had to fix."""

    quarantined: list[str] = Field(default_factory=list)
    dropped_entries: list[str] = Field(default_factory=list)
    removed_temp_files: list[str] = Field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not (self.quarantined or self.dropped_entries or self.removed_temp_files)


class PurgeCandidate(BaseModel):
    """A large file considered for purging.

    Attributes:
        record: Scanned file.
        recipe: Recipe built from the live file; None when the file has no
            recorded provenance and was never hashed.
        category: Source category of the file's origin.
        outcome: Web availability of the file.
        projected_saving_bytes: size_bytes minus the on-disk recipe footprint.
    """

    record: FileRecord
    recipe: Recipe | None = None
    category: SourceCategory
    outcome: AvailabilityOutcome
    projected_saving_bytes: int

    def is_eligible(self, allow_auth: bool = False) -> bool:
        """Whether the candidate may be purged once approved."""
        if self.recipe is None or self.projected_saving_bytes <= 0:
            return False
        if self.outcome.best is Availability.PUBLIC_RD:
            return True
        return allow_auth and self.outcome.best is Availability.RD_WITH_AUTH


class PurgePlan(BaseModel):
    """Ordered candidates found by planning a purge."""

    root: Path
    target_free_bytes: int | None = None
    candidates: list[PurgeCandidate] = Field(default_factory=list)
    examined: int = 0
    skipped_count: int = 0
    target_met: bool = False

    @property
    def projected_public_savings(self) -> int:
        return sum(
            c.projected_saving_bytes
            for c in self.candidates
            if c.outcome.best is Availability.PUBLIC_RD and c.is_eligible()
        )


class Decision(str, Enum):
    """User decision on a purge candidate."""

    APPROVE = "approve"
    DENY = "deny"


class PurgeItemStatus(str, Enum):
    PURGED = "purged"
    TRASHED = "trashed"
    SKIPPED = "skipped"
    FAILED = "failed"


class PurgeItemResult(BaseModel):
    """Outcome of executing one candidate."""

    path: Path
    status: PurgeItemStatus
    reason: str = ""
    recipe_id: str | None = None
    bytes_removed: int = 0
    bytes_freed: int = 0


class PurgeResult(BaseModel):
    """Outcome of executing a purge plan.

    Attributes:
        items: Per-candidate results in plan order.
        bytes_removed: Sizes of originals deleted or moved to trash.
        bytes_freed: Sum of projected savings of executed candidates.
        target_free_bytes: Target the plan was built for, if any.
    """

    items: list[PurgeItemResult] = Field(default_factory=list)
    bytes_removed: int = 0
    bytes_freed: int = 0
    target_free_bytes: int | None = None

    @property
    def purged_count(self) -> int:
        return sum(
            1 for i in self.items if i.status in (PurgeItemStatus.PURGED, PurgeItemStatus.TRASHED)
        )

    @property
    def failed_count(self) -> int:
        return sum(1 for i in self.items if i.status is PurgeItemStatus.FAILED)


class MaintenanceItem(BaseModel):
    recipe_id: str
    file_name: str
    status: RecipeStatus
    best: Availability
    reason: str = ""


class MaintenanceReport(BaseModel):
    """Currency check of every stored recipe."""

    checked_at: datetime
    items: list[MaintenanceItem] = Field(default_factory=list)

    @property
    def current(self) -> int:
        return sum(1 for i in self.items if i.status is RecipeStatus.ACTIVE)

    @property
    def stale(self) -> int:
        return sum(1 for i in self.items if i.status is RecipeStatus.STALE)

    @property
    def stale_items(self) -> list[MaintenanceItem]:
        return [i for i in self.items if i.status is RecipeStatus.STALE]


class RestoreResult(BaseModel):
    """A reconstituted file."""

    recipe_id: str
    output_path: Path
    size_bytes: int
    url_used: str
    mode: CheckMode


class Stats(BaseModel):
    """min / mean / median / max of a numeric column."""

    min: float = 0.0
    mean: float = 0.0
    median: float = 0.0
    max: float = 0.0


class ScanSummary(BaseModel):
    """Study-style summary of a corpus of largest files.

    Provenance counts cover tallied records only; ``tallied_files`` equals
    ``total_files`` unless the corpus marks records as untallied. Percentages
    are given over both denominators.
    """

    participant_count: int = 0
    total_files: int = 0
    tallied_files: int = 0
    files_per_participant: Stats = Field(default_factory=Stats)
    file_size_bytes: Stats = Field(default_factory=Stats)
    days_since_modified: Stats = Field(default_factory=Stats)
    name_length_ex_extension: Stats = Field(default_factory=Stats)
    inter_participant_duplicates: int = 0
    intra_participant_duplicates: int = 0
    zoneid_reported_count: int = 0
    ru_only: int = 0
    hu_only: int = 0
    both: int = 0
    neither: int = 0
    percent_of_total: dict[str, float] = Field(default_factory=dict)
    percent_of_tallied: dict[str, float] = Field(default_factory=dict)


class CategoryRow(BaseModel):
    total: int = 0
    not_rd: int = 0
    public_rd: int = 0
    rd_w_auth: int = 0


class ParticipantStats(BaseModel):
    """Per-participant byte statistics.

    ``*_nonzero`` figures use only participants with a nonzero total,
    ``*_all`` use every participant in the corpus. Undefined values are None.
    """

    nonzero_participants: int = 0
    mean_nonzero: float | None = None
    std_nonzero: float | None = None
    mean_all: float | None = None
    std_all: float | None = None


class RedownloadabilityTable(BaseModel):
    """Per-category redownloadability of one channel."""

    channel: Channel
    total_files: int = 0
    rows: dict[SourceCategory, CategoryRow] = Field(
        default_factory=lambda: {c: CategoryRow() for c in SourceCategory}
    )
    total_public_bytes: int = 0
    total_auth_bytes: int = 0
    per_participant_public: ParticipantStats = Field(default_factory=ParticipantStats)
    per_participant_auth: ParticipantStats = Field(default_factory=ParticipantStats)


class CombinedSavings(BaseModel):
    """Savings when each file counts once at its best channel status."""

    public_bytes: int = 0
    auth_bytes: int = 0
    per_participant_public: ParticipantStats = Field(default_factory=ParticipantStats)
    per_participant_auth: ParticipantStats = Field(default_factory=ParticipantStats)
    per_participant_any: ParticipantStats = Field(default_factory=ParticipantStats)


class RedownloadabilityReport(BaseModel):
    ru: RedownloadabilityTable
    hu: RedownloadabilityTable
    combined: CombinedSavings


class CorpusRecord(BaseModel):
    """One line of a JSON-lines study corpus.

    Attributes:
        path: Original file path (as recorded, any platform).
        size_bytes: File size (JSON key ``size``).
        participant: Participant identifier.
        referrer_url: Recorded RU (JSON key ``ru``).
        host_url: Recorded HU (JSON key ``hu``).
        zone_id: Recorded ZoneId (JSON key ``zone_id``).
        modified_at: Modification time (JSON key ``mtime``).
        hash_full: Content digest (JSON key ``hash``).
        tallied: Whether the record counts towards the provenance tally.
    """

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    path: str
    size_bytes: int = Field(ge=0, alias="size")
    participant: str
    referrer_url: str | None = Field(default=None, alias="ru")
    host_url: str | None = Field(default=None, alias="hu")
    zone_id: int | None = None
    modified_at: UtcDatetime = Field(alias="mtime")
    hash_full: str | None = Field(default=None, alias="hash")
    tallied: bool = True

    @property
    def file_name(self) -> str:
        return final_segment(self.path)

    @property
    def extension(self) -> str:
        return extension_of(self.file_name)

    @property
    def origin(self) -> OriginMetadata | None:
        if self.zone_id is None and self.referrer_url is None and self.host_url is None:
            return None
        return OriginMetadata(
            zone_id=self.zone_id, referrer_url=self.referrer_url, host_url=self.host_url
        )


class AssessedFile(BaseModel):
    """Corpus record paired with its availability outcome."""

    record: CorpusRecord
    outcome: AvailabilityOutcome
