"""Study-style statistics over largest-file corpora.

Builds the biggest-file summary (participants, sizes, ages, duplicates and
provenance tally) and the per-channel redownloadability tables with
per-participant byte statistics. Corpora are JSON-lines files with one
record per file, or are derived from a local scan.
"""

import logging
from datetime import datetime

try:
    from datetime import UTC
except ImportError:  # Python < 3.11
    from datetime import timezone

    UTC = timezone.utc
from pathlib import Path

import pandas as pd
from pydantic import ValidationError

from ..config import CategoryConfig
from ..core.exceptions import CorpusError
from ..models import (
    AssessedFile,
    Availability,
    Channel,
    CombinedSavings,
    CorpusRecord,
    ParticipantStats,
    Recipe,
    RedownloadabilityReport,
    RedownloadabilityTable,
    ScanResult,
    ScanSummary,
    Stats,
    final_segment,
    is_absolute_path,
)
from ..webcheck.availability import WebChecker
from ..webcheck.fetcher import Fetcher
from .origin_meta import classify_source
from .recipe import hash_file

logger = logging.getLogger(__name__)

LOCAL_PARTICIPANT = "local"
_ALGO_BY_DIGEST_LENGTH = {64: "sha256", 128: "sha512", 40: "sha1"}


def load_corpus(path: Path | str) -> list[CorpusRecord]:
    """Read a JSON-lines corpus; blank lines are skipped.

    Raises:
        CorpusError: File unreadable or a line is not a valid record.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise CorpusError(f"cannot read corpus {path}: {e}") from e

    records = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            records.append(CorpusRecord.model_validate_json(line))
        except ValidationError as e:
            error = e.errors()[0]
            location = ".".join(str(p) for p in error["loc"]) or "record"
            raise CorpusError(f"{path}:{lineno}: {location}: {error['msg']}") from e
    logger.info(f"Loaded {len(records)} corpus records from {path}")
    return records


def dump_corpus(records: list[CorpusRecord], path: Path | str) -> None:
    """Write records as JSON lines using the corpus key names."""
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(record.model_dump_json(by_alias=True, exclude_none=True) + "\n")


def corpus_from_scan(
    scan: ScanResult, participant: str = LOCAL_PARTICIPANT, with_hashes: bool = True
) -> list[CorpusRecord]:
    """Turn a local scan into corpus records of a single participant.

    Args:
        scan: Scan with origin attached.
        participant: Participant id for every record.
        with_hashes: Hash file contents for duplicate detection.

    Returns:
        One record per scanned file.
    """
    records = []
    for record in scan.records:
        digest = None
        if with_hashes:
            try:
                digest = hash_file(record.path, partial_len=0).hash_full
            except OSError as e:
                logger.debug(f"Not hashing {record.path}: {e}")
        origin = record.origin
        records.append(
            CorpusRecord(
                path=str(record.path),
                size_bytes=record.size_bytes,
                participant=participant,
                referrer_url=origin.referrer_url if origin else None,
                host_url=origin.host_url if origin else None,
                zone_id=origin.zone_id if origin else None,
                modified_at=record.modified_at,
                hash_full=digest,
            )
        )
    return records


def _stats(series: pd.Series) -> Stats:
    if series.empty:
        return Stats()
    return Stats(
        min=float(series.min()),
        mean=float(series.mean()),
        median=float(series.median()),
        max=float(series.max()),
    )


def _name_length(file_name: str) -> int:
    stem, dot, _ = file_name.rpartition(".")
    return len(stem) if dot and stem else len(file_name)


def _percent(count: int, denominator: int) -> float:
    return round(100.0 * count / denominator, 2) if denominator else 0.0


def summarize_scan(records: list[CorpusRecord], now: datetime | None = None) -> ScanSummary:
    """Summarize a corpus the way the biggest-file study table does.

    Duplicates are files beyond the first of each identical-hash group,
    split into intra-participant (same participant) and inter-participant
    copies. Provenance counts cover tallied records; percentages are given
    over all files and over tallied files.

    Args:
        records: Corpus records of every participant.
        now: Reference time for file ages, defaults to the current time.

    Returns:
        ScanSummary; all zero for an empty corpus.
    """
    if not records:
        return ScanSummary()
    now = now or datetime.now(UTC)

    df = pd.DataFrame(
        [
            {
                "participant": r.participant,
                "size": r.size_bytes,
                "age_days": (now - r.modified_at).total_seconds() / 86400,
                "name_length": _name_length(r.file_name),
                "hash": r.hash_full,
                "has_ru": r.referrer_url is not None,
                "has_hu": r.host_url is not None,
                "has_zone": r.zone_id is not None,
                "tallied": r.tallied,
            }
            for r in records
        ]
    )

    intra = inter = 0
    for _, group in df[df["hash"].notna()].groupby("hash"):
        counts = group["participant"].value_counts()
        intra += int((counts - 1).sum())
        inter += len(counts) - 1

    tallied = df[df["tallied"]]
    counts = {
        "zoneid_reported": int(tallied["has_zone"].sum()),
        "ru_only": int((tallied["has_ru"] & ~tallied["has_hu"]).sum()),
        "hu_only": int((~tallied["has_ru"] & tallied["has_hu"]).sum()),
        "both": int((tallied["has_ru"] & tallied["has_hu"]).sum()),
        "neither": int((~tallied["has_ru"] & ~tallied["has_hu"]).sum()),
    }
    total, tallied_total = len(df), len(tallied)

    return ScanSummary(
        participant_count=int(df["participant"].nunique()),
        total_files=total,
        tallied_files=tallied_total,
        files_per_participant=_stats(df.groupby("participant").size()),
        file_size_bytes=_stats(df["size"]),
        days_since_modified=_stats(df["age_days"]),
        name_length_ex_extension=_stats(df["name_length"]),
        inter_participant_duplicates=inter,
        intra_participant_duplicates=intra,
        zoneid_reported_count=counts["zoneid_reported"],
        ru_only=counts["ru_only"],
        hu_only=counts["hu_only"],
        both=counts["both"],
        neither=counts["neither"],
        percent_of_total={k: _percent(v, total) for k, v in counts.items()},
        percent_of_tallied={k: _percent(v, tallied_total) for k, v in counts.items()},
    )


def replay_recipe(record: CorpusRecord) -> Recipe:
    """Recipe standing in for a corpus record during availability replay.

    The record's hash is the full-content hash; no partial hash is used.
    Records without a usable hash get an all-zero digest, which can still
    be classified by presumption or HTTP status but never verifies.
    """
    path = record.path if is_absolute_path(record.path) else "/" + record.path.lstrip("/\\")
    digest = (record.hash_full or "").lower()
    algo = _ALGO_BY_DIGEST_LENGTH.get(len(digest))
    if algo is None:
        algo, digest = "sha256", "0" * 64
    fields = {
        "created_at": record.modified_at,
        "last_maintained_at": record.modified_at,
        "referrer_url": record.referrer_url,
        "host_url": record.host_url,
        "original_path": path,
        "file_name": final_segment(path),
        "size_bytes": record.size_bytes,
        "hash_algo": algo,
        "partial_hash": None,
        "partial_len": 0,
    }
    try:
        return Recipe(hash_full=digest, **fields)
    except ValidationError:
        logger.warning(f"Unusable hash for {record.path}; replaying without verification")
        return Recipe(hash_full="0" * 64, **{**fields, "hash_algo": "sha256"})


async def assess_corpus(
    records: list[CorpusRecord], checker: WebChecker, fetcher: Fetcher
) -> list[AssessedFile]:
    """Replay every record through the availability checker.

    Both channels are evaluated for every record so that RU and HU tables
    can be built from one pass.
    """
    recipes = [replay_recipe(r) for r in records]
    outcomes = await checker.check_many(recipes, fetcher, exhaustive=True)
    return [
        AssessedFile(record=record, outcome=outcome)
        for record, outcome in zip(records, outcomes, strict=True)
    ]


def participant_stats(totals: pd.Series) -> ParticipantStats:
    """Mean and sample standard deviation of per-participant byte totals.

    Args:
        totals: Byte total per participant, zeros included.

    Returns:
        ParticipantStats; every value is None when no participant has a
        nonzero total, standard deviations are None below two values.
    """
    nonzero = totals[totals > 0]
    if nonzero.empty:
        return ParticipantStats()
    return ParticipantStats(
        nonzero_participants=len(nonzero),
        mean_nonzero=float(nonzero.mean()),
        std_nonzero=float(nonzero.std(ddof=1)) if len(nonzero) > 1 else None,
        mean_all=float(totals.mean()),
        std_all=float(totals.std(ddof=1)) if len(totals) > 1 else None,
    )


def _byte_totals(df: pd.DataFrame, mask: pd.Series, participants: list[str]) -> pd.Series:
    return (
        df[mask]
        .groupby("participant")["size"]
        .sum()
        .reindex(participants, fill_value=0)
        .astype("int64")
    )


def redownloadability_report(
    assessed: list[AssessedFile], channel: Channel, categories: CategoryConfig | None = None
) -> RedownloadabilityTable:
    """Per-category redownloadability of one channel.

    Each file is categorized from that channel's URL alone and counted with
    that channel's status; an unevaluated channel counts as not
    redownloadable. Byte totals sum the sizes of PublicRd and RdWithAuth
    files; per-participant statistics cover every participant present in
    the input.

    Args:
        assessed: Corpus records with their availability outcomes.
        channel: RU or HU.
        categories: Domain lists, defaults to the global configuration.

    Returns:
        RedownloadabilityTable; zeroed for empty input.
    """
    table = RedownloadabilityTable(channel=channel, total_files=len(assessed))
    if not assessed:
        return table

    rows = []
    for item in assessed:
        record = item.record
        view = record.origin.restricted_to(channel) if record.origin else None
        category = classify_source(view, record.extension, categories)
        result = item.outcome.for_channel(channel)
        status = result.status if result is not None else Availability.NOT_RD

        row = table.rows[category]
        row.total += 1
        if status is Availability.PUBLIC_RD:
            row.public_rd += 1
        elif status is Availability.RD_WITH_AUTH:
            row.rd_w_auth += 1
        else:
            row.not_rd += 1
        rows.append(
            {"participant": record.participant, "status": status.value, "size": record.size_bytes}
        )

    df = pd.DataFrame(rows)
    participants = list(df["participant"].unique())
    public = _byte_totals(df, df["status"] == Availability.PUBLIC_RD.value, participants)
    auth = _byte_totals(df, df["status"] == Availability.RD_WITH_AUTH.value, participants)

    table.total_public_bytes = int(public.sum())
    table.total_auth_bytes = int(auth.sum())
    table.per_participant_public = participant_stats(public)
    table.per_participant_auth = participant_stats(auth)
    return table


def combined_savings(assessed: list[AssessedFile]) -> CombinedSavings:
    """Savings when every file counts once, at its best status over both channels."""
    if not assessed:
        return CombinedSavings()
    df = pd.DataFrame(
        [
            {
                "participant": item.record.participant,
                "best": item.outcome.best.value,
                "size": item.record.size_bytes,
            }
            for item in assessed
        ]
    )
    participants = list(df["participant"].unique())
    public = _byte_totals(df, df["best"] == Availability.PUBLIC_RD.value, participants)
    auth = _byte_totals(df, df["best"] == Availability.RD_WITH_AUTH.value, participants)
    return CombinedSavings(
        public_bytes=int(public.sum()),
        auth_bytes=int(auth.sum()),
        per_participant_public=participant_stats(public),
        per_participant_auth=participant_stats(auth),
        per_participant_any=participant_stats(public + auth),
    )


def build_report(
    assessed: list[AssessedFile], categories: CategoryConfig | None = None
) -> RedownloadabilityReport:
    """RU table, HU table and combined savings of an assessed corpus."""
    return RedownloadabilityReport(
        ru=redownloadability_report(assessed, Channel.RU, categories),
        hu=redownloadability_report(assessed, Channel.HU, categories),
        combined=combined_savings(assessed),
    )


def format_bytes(value: float | None) -> str:
    """Decimal-unit byte display (1 MB = 10^6 B); None renders as '-'."""
    if value is None:
        return "-"
    if value >= 1e9:
        return f"{value / 1e9:.2f} GB"
    if value >= 1e6:
        return f"{value / 1e6:.1f} MB"
    if value >= 1e3:
        return f"{value / 1e3:.1f} KB"
    return f"{int(value)} B"


def format_mean_std(mean: float | None, std: float | None) -> str:
    """'mean ± std' in decimal units, '-' when the mean is undefined."""
    if mean is None:
        return "-"
    if std is None:
        return format_bytes(mean)
    return f"{format_bytes(mean)} ± {format_bytes(std)}"
