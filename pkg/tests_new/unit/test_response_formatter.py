"""Unit tests for CLI tables and JSON documents."""

import json
from datetime import datetime

try:
    from datetime import UTC
except ImportError:  # Python < 3.11
    from datetime import timezone

    UTC = timezone.utc
from pathlib import Path

import pytest
from rich.console import Console

from app.cli.response_formatter import (
    ResponseFormatter,
    maintenance_document,
    purge_document,
    report_document,
    restore_document,
    scan_document,
    via_text,
)
from app.config import Config
from app.models import (
    Availability,
    AvailabilityOutcome,
    CategoryRow,
    Channel,
    ChannelResult,
    CheckMode,
    CombinedSavings,
    DriveInfo,
    FileRecord,
    MaintenanceItem,
    MaintenanceReport,
    OriginMetadata,
    ParticipantStats,
    PurgeCandidate,
    PurgeItemResult,
    PurgeItemStatus,
    PurgePlan,
    PurgeResult,
    Recipe,
    RecipeStatus,
    RedownloadabilityReport,
    RedownloadabilityTable,
    RestoreResult,
    ScanResult,
    ScanSummary,
    SourceCategory,
    Stats,
)
from tests_new.utils.golden import load_golden, masked

NOW = datetime(2024, 6, 1, tzinfo=UTC)


@pytest.fixture
def formatter():
    return ResponseFormatter(Console(record=True, width=200))


@pytest.fixture
def categories():
    return Config().categories


def _public(url="https://cdn.example.net/a.iso", mode=CheckMode.DIRECT):
    return ChannelResult(
        status=Availability.PUBLIC_RD, url_used=url, mode=mode, reason="hash verified"
    )


def _candidate(outcome, saving=999_000):
    record = FileRecord(path=Path("/data/a.iso"), size_bytes=1_000_000, modified_at=NOW)
    return PurgeCandidate(
        record=record,
        category=SourceCategory.DIRECT_LINK,
        outcome=outcome,
        projected_saving_bytes=saving,
    )


class TestViaText:
    """Test winning-channel labels."""

    def test_hu_direct(self):
        assert via_text(AvailabilityOutcome.combine(_public(), None)) == "HU direct"

    def test_ru_indirect(self):
        outcome = AvailabilityOutcome.combine(None, _public(mode=CheckMode.INDIRECT))

        assert via_text(outcome) == "RU indirect"

    def test_nothing_recorded(self):
        assert via_text(AvailabilityOutcome.combine(None, None, reason="links")) == "-"


class TestDocuments:
    """Test the --json document schemas."""

    def test_scan_document(self, categories):
        record = FileRecord(
            path=Path("/data/talk.mp4"),
            size_bytes=96_000_000,
            modified_at=NOW,
            origin=OriginMetadata(zone_id=3, host_url="https://cdn.example.net/talk.mp4"),
        )
        result = ScanResult(
            root=Path("/data"),
            records=[record],
            drive=DriveInfo(root=Path("/"), used_bytes=1, free_bytes=2, total_bytes=3),
        )

        document = json.loads(json.dumps(scan_document(result, categories)))

        assert document["drive"] == {"used_bytes": 1, "free_bytes": 2, "total_bytes": 3}
        assert document["files"][0]["category"] == "DirectLink"
        assert document["files"][0]["zone_id"] == 3
        assert document["files"][0]["referrer_url"] is None

    def test_purge_document_without_result(self):
        plan = PurgePlan(
            root=Path("/data"),
            candidates=[_candidate(AvailabilityOutcome.combine(_public(), None))],
            examined=4,
        )

        document = purge_document(plan, None)

        assert document["result"] is None
        assert document["candidates"][0]["availability"] == "PublicRd"
        assert document["candidates"][0]["eligible"] is False
        assert document["candidates"][0]["via"] == "HU direct"

    def test_purge_document_with_result(self):
        plan = PurgePlan(root=Path("/data"), target_free_bytes=500)
        result = PurgeResult(
            items=[
                PurgeItemResult(
                    path=Path("/data/a.iso"),
                    status=PurgeItemStatus.PURGED,
                    recipe_id="abcdef0123456789",
                    bytes_removed=10,
                    bytes_freed=8,
                ),
                PurgeItemResult(
                    path=Path("/data/b.iso"), status=PurgeItemStatus.FAILED, reason="disk"
                ),
            ],
            bytes_removed=10,
            bytes_freed=8,
        )

        document = purge_document(plan, result)

        assert document["result"]["purged"] == 1
        assert document["result"]["failed"] == 1
        assert document["result"]["items"][1] == {
            "path": "/data/b.iso",
            "status": "failed",
            "reason": "disk",
            "recipe_id": None,
        }

    def test_report_document_offline(self):
        document = report_document(ScanSummary(total_files=3), None)

        assert document["summary"]["total_files"] == 3
        assert document["ru"] is None
        assert document["combined"] is None

    def test_report_document_display_strings(self):
        table = RedownloadabilityTable(
            channel=Channel.RU,
            total_files=9,
            total_public_bytes=45_600_000,
            total_auth_bytes=7_363_800_000,
            per_participant_public=ParticipantStats(
                nonzero_participants=1, mean_all=5_066_667, std_all=15_200_000
            ),
        )
        report = RedownloadabilityReport.model_validate(
            {"ru": table, "hu": table.model_copy(update={"channel": Channel.HU}), "combined": {}}
        )

        document = json.loads(json.dumps(report_document(ScanSummary(), report)))

        assert document["ru"]["display"]["total_public"] == "45.6 MB"
        assert document["ru"]["display"]["total_auth"] == "7.36 GB"
        assert document["ru"]["display"]["per_participant_public"] == "5.1 MB ± 15.2 MB"
        assert document["hu"]["channel"] == "HU"
        assert document["ru"]["rows"]["DirectLink"] == {
            "total": 0,
            "not_rd": 0,
            "public_rd": 0,
            "rd_w_auth": 0,
        }


class TestGoldenDocuments:
    """Pin every --json document against its golden file."""

    ROOT = Path("/data")

    def test_scan(self, categories):
        result = ScanResult(
            root=self.ROOT,
            records=[
                FileRecord(
                    path=self.ROOT / "talk.mp4",
                    size_bytes=96_000_000,
                    modified_at=NOW,
                    origin=OriginMetadata(zone_id=3, host_url="https://cdn.example.net/talk.mp4"),
                ),
                FileRecord(path=self.ROOT / "notes.pdf", size_bytes=5_000_000, modified_at=NOW),
            ],
            skipped_count=1,
            drive=DriveInfo(root=Path("/"), used_bytes=600, free_bytes=400, total_bytes=1000),
        )

        document = scan_document(result, categories)

        assert masked(document, self.ROOT) == load_golden("scan")

    def test_purge(self):
        digest = "ab" * 32
        recipe = Recipe(
            created_at=NOW,
            last_maintained_at=NOW,
            host_url="https://cdn.example.net/a.iso",
            original_path="/data/a.iso",
            file_name="a.iso",
            size_bytes=1_000_000,
            hash_full=digest,
            partial_hash=digest,
        )
        public = _candidate(AvailabilityOutcome.combine(_public(), None)).model_copy(
            update={"recipe": recipe}
        )
        unlinked = PurgeCandidate(
            record=FileRecord(path=self.ROOT / "b.mkv", size_bytes=800_000, modified_at=NOW),
            category=SourceCategory.LINKS_NOT_RECORDED,
            outcome=AvailabilityOutcome.combine(None, None, reason="links not recorded"),
            projected_saving_bytes=799_000,
        )
        plan = PurgePlan(
            root=self.ROOT,
            target_free_bytes=1_000_000,
            candidates=[public, unlinked],
            examined=4,
            target_met=True,
        )
        result = PurgeResult(
            items=[
                PurgeItemResult(
                    path=self.ROOT / "a.iso",
                    status=PurgeItemStatus.PURGED,
                    recipe_id=recipe.recipe_id,
                    bytes_removed=1_000_000,
                    bytes_freed=999_000,
                ),
                PurgeItemResult(
                    path=self.ROOT / "b.mkv",
                    status=PurgeItemStatus.SKIPPED,
                    reason="not approved",
                ),
            ],
            bytes_removed=1_000_000,
            bytes_freed=999_000,
        )

        document = purge_document(plan, result)

        assert masked(document, self.ROOT) == load_golden("purge")

    def test_maintain(self):
        report = MaintenanceReport(
            checked_at=NOW,
            items=[
                MaintenanceItem(
                    recipe_id="ab" * 8,
                    file_name="a.iso",
                    status=RecipeStatus.ACTIVE,
                    best=Availability.PUBLIC_RD,
                ),
                MaintenanceItem(
                    recipe_id="cd" * 8,
                    file_name="c.zip",
                    status=RecipeStatus.STALE,
                    best=Availability.NOT_RD,
                    reason="HU: HTTP 404",
                ),
            ],
        )

        document = maintenance_document(report)

        assert masked(document, self.ROOT) == load_golden("maintain")

    def test_restore(self):
        restored = RestoreResult(
            recipe_id="ab" * 8,
            output_path=self.ROOT / "a.iso",
            size_bytes=1_000_000,
            url_used="https://cdn.example.net/a.iso",
            mode=CheckMode.DIRECT,
        )

        document = restore_document(
            [restored], [("cd" * 8, "cannot restore c.zip: HU: HTTP 404")]
        )

        assert masked(document, self.ROOT) == load_golden("restore")

    def test_report(self):
        thirds = {"hu_only": 33.33, "both": 33.33, "neither": 33.33}
        summary = ScanSummary(
            participant_count=2,
            total_files=3,
            tallied_files=3,
            files_per_participant=Stats(min=1, mean=1.5, median=1.5, max=2),
            file_size_bytes=Stats(min=1e6, mean=2e6, median=2e6, max=3e6),
            zoneid_reported_count=2,
            hu_only=1,
            both=1,
            neither=1,
            percent_of_total=thirds,
            percent_of_tallied=thirds,
        )
        ru = RedownloadabilityTable(
            channel=Channel.RU,
            total_files=3,
            total_public_bytes=3_000_000,
            per_participant_public=ParticipantStats(
                nonzero_participants=1,
                mean_nonzero=3e6,
                mean_all=1.5e6,
                std_all=2121320.34,
            ),
        )
        ru.rows[SourceCategory.DIRECT_LINK] = CategoryRow(total=1, public_rd=1)
        ru.rows[SourceCategory.LINKS_NOT_RECORDED] = CategoryRow(total=2, not_rd=2)
        report = RedownloadabilityReport(
            ru=ru,
            hu=RedownloadabilityTable(channel=Channel.HU, total_files=3),
            combined=CombinedSavings(public_bytes=3_000_000),
        )

        document = report_document(summary, report)

        assert masked(document, self.ROOT) == load_golden("report")


class TestResponseFormatter:
    """Test rich rendering."""

    def test_redownloadability_table_uses_dashes_for_zero(self, formatter):
        table = RedownloadabilityTable(channel=Channel.HU, total_files=7)
        table.rows[SourceCategory.CLOUD_COLLABORATION] = CategoryRow(total=7, rd_w_auth=7)

        formatter.print_redownloadability(table, "HU table")
        text = formatter.console.export_text()

        assert "HU Link Desc." in text
        row = next(line for line in text.splitlines() if "Cloud Collaboration" in line)
        assert [cell.strip() for cell in row.split("│")[1:-1]] == [
            "Cloud Collaboration",
            "7",
            "-",
            "-",
            "7",
        ]

    def test_summary_shows_both_denominators(self, formatter):
        summary = ScanSummary(
            total_files=180,
            tallied_files=155,
            neither=78,
            percent_of_total={"neither": 43.33},
            percent_of_tallied={"neither": 50.32},
        )

        formatter.print_summary(summary, "Summary")
        text = formatter.console.export_text()

        assert "78 (50.3% of 155; 43.3% of 180)" in text

    def test_candidate_line(self, formatter):
        candidate = _candidate(AvailabilityOutcome.combine(_public(), None))

        text = formatter.candidate_text(1, candidate)

        assert text.startswith("1. /data/a.iso")
        assert "PublicRd via HU direct" in text
        assert "saves 999.0 KB" in text

    def test_purge_result_lists_every_item(self, formatter):
        result = PurgeResult(
            items=[
                PurgeItemResult(
                    path=Path("/data/a.iso"), status=PurgeItemStatus.SKIPPED, reason="not approved"
                )
            ]
        )

        formatter.print_purge_result(result)

        assert "not approved" in formatter.console.export_text()
