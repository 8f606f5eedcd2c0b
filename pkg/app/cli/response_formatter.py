"""Response formatting for CLI output.

Renders scans, purge plans and results, maintenance reports and study
tables as rich tables for terminals, and builds the stable-schema JSON
documents printed under ``--json``.
"""

import logging
from typing import Any

from rich.console import Console
from rich.table import Table

from ..config import CategoryConfig
from ..models import (
    AvailabilityOutcome,
    MaintenanceReport,
    PurgeCandidate,
    PurgePlan,
    PurgeResult,
    RedownloadabilityReport,
    RedownloadabilityTable,
    RestoreResult,
    ScanResult,
    ScanSummary,
    SourceCategory,
    Stats,
    StoreIndexEntry,
)
from ..services.origin_meta import classify_source
from ..services.report import format_bytes, format_mean_std
from .messages import CANDIDATE_LINE, DRIVE_LINE

logger = logging.getLogger(__name__)

CATEGORY_LABELS = {
    SourceCategory.CLOUD_COLLABORATION: "Cloud Collaboration",
    SourceCategory.WEBMAIL: "Webmail",
    SourceCategory.BIG_TECH_CSP: "Big Tech CSPs",
    SourceCategory.SMALL_CSP: "Small CSPs",
    SourceCategory.APPLICATIONS_TOOLS: "Applications/Tools",
    SourceCategory.LOCAL_ACCESS: "Local Access",
    SourceCategory.DIRECT_LINK: "Direct Links",
    SourceCategory.LINKS_NOT_RECORDED: "Links Not Recorded",
}


def via_text(outcome: AvailabilityOutcome) -> str:
    """Channel and mode of the winning result, e.g. ``HU direct``."""
    winning = outcome.winning
    if winning is None:
        return "-"
    channel = "HU" if winning is outcome.via_hu else "RU"
    return f"{channel} {winning.mode.value}"


def _count(value: int) -> str:
    return str(value) if value else "-"


def _percent_text(count: int, summary: ScanSummary, key: str) -> str:
    tallied = summary.percent_of_tallied.get(key, 0.0)
    total = summary.percent_of_total.get(key, 0.0)
    return (
        f"{count} ({tallied:.1f}% of {summary.tallied_files}; "
        f"{total:.1f}% of {summary.total_files})"
    )


def _stats_row(label: str, stats: Stats, as_bytes: bool = False) -> list[str]:
    values = [stats.min, stats.mean, stats.median, stats.max]
    if as_bytes:
        return [label, *(format_bytes(v) for v in values)]
    return [label, *(f"{v:.1f}".rstrip("0").rstrip(".") for v in values)]


def scan_document(result: ScanResult, categories: CategoryConfig) -> dict[str, Any]:
    """JSON document of a scan."""
    drive = result.drive
    return {
        "root": str(result.root),
        "skipped_count": result.skipped_count,
        "drive": (
            {
                "used_bytes": drive.used_bytes,
                "free_bytes": drive.free_bytes,
                "total_bytes": drive.total_bytes,
            }
            if drive
            else None
        ),
        "files": [
            {
                "path": str(r.path),
                "size_bytes": r.size_bytes,
                "modified_at": r.modified_at.isoformat(),
                "category": classify_source(r.origin, r.extension, categories).value,
                "zone_id": r.origin.zone_id if r.origin else None,
                "referrer_url": r.origin.referrer_url if r.origin else None,
                "host_url": r.origin.host_url if r.origin else None,
            }
            for r in result.records
        ],
    }


def purge_document(
    plan: PurgePlan, result: PurgeResult | None, allow_auth: bool = False
) -> dict[str, Any]:
    """JSON document of a purge plan and, when executed, its result."""
    return {
        "root": str(plan.root),
        "target_free_bytes": plan.target_free_bytes,
        "target_met": plan.target_met,
        "examined": plan.examined,
        "candidates": [
            {
                "path": str(c.record.path),
                "size_bytes": c.record.size_bytes,
                "category": c.category.value,
                "availability": c.outcome.best.value,
                "via": via_text(c.outcome),
                "projected_saving_bytes": c.projected_saving_bytes,
                "eligible": c.is_eligible(allow_auth),
            }
            for c in plan.candidates
        ],
        "result": (
            {
                "bytes_removed": result.bytes_removed,
                "bytes_freed": result.bytes_freed,
                "purged": result.purged_count,
                "failed": result.failed_count,
                "items": [
                    {
                        "path": str(i.path),
                        "status": i.status.value,
                        "reason": i.reason,
                        "recipe_id": i.recipe_id,
                    }
                    for i in result.items
                ],
            }
            if result is not None
            else None
        ),
    }


def maintenance_document(report: MaintenanceReport) -> dict[str, Any]:
    """JSON document of a maintenance run."""
    return {
        "checked_at": report.checked_at.isoformat(),
        "current": report.current,
        "stale": report.stale,
        "items": [item.model_dump(mode="json") for item in report.items],
    }


def restore_document(
    restored: list[RestoreResult], failed: list[tuple[str, str]]
) -> dict[str, Any]:
    """JSON document of a restore run."""
    return {
        "restored": [r.model_dump(mode="json") for r in restored],
        "failed": [{"recipe_id": rid, "reason": reason} for rid, reason in failed],
    }


def recipes_document(entries: list[StoreIndexEntry]) -> dict[str, Any]:
    """JSON document of the store index."""
    return {"recipes": [e.model_dump(mode="json") for e in entries]}


def _table_document(table: RedownloadabilityTable) -> dict[str, Any]:
    document = table.model_dump(mode="json")
    document["display"] = {
        "total_public": format_bytes(table.total_public_bytes),
        "total_auth": format_bytes(table.total_auth_bytes),
        "per_participant_public": format_mean_std(
            table.per_participant_public.mean_all, table.per_participant_public.std_all
        ),
        "per_participant_auth": format_mean_std(
            table.per_participant_auth.mean_all, table.per_participant_auth.std_all
        ),
    }
    return document


def report_document(
    summary: ScanSummary, report: RedownloadabilityReport | None
) -> dict[str, Any]:
    """JSON document of a study report; tables are null when offline."""
    return {
        "summary": summary.model_dump(mode="json"),
        "ru": _table_document(report.ru) if report else None,
        "hu": _table_document(report.hu) if report else None,
        "combined": report.combined.model_dump(mode="json") if report else None,
    }


class ResponseFormatter:
    """Renders command results on a rich console."""

    def __init__(self, console: Console | None = None):
        self.console = console or Console()

    def print_scan(self, result: ScanResult, categories: CategoryConfig) -> None:
        table = Table(title=f"Largest files under {result.root}")
        table.add_column("#", justify="right")
        table.add_column("Size", justify="right")
        table.add_column("Modified")
        table.add_column("Category")
        table.add_column("Path", overflow="fold")
        for index, record in enumerate(result.records, start=1):
            category = classify_source(record.origin, record.extension, categories)
            table.add_row(
                str(index),
                format_bytes(record.size_bytes),
                record.modified_at.strftime("%Y-%m-%d"),
                CATEGORY_LABELS[category],
                str(record.path),
            )
        self.console.print(table)
        if result.drive is not None:
            self.console.print(
                DRIVE_LINE.format(
                    root=result.drive.root,
                    used=format_bytes(result.drive.used_bytes),
                    free=format_bytes(result.drive.free_bytes),
                    total=format_bytes(result.drive.total_bytes),
                )
            )

    def candidate_text(self, index: int, candidate: PurgeCandidate) -> str:
        return CANDIDATE_LINE.format(
            index=index,
            path=candidate.record.path,
            size=format_bytes(candidate.record.size_bytes),
            category=CATEGORY_LABELS[candidate.category],
            availability=candidate.outcome.best.value,
            via=via_text(candidate.outcome),
            saving=format_bytes(max(candidate.projected_saving_bytes, 0)),
        )

    def print_plan(self, plan: PurgePlan, allow_auth: bool = False) -> None:
        table = Table(title=f"Purge candidates under {plan.root}")
        table.add_column("#", justify="right")
        table.add_column("Size", justify="right")
        table.add_column("Category")
        table.add_column("Availability")
        table.add_column("Via")
        table.add_column("Saving", justify="right")
        table.add_column("Eligible")
        table.add_column("Path", overflow="fold")
        for index, candidate in enumerate(plan.candidates, start=1):
            table.add_row(
                str(index),
                format_bytes(candidate.record.size_bytes),
                CATEGORY_LABELS[candidate.category],
                candidate.outcome.best.value,
                via_text(candidate.outcome),
                format_bytes(max(candidate.projected_saving_bytes, 0)),
                "yes" if candidate.is_eligible(allow_auth) else "no",
                str(candidate.record.path),
            )
        self.console.print(table)

    def print_purge_result(self, result: PurgeResult) -> None:
        table = Table(title="Purge result")
        table.add_column("Status")
        table.add_column("Recipe")
        table.add_column("Reason")
        table.add_column("Path", overflow="fold")
        for item in result.items:
            table.add_row(item.status.value, item.recipe_id or "-", item.reason, str(item.path))
        self.console.print(table)

    def print_maintenance(self, report: MaintenanceReport) -> None:
        table = Table(title="Recipe maintenance")
        table.add_column("Recipe")
        table.add_column("File")
        table.add_column("Status")
        table.add_column("Availability")
        table.add_column("Reason", overflow="fold")
        for item in report.items:
            table.add_row(
                item.recipe_id, item.file_name, item.status.value, item.best.value, item.reason
            )
        self.console.print(table)

    def print_summary(self, summary: ScanSummary, title: str) -> None:
        table = Table(title=title)
        table.add_column("Parameter")
        for column in ("min", "mean", "median", "max"):
            table.add_column(column, justify="right")
        table.add_row("Participants (P)", "", "", str(summary.participant_count), "")
        table.add_row("Total files", "", "", str(summary.total_files), "")
        table.add_row(*_stats_row("Files per P", summary.files_per_participant))
        table.add_row(*_stats_row("File size", summary.file_size_bytes, as_bytes=True))
        table.add_row(*_stats_row("Days since last modified", summary.days_since_modified))
        table.add_row(
            *_stats_row("File name length (ex-extension)", summary.name_length_ex_extension)
        )
        table.add_row(
            "Inter-P duplicated files", "", "", str(summary.inter_participant_duplicates), ""
        )
        table.add_row(
            "Intra-P duplicated files", "", "", str(summary.intra_participant_duplicates), ""
        )
        table.add_section()
        tally = (
            ("ZoneId reported", summary.zoneid_reported_count, "zoneid_reported"),
            ("Only ReferrerUrl (RU)", summary.ru_only, "ru_only"),
            ("Only HostUrl (HU)", summary.hu_only, "hu_only"),
            ("Both RU and HU", summary.both, "both"),
            ("Neither RU nor HU", summary.neither, "neither"),
        )
        for label, count, key in tally:
            table.add_row(label, "", "", _percent_text(count, summary, key), "")
        self.console.print(table)

    def print_redownloadability(self, table: RedownloadabilityTable, title: str) -> None:
        rendered = Table(title=title)
        rendered.add_column(f"{table.channel.value} Link Desc.")
        for column in ("Total Count", "Not Rd", "Public Rd", "Rd w. Auth."):
            rendered.add_column(column, justify="right")
        for category in SourceCategory:
            row = table.rows[category]
            rendered.add_row(
                CATEGORY_LABELS[category],
                str(row.total),
                _count(row.not_rd),
                _count(row.public_rd),
                _count(row.rd_w_auth),
            )
        rendered.add_section()
        rendered.add_row(
            "Total Rd",
            "-",
            "-",
            format_bytes(table.total_public_bytes),
            format_bytes(table.total_auth_bytes),
        )
        public, auth = table.per_participant_public, table.per_participant_auth
        rendered.add_row(
            "Per participant (all)",
            "-",
            "-",
            format_mean_std(public.mean_all, public.std_all),
            format_mean_std(auth.mean_all, auth.std_all),
        )
        rendered.add_row(
            "Per participant (≠ 0)",
            "-",
            "-",
            format_mean_std(public.mean_nonzero, public.std_nonzero),
            format_mean_std(auth.mean_nonzero, auth.std_nonzero),
        )
        self.console.print(rendered)

    def print_recipes(self, entries: list[StoreIndexEntry]) -> None:
        table = Table(title="Stored recipes")
        table.add_column("Recipe")
        table.add_column("File")
        table.add_column("Size", justify="right")
        table.add_column("Status")
        table.add_column("Last maintained")
        table.add_column("Original path", overflow="fold")
        for entry in entries:
            table.add_row(
                entry.recipe_id,
                entry.file_name,
                format_bytes(entry.size_bytes),
                entry.status.value,
                entry.last_maintained_at.strftime("%Y-%m-%d %H:%M"),
                entry.original_path,
            )
        self.console.print(table)
