"""Click commands of the webpurge CLI.

Thin command layer: each command resolves services from the container,
runs the async work with ``asyncio.run`` and hands results to the
formatter. Errors are mapped onto the exit-code contract by handle_errors.
"""

import asyncio
import functools
import json
import logging
from collections.abc import Callable
from pathlib import Path
from typing import Any, ParamSpec, TypeVar

import click

from .. import __version__
from ..config import Config
from ..core.container import Container, build_container
from ..core.exceptions import (
    ConfigError,
    PassphraseDeclinedError,
    RecipeAuthError,
    RestoreError,
    StoreNotInitializedError,
    WebpurgeError,
)
from ..models import (
    AssessedFile,
    Decision,
    MaintenanceReport,
    PurgeCandidate,
    PurgePlan,
    RecipeStatus,
    RestoreResult,
)
from ..services.engine import read_marker
from ..services.report import (
    assess_corpus,
    build_report,
    corpus_from_scan,
    format_bytes,
    format_mean_std,
    load_corpus,
    summarize_scan,
)
from ..services.scanner import MARKER_SUFFIX
from ..services.store import RecipeStore
from . import messages
from .response_formatter import (
    ResponseFormatter,
    maintenance_document,
    purge_document,
    recipes_document,
    report_document,
    restore_document,
    scan_document,
)
from .utils import SIZE, create_fetcher, resolve_passphrase

logger = logging.getLogger(__name__)

P = ParamSpec("P")
R = TypeVar("R")


def handle_errors(func: Callable[P, R]) -> Callable[P, R]:
    """Map application errors onto exit codes 2 (fatal) and 3 (auth)."""

    @functools.wraps(func)
    def wrapper(*args: P.args, **kwargs: P.kwargs) -> R:
        ctx = click.get_current_context()
        try:
            return func(*args, **kwargs)
        except RecipeAuthError as e:
            logger.debug(f"Recipe authentication failed: {e}")
            click.echo(messages.ERROR_AUTH, err=True)
            ctx.exit(messages.EXIT_AUTH)
        except PassphraseDeclinedError:
            env = _config(ctx).purge.passphrase_env
            click.echo(messages.ERROR_NO_PASSPHRASE.format(env=env), err=True)
            ctx.exit(messages.EXIT_AUTH)
        except StoreNotInitializedError as e:
            click.echo(messages.ERROR_NO_STORE.format(store_dir=e.store_dir), err=True)
            ctx.exit(messages.EXIT_FATAL)
        except WebpurgeError as e:
            click.echo(messages.ERROR_LINE.format(message=e), err=True)
            ctx.exit(messages.EXIT_FATAL)

    return wrapper


def _config(ctx: click.Context) -> Config:
    container: Container = ctx.find_root().obj
    return container.config()


def _echo_json(document: dict[str, Any]) -> None:
    click.echo(json.dumps(document, indent=2))


def _note(message: str, as_json: bool = False) -> None:
    """Human-readable line; goes to stderr when stdout carries JSON."""
    click.echo(message, err=as_json)


def _open_store(store: RecipeStore, create: bool = False) -> None:
    repair = store.open(create=create)
    if not repair.clean:
        click.echo(
            messages.REPAIR_NOTICE.format(
                quarantined=len(repair.quarantined), dropped=len(repair.dropped_entries)
            ),
            err=True,
        )


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option(
    "--config",
    "config_file",
    type=click.Path(dir_okay=False, path_type=Path),
    help="YAML configuration file.",
)
@click.option(
    "--store", "store_dir", type=click.Path(file_okay=False, path_type=Path), help="Recipe store."
)
@click.option("--concurrency", type=click.IntRange(min=1), help="Availability checks in flight.")
@click.option(
    "--timeout",
    "timeout_secs",
    type=click.FloatRange(min=0, min_open=True),
    help="Connect and read timeout in seconds.",
)
@click.option("--fixture-mode", is_flag=True, help="Read provenance from .zoneid sidecar files.")
@click.option("-v", "--verbose", count=True, help="-v for INFO, -vv for DEBUG logging.")
@click.version_option(__version__, prog_name="webpurge")
@click.pass_context
def cli(
    ctx: click.Context,
    config_file: Path | None,
    store_dir: Path | None,
    concurrency: int | None,
    timeout_secs: float | None,
    fixture_mode: bool,
    verbose: int,
) -> None:
    """Free disk space by replacing files that are still on the web with recipes."""
    from ..main import configure_logging

    try:
        cfg = Config(config_file).override(
            scan={"fixture_mode": fixture_mode or None},
            web={"concurrency": concurrency, "timeout_secs": timeout_secs},
            purge={"store_dir": store_dir},
        )
    except ConfigError as e:
        raise click.UsageError(str(e)) from e
    configure_logging(cfg.logging.log_level, verbose)
    ctx.obj = build_container(cfg)


@cli.command()
@click.option(
    "--root",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("."),
    show_default=True,
    help="Directory to scan.",
)
@click.option("--top", type=click.IntRange(min=1), help="Number of largest files.")
@click.option("--json", "as_json", is_flag=True, help="Print a JSON document.")
@click.pass_obj
@handle_errors
def scan(container: Container, root: Path, top: int | None, as_json: bool) -> None:
    """List the largest files under ROOT with their download origin."""
    cfg = container.config()
    result = container.scanner().scan_with_origin(root, top)
    if as_json:
        _echo_json(scan_document(result, cfg.categories))
        return
    if not result.records:
        _note(messages.NO_FILES)
    else:
        container.response_formatter().print_scan(result, cfg.categories)
    if result.skipped_count:
        _note(messages.SKIPPED_LINE.format(count=result.skipped_count))


def _ask_approvals(
    candidates: list[PurgeCandidate], formatter: ResponseFormatter
) -> dict[Path, Decision]:
    """Per-candidate approval loop: yes, no, all remaining, quit."""
    approvals: dict[Path, Decision] = {}
    approve_rest = False
    for index, candidate in enumerate(candidates, start=1):
        path = candidate.record.path
        if approve_rest:
            approvals[path] = Decision.APPROVE
            continue
        click.echo(formatter.candidate_text(index, candidate), err=True)
        try:
            answer = click.prompt(
                messages.APPROVAL_PROMPT,
                type=click.Choice(["y", "n", "a", "q"], case_sensitive=False),
                default="n",
                show_choices=False,
                err=True,
            ).lower()
        except click.Abort:
            break
        if answer == "q":
            break
        if answer == "a":
            approve_rest = True
        approvals[path] = Decision.APPROVE if answer in ("y", "a") else Decision.DENY
    logger.info(f"{sum(d is Decision.APPROVE for d in approvals.values())} candidates approved")
    return approvals


def _report_target(plan: PurgePlan, as_json: bool) -> None:
    if plan.target_free_bytes is None:
        return
    target = format_bytes(plan.target_free_bytes)
    if plan.target_met:
        _note(messages.TARGET_MET.format(target=target, examined=plan.examined), as_json)
    else:
        projected = format_bytes(plan.projected_public_savings)
        _note(messages.TARGET_NOT_MET.format(target=target, projected=projected), as_json)


@cli.command()
@click.option(
    "--root",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("."),
    show_default=True,
    help="Directory to purge from.",
)
@click.option("--top", type=click.IntRange(min=1), help="Number of largest files to examine.")
@click.option("--target-free", type=SIZE, help="Stop planning once this much is freed (10GB).")
@click.option("--yes", "-y", is_flag=True, help="Approve every publicly redownloadable file.")
@click.option("--allow-auth", is_flag=True, help="Also purge files that need sign-in.")
@click.option("--trash", is_flag=True, help="Move purged files to .webpurge-trash/.")
@click.option("--json", "as_json", is_flag=True, help="Print a JSON document.")
@click.pass_obj
@handle_errors
def purge(
    container: Container,
    root: Path,
    top: int | None,
    target_free: int | None,
    yes: bool,
    allow_auth: bool,
    trash: bool,
    as_json: bool,
) -> None:
    """Replace large redownloadable files with encrypted recipes."""
    cfg = container.config()
    ctx = click.get_current_context()
    target = target_free if target_free is not None else cfg.purge.target_free
    allow_auth = allow_auth or cfg.purge.allow_auth
    trash = trash or cfg.purge.trash
    engine = container.engine()
    formatter = container.response_formatter()

    async def plan_files() -> PurgePlan:
        async with create_fetcher(cfg) as fetcher:
            return await engine.plan_purge(root, fetcher, target, top)

    plan = asyncio.run(plan_files())
    if not plan.candidates:
        _note(messages.NO_CANDIDATES.format(examined=plan.examined), as_json)
        if as_json:
            _echo_json(purge_document(plan, None, allow_auth))
        return
    if not as_json:
        formatter.print_plan(plan, allow_auth)
    _report_target(plan, as_json)

    eligible = [c for c in plan.candidates if c.is_eligible(allow_auth)]
    if not eligible:
        _note(messages.NO_ELIGIBLE, as_json)
        if as_json:
            _echo_json(purge_document(plan, None, allow_auth))
        return

    approvals = engine.auto_approvals(plan) if yes else _ask_approvals(eligible, formatter)
    if not any(d is Decision.APPROVE for d in approvals.values()):
        _note(messages.NOTHING_APPROVED, as_json)
        if as_json:
            _echo_json(purge_document(plan, None, allow_auth))
        return

    passphrase = resolve_passphrase(cfg.purge.passphrase_env, confirm=True)
    store = container.store()
    _open_store(store, create=True)
    result = asyncio.run(
        engine.execute_purge(plan, approvals, store, passphrase, allow_auth=allow_auth, trash=trash)
    )

    if as_json:
        _echo_json(purge_document(plan, result, allow_auth))
    else:
        formatter.print_purge_result(result)
        target_part = (
            messages.PURGE_TARGET_PART.format(target=format_bytes(target))
            if target is not None
            else ""
        )
        _note(
            messages.PURGE_SUMMARY.format(
                purged=result.purged_count,
                approved=sum(d is Decision.APPROVE for d in approvals.values()),
                removed=format_bytes(result.bytes_removed),
                freed=format_bytes(result.bytes_freed),
                target_part=target_part,
                failed=result.failed_count,
            )
        )
    if result.failed_count:
        ctx.exit(messages.EXIT_PARTIAL)


@cli.command()
@click.option("--json", "as_json", is_flag=True, help="Print a JSON document.")
@click.pass_obj
@handle_errors
def maintain(container: Container, as_json: bool) -> None:
    """Check that every stored recipe can still be redownloaded."""
    cfg = container.config()
    ctx = click.get_current_context()
    store = container.store()
    if not store.initialized:
        _note(messages.NO_RECIPES, as_json)
        return
    _open_store(store)
    if all(e.status is RecipeStatus.RESTORED for e in store.list()):
        _note(messages.NO_RECIPES, as_json)
        return

    passphrase = resolve_passphrase(cfg.purge.passphrase_env)
    engine = container.engine()

    async def run_maintenance() -> MaintenanceReport:
        async with create_fetcher(cfg) as fetcher:
            return await engine.maintain(store, fetcher, passphrase)

    report = asyncio.run(run_maintenance())
    if as_json:
        _echo_json(maintenance_document(report))
    else:
        container.response_formatter().print_maintenance(report)
        _note(
            messages.MAINTENANCE_SUMMARY.format(
                current=report.current, stale=report.stale, total=len(report.items)
            )
        )
        if report.stale:
            _note(messages.STALE_HEADER)
            for item in report.stale_items:
                _note(
                    messages.STALE_LINE.format(
                        recipe_id=item.recipe_id, file_name=item.file_name, reason=item.reason
                    )
                )
    if report.stale:
        ctx.exit(messages.EXIT_PARTIAL)


@cli.command()
@click.argument("recipe_id", required=False)
@click.option("--all", "restore_all", is_flag=True, help="Restore every purged file.")
@click.option(
    "--dest",
    type=click.Path(path_type=Path),
    help="Output file or directory instead of the original path.",
)
@click.option("--force", is_flag=True, help="Overwrite an existing file.")
@click.option("--json", "as_json", is_flag=True, help="Print a JSON document.")
@click.pass_obj
@handle_errors
def restore(
    container: Container,
    recipe_id: str | None,
    restore_all: bool,
    dest: Path | None,
    force: bool,
    as_json: bool,
) -> None:
    """Download purged files again and verify them against their recipe.

    RECIPE_ID may also be the path of the .wrcp-ref marker a purged file left
    behind; the recipe is then read from the store the marker names.
    """
    if bool(recipe_id) == restore_all:
        raise click.UsageError(messages.ERROR_RESTORE_TARGET)
    cfg = container.config()
    ctx = click.get_current_context()
    store = container.store()
    if recipe_id and recipe_id.endswith(MARKER_SUFFIX) and Path(recipe_id).is_file():
        try:
            recipe_id, marker_store = read_marker(recipe_id)
        except ValueError as e:
            raise click.BadParameter(str(e), param_hint="RECIPE_ID") from e
        if marker_store != store.store_dir:
            store = RecipeStore(marker_store)
    if restore_all and not store.initialized:
        _note(messages.NOTHING_TO_RESTORE, as_json)
        return
    _open_store(store)

    if recipe_id:
        store.entry(recipe_id)
        recipe_ids = [recipe_id]
    else:
        recipe_ids = [e.recipe_id for e in store.list() if e.status is not RecipeStatus.RESTORED]
        if not recipe_ids:
            _note(messages.NOTHING_TO_RESTORE, as_json)
            return
        if dest is not None:
            dest.mkdir(parents=True, exist_ok=True)

    passphrase = resolve_passphrase(cfg.purge.passphrase_env)
    engine = container.engine()
    restored: list[RestoreResult] = []
    failed: list[tuple[str, str]] = []

    async def run_restores() -> None:
        async with create_fetcher(cfg) as fetcher:
            for rid in recipe_ids:
                try:
                    restored.append(
                        await engine.reconstitute(rid, store, fetcher, passphrase, dest, force)
                    )
                except RestoreError as e:
                    logger.error(f"Restore of {rid} failed: {e}")
                    failed.append((rid, str(e)))

    asyncio.run(run_restores())
    if as_json:
        _echo_json(restore_document(restored, failed))
    else:
        for result in restored:
            _note(
                messages.RESTORED_LINE.format(
                    path=result.output_path, url=result.url_used, mode=result.mode.value
                )
            )
        for rid, reason in failed:
            _note(messages.RESTORE_FAILED_LINE.format(recipe_id=rid, reason=reason))
        _note(messages.RESTORE_SUMMARY.format(restored=len(restored), total=len(recipe_ids)))
    if failed:
        ctx.exit(messages.EXIT_PARTIAL)


@cli.command()
@click.argument(
    "corpus_file", required=False, type=click.Path(dir_okay=False, path_type=Path)
)
@click.option(
    "--root", type=click.Path(file_okay=False, path_type=Path), help="Scan a directory instead."
)
@click.option("--top", type=click.IntRange(min=1), help="Number of largest files under --root.")
@click.option("--offline", is_flag=True, help="Only the summary; no web checks.")
@click.option(
    "--presume-local", is_flag=True, help="Count local sources as redownloadable with sign-in."
)
@click.option("--json", "as_json", is_flag=True, help="Print a JSON document.")
@click.pass_obj
@handle_errors
def report(
    container: Container,
    corpus_file: Path | None,
    root: Path | None,
    top: int | None,
    offline: bool,
    presume_local: bool,
    as_json: bool,
) -> None:
    """Summarize a corpus of largest files and how much of it is redownloadable."""
    if (corpus_file is None) == (root is None):
        raise click.UsageError(messages.ERROR_REPORT_SOURCE)
    cfg = container.config()
    if presume_local:
        cfg.override(web={"presume_local": True})

    if corpus_file is not None:
        records = load_corpus(corpus_file)
    else:
        records = corpus_from_scan(container.scanner().scan_with_origin(root, top))
    summary = summarize_scan(records)

    redownloadability = None
    if not offline:
        checker = container.web_checker()

        async def assess() -> list[AssessedFile]:
            async with create_fetcher(cfg) as fetcher:
                return await assess_corpus(records, checker, fetcher)

        redownloadability = build_report(asyncio.run(assess()), cfg.categories)

    if as_json:
        _echo_json(report_document(summary, redownloadability))
        return
    formatter = container.response_formatter()
    formatter.print_summary(summary, messages.SUMMARY_TITLE)
    if redownloadability is None:
        return
    formatter.print_redownloadability(redownloadability.ru, messages.RU_TABLE_TITLE)
    formatter.print_redownloadability(redownloadability.hu, messages.HU_TABLE_TITLE)
    combined = redownloadability.combined
    _note(
        messages.COMBINED_LINE.format(
            public=format_bytes(combined.public_bytes),
            auth=format_bytes(combined.auth_bytes),
            per_participant=format_mean_std(
                combined.per_participant_any.mean_all, combined.per_participant_any.std_all
            ),
        )
    )


@cli.group()
def recipe() -> None:
    """Inspect stored recipes."""


@recipe.command("list")
@click.option("--json", "as_json", is_flag=True, help="Print a JSON document.")
@click.pass_obj
@handle_errors
def recipe_list(container: Container, as_json: bool) -> None:
    """List the recipe store index (no passphrase needed)."""
    store = container.store()
    entries = []
    if store.initialized:
        _open_store(store)
        entries = store.list()
    if as_json:
        _echo_json(recipes_document(entries))
    elif not entries:
        _note(messages.NO_STORE_ENTRIES)
    else:
        container.response_formatter().print_recipes(entries)


@recipe.command("show")
@click.argument("recipe_id")
@click.pass_obj
@handle_errors
def recipe_show(container: Container, recipe_id: str) -> None:
    """Decrypt one recipe and print it as JSON."""
    cfg = container.config()
    store = container.store()
    _open_store(store)
    entry = store.entry(recipe_id)
    passphrase = resolve_passphrase(cfg.purge.passphrase_env)
    decrypted = container.engine().load_recipe(store, recipe_id, passphrase)
    document = decrypted.model_dump(mode="json")
    document["recipe_id"] = decrypted.recipe_id
    document["status"] = entry.status.value
    _echo_json(document)

