"""Fixtures for driving the CLI end to end.

Commands call ``asyncio.run`` themselves, so the mock web runs on its own
event loop in a background thread and the tests stay synchronous.
"""

import asyncio
import threading

import pytest
from click.testing import CliRunner

from app.cli.commands import cli
from app.webcheck.fetcher import HttpFetcher
from tests_new.utils.mock_web import MockWeb


@pytest.fixture
def threaded_web():
    """MockWeb served from a background event loop."""
    loop = asyncio.new_event_loop()
    thread = threading.Thread(target=loop.run_forever, daemon=True)
    thread.start()
    web = MockWeb()
    asyncio.run_coroutine_threadsafe(web.start(), loop).result(timeout=10)
    yield web
    asyncio.run_coroutine_threadsafe(web.close(), loop).result(timeout=10)
    loop.call_soon_threadsafe(loop.stop)
    thread.join(timeout=10)
    loop.close()


@pytest.fixture
def web_fetchers(mocker, threaded_web):
    """Route every fetcher the CLI creates to the threaded mock web."""
    return mocker.patch(
        "app.cli.commands.create_fetcher",
        side_effect=lambda cfg: HttpFetcher(cfg.web, resolver=threaded_web.resolver),
    )


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def store_dir(tmp_path):
    return tmp_path / "store"


@pytest.fixture
def invoke(runner, store_dir, fast_kdf, web_fetchers):
    """Run ``webpurge`` with a temporary store, fixture-mode scanning and short timeouts."""

    def _invoke(*args: str, input: str | None = None):
        return runner.invoke(
            cli,
            ["--store", str(store_dir), "--fixture-mode", "--timeout", "0.5", *args],
            input=input,
        )

    return _invoke
