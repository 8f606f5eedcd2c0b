"""Global test configuration and fixtures.

Provides shared fixtures for all test levels: an isolated environment,
configurations pointing at temporary stores, a loopback mock web with a
request log, and a fetcher wired to it.
"""

import os
from datetime import datetime

try:
    from datetime import UTC
except ImportError:  # Python < 3.11
    from datetime import timezone

    UTC = timezone.utc
from pathlib import Path

import pytest

from app.config import Config, WebConfig
from app.services import recipe_crypto
from app.webcheck.fetcher import HttpFetcher
from tests_new.utils.mock_web import MockWeb

# Test constants
TEST_PASSPHRASE = "correct horse battery staple"
TEST_NOW = datetime(2024, 6, 1, 12, 0, tzinfo=UTC)
FIXTURES_DIR = Path(__file__).parent / "fixtures"


@pytest.fixture(autouse=True)
def test_environment(monkeypatch):
    """Remove WEBPURGE_* variables so tests never see a developer's settings."""
    for key in list(os.environ):
        if key.startswith("WEBPURGE_"):
            monkeypatch.delenv(key)
    yield


@pytest.fixture
def fast_kdf(monkeypatch):
    """Cheap scrypt cost so store and engine tests stay fast."""
    monkeypatch.setattr(recipe_crypto, "SCRYPT_N", 2**10)


@pytest.fixture
def passphrase(monkeypatch):
    """Recipe passphrase supplied through the environment."""
    monkeypatch.setenv("WEBPURGE_PASSPHRASE", TEST_PASSPHRASE)
    return TEST_PASSPHRASE


@pytest.fixture
def web_config():
    """Short timeouts for the loopback mock web."""
    return WebConfig(timeout_secs=0.5, concurrency=8, max_redirects=5)


@pytest.fixture
def app_config(tmp_path, web_config):
    """Full configuration with the store under tmp_path and fixture-mode scanning."""
    cfg = Config()
    cfg.override(
        scan={"fixture_mode": True},
        purge={"store_dir": tmp_path / "store"},
    )
    cfg.web = web_config
    return cfg


@pytest.fixture
async def mock_web():
    """Running loopback mock web; every host name resolves to it."""
    web = MockWeb()
    await web.start()
    yield web
    await web.close()


@pytest.fixture
async def fetcher(web_config, mock_web):
    """HttpFetcher whose connections all land on mock_web."""
    async with HttpFetcher(web_config, resolver=mock_web.resolver) as http:
        yield http


@pytest.fixture
def load_fixture_text():
    """Load a fixture file from tests_new/fixtures."""

    def _load(filename: str) -> str:
        return (FIXTURES_DIR / filename).read_text(encoding="utf-8")

    return _load
