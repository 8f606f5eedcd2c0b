"""Integration tests for web availability checks against the loopback mock web."""

import hashlib
import random
import tracemalloc
from datetime import datetime

try:
    from datetime import UTC
except ImportError:  # Python < 3.11
    from datetime import timezone

    UTC = timezone.utc

import pytest

from app.config import Config
from app.models import Availability, CheckMode, Recipe
from app.webcheck.availability import LINKS_NOT_RECORDED, WebChecker
from tests_new.utils.fetchers import CountingFetcher, RefusingFetcher
from tests_new.utils.mock_web import Route

NOW = datetime(2024, 6, 1, tzinfo=UTC)
MIB = 1_048_576
FILE_URL = "http://cdn.example.net/files/tool.zip"
PAGE_URL = "http://www.vendor.example/downloads/"


def make_recipe(
    data: bytes,
    hu: str | None = FILE_URL,
    ru: str | None = None,
    name: str = "tool.zip",
    partial_len: int = MIB,
) -> Recipe:
    return Recipe(
        created_at=NOW,
        last_maintained_at=NOW,
        referrer_url=ru,
        host_url=hu,
        original_path=f"/home/me/Downloads/{name}",
        file_name=name,
        size_bytes=len(data),
        hash_full=hashlib.sha256(data).hexdigest(),
        partial_hash=hashlib.sha256(data[:partial_len]).hexdigest() if partial_len else None,
        partial_len=partial_len,
    )


def page_linking(*hrefs: str) -> str:
    anchors = "\n".join(f'<a href="{href}">{href}</a>' for href in hrefs)
    return f"<html><body><h1>Downloads</h1>\n{anchors}\n</body></html>"


@pytest.fixture
def checker(web_config):
    return WebChecker(web_config, Config().categories)


@pytest.fixture
def payload():
    return b"zip archive payload " * 4096


class TestCheckDirect:
    """Test direct fetches of a recorded URL."""

    async def test_identical_bytes_are_public(self, checker, mock_web, fetcher, payload):
        mock_web.add_file(FILE_URL, payload)

        result = await checker.check_direct(FILE_URL, make_recipe(payload), fetcher)

        assert result.status is Availability.PUBLIC_RD
        assert result.mode is CheckMode.DIRECT
        assert result.url_used == FILE_URL

    @pytest.mark.parametrize("status", [401, 403])
    async def test_auth_status(self, checker, mock_web, fetcher, payload, status):
        mock_web.add_status(FILE_URL, status)

        result = await checker.check_direct(FILE_URL, make_recipe(payload), fetcher)

        assert result.status is Availability.RD_WITH_AUTH
        assert str(status) in result.reason

    async def test_redirect_to_sign_in_host(self, checker, mock_web, fetcher, payload):
        mock_web.add_redirect(FILE_URL, "http://login.example.net/signin?next=tool.zip")
        mock_web.add_page("http://login.example.net/signin?next=tool.zip", "<form>sign in</form>")

        result = await checker.check_direct(FILE_URL, make_recipe(payload), fetcher)

        assert result.status is Availability.RD_WITH_AUTH
        assert "login.example.net" in result.reason

    async def test_plain_redirect_is_followed(self, checker, mock_web, fetcher, payload):
        mirror = "http://mirror.example.net/tool.zip"
        mock_web.add_redirect(FILE_URL, mirror)
        mock_web.add_file(mirror, payload)

        result = await checker.check_direct(FILE_URL, make_recipe(payload), fetcher)

        assert result.status is Availability.PUBLIC_RD

    async def test_not_found(self, checker, fetcher, payload):
        result = await checker.check_direct(FILE_URL, make_recipe(payload), fetcher)

        assert result.status is Availability.NOT_RD
        assert result.reason == "HTTP 404"

    async def test_timeout(self, checker, mock_web, fetcher, payload):
        mock_web.add_timeout(FILE_URL, delay=1.5)

        result = await checker.check_direct(FILE_URL, make_recipe(payload), fetcher)

        assert result.status is Availability.NOT_RD
        assert result.reason == "timeout"

    async def test_redirect_loop(self, checker, mock_web, fetcher, payload):
        mock_web.add_redirect(FILE_URL, "http://cdn.example.net/files/other.zip")
        mock_web.add_redirect("http://cdn.example.net/files/other.zip", FILE_URL)

        result = await checker.check_direct(FILE_URL, make_recipe(payload), fetcher)

        assert result.status is Availability.NOT_RD
        assert result.reason == "too many redirects"

    async def test_changed_content(self, checker, mock_web, fetcher, payload):
        mock_web.add_file(FILE_URL, payload[:-1] + b"!")

        result = await checker.check_direct(FILE_URL, make_recipe(payload), fetcher)

        assert result.status is Availability.NOT_RD
        assert result.reason.startswith("content mismatch")

    async def test_connection_failure(self, checker, payload):
        result = await checker.check_direct(FILE_URL, make_recipe(payload), RefusingFetcher())

        assert result.status is Availability.NOT_RD
        assert result.reason.startswith("connection failed")

    async def test_partial_hash_mismatch_stops_download(self, checker, mock_web, fetcher):
        original = bytes(range(256)) * (8 * MIB // 256)
        changed = b"\x00" + original[1:]
        mock_web.add_file(FILE_URL, changed)
        counting = CountingFetcher(fetcher)

        result = await checker.check_direct(FILE_URL, make_recipe(original), counting)

        assert result.status is Availability.NOT_RD
        assert result.reason == "content mismatch (fail-fast)"
        assert counting.bytes_read[FILE_URL] <= MIB + checker.config.chunk_size

    async def test_slow_file_is_bounded_per_read(self, checker, mock_web, fetcher):
        data = bytes(range(256)) * 8
        mock_web.add_trickle(
            FILE_URL, data, chunk_size=64, chunk_delay=0.05, content_type="application/zip"
        )

        result = await checker.check_direct(FILE_URL, make_recipe(data), fetcher)

        assert checker.config.timeout_secs < 32 * 0.05
        assert result.status is Availability.PUBLIC_RD

    @pytest.mark.slow
    async def test_large_body_is_hashed_in_bounded_memory(self, checker, mock_web, fetcher):
        block = random.Random(7).randbytes(MIB)
        repeat = 256
        full = hashlib.sha256()
        for _ in range(repeat):
            full.update(block)
        recipe = Recipe(
            created_at=NOW,
            last_maintained_at=NOW,
            host_url=FILE_URL,
            original_path="/home/me/Downloads/disk.img",
            file_name="disk.img",
            size_bytes=repeat * MIB,
            hash_full=full.hexdigest(),
            partial_hash=hashlib.sha256(block).hexdigest(),
            partial_len=MIB,
        )
        mock_web.add_repeated(FILE_URL, block, repeat)
        counting = CountingFetcher(fetcher)

        tracemalloc.start()
        try:
            result = await checker.check_direct(FILE_URL, recipe, counting)
            _, peak = tracemalloc.get_traced_memory()
        finally:
            tracemalloc.stop()

        assert result.status is Availability.PUBLIC_RD
        assert counting.bytes_read[FILE_URL] == repeat * MIB
        assert peak < 16 * MIB

    async def test_sink_receives_verified_bytes(
        self, checker, mock_web, fetcher, payload, tmp_path
    ):
        mock_web.add_file(FILE_URL, payload)

        with open(tmp_path / "download.part", "w+b") as sink:
            result = await checker.check_direct(FILE_URL, make_recipe(payload), fetcher, sink)

        assert result.status is Availability.PUBLIC_RD
        assert (tmp_path / "download.part").read_bytes() == payload


class TestCheckIndirect:
    """Test finding a file through the links of a download page."""

    async def test_file_found_via_page_link(self, checker, mock_web, fetcher, payload):
        mock_web.add_page(
            PAGE_URL,
            page_linking("/about", "/files/readme.txt", FILE_URL, "/files/old-tool.zip"),
        )
        mock_web.add_file(FILE_URL, payload)
        recipe = make_recipe(payload, hu=None, ru=PAGE_URL)

        result = await checker.check_channel(PAGE_URL, recipe, fetcher)

        assert result.status is Availability.PUBLIC_RD
        assert result.mode is CheckMode.INDIRECT
        assert result.url_used == FILE_URL
        assert mock_web.count(FILE_URL) == 1
        assert mock_web.count("http://www.vendor.example/about") == 0

    async def test_slow_page_times_out(self, checker, mock_web, fetcher, payload):
        html = page_linking(FILE_URL) + "<!-- padding -->" * 100
        mock_web.add_trickle(PAGE_URL, html.encode("utf-8"), chunk_size=64, chunk_delay=0.1)
        mock_web.add_file(FILE_URL, payload)
        recipe = make_recipe(payload, hu=None, ru=PAGE_URL)

        result = await checker.check_indirect(PAGE_URL, recipe, fetcher)

        assert result.status is Availability.NOT_RD
        assert result.reason == "timeout"
        assert mock_web.count(FILE_URL) == 0

    async def test_probe_cap(self, checker, mock_web, fetcher, payload):
        links = [f"/files/build-{i}.zip" for i in range(15)]
        mock_web.add_page(PAGE_URL, page_linking(*links))
        capped = WebChecker(
            checker.config.model_copy(update={"max_candidate_probes": 3}), checker.categories
        )

        result = await capped.check_indirect(PAGE_URL, make_recipe(payload), fetcher)

        assert result.status is Availability.NOT_RD
        assert "3 linked candidates" in result.reason
        probed = [r for r in mock_web.requests if r.path.startswith("/files/")]
        assert len(probed) == 3

    async def test_sign_in_link_is_fallback(self, checker, mock_web, fetcher, payload):
        mock_web.add_page(PAGE_URL, page_linking("/members/tool.zip"))
        mock_web.add_status("http://www.vendor.example/members/tool.zip", 401)

        result = await checker.check_indirect(PAGE_URL, make_recipe(payload), fetcher)

        assert result.status is Availability.RD_WITH_AUTH
        assert result.mode is CheckMode.INDIRECT

    async def test_page_without_links(self, checker, mock_web, fetcher, payload):
        mock_web.add_page(PAGE_URL, "<p>Coming soon</p>")

        result = await checker.check_indirect(PAGE_URL, make_recipe(payload), fetcher)

        assert result.status is Availability.NOT_RD
        assert result.reason == "no links on page"

    async def test_not_a_page(self, checker, mock_web, fetcher, payload):
        mock_web.add_file(PAGE_URL, b"binary")

        result = await checker.check_indirect(PAGE_URL, make_recipe(payload), fetcher)

        assert result.reason == "not an HTML page"


class TestCheckChannel:
    """Test presumptions applied before any request."""

    async def test_collaboration_path_presumed_auth(self, checker, mock_web, fetcher, payload):
        url = "http://contoso.sharepoint.com/sites/team/Shared%20Documents/tool.zip"

        result = await checker.check_channel(url, make_recipe(payload, hu=url), fetcher)

        assert result.status is Availability.RD_WITH_AUTH
        assert result.mode is CheckMode.PRESUMED
        assert mock_web.requests == []

    async def test_collaboration_root_is_fetched(self, checker, mock_web, fetcher, payload):
        url = "http://teams.microsoft.com/"

        result = await checker.check_channel(url, make_recipe(payload, hu=url), fetcher)

        assert result.status is Availability.NOT_RD
        assert mock_web.count(url) == 1

    async def test_presume_auth_off(self, web_config, mock_web, fetcher, payload):
        checker = WebChecker(
            web_config.model_copy(update={"presume_auth": False}), Config().categories
        )
        url = "http://outlook.office.com/owa/service.svc/s/GetFileAttachment?id=1"

        result = await checker.check_channel(url, make_recipe(payload, hu=url), fetcher)

        assert result.status is Availability.NOT_RD
        assert mock_web.count(url) == 1

    @pytest.mark.parametrize(
        "presume_local,expected", [(False, "NotRedownloadable"), (True, "RdWithAuth")]
    )
    async def test_local_sources(self, web_config, fetcher, payload, presume_local, expected):
        checker = WebChecker(
            web_config.model_copy(update={"presume_local": presume_local}), Config().categories
        )
        url = "C:\\Users\\me\\Downloads\\tool.zip"

        result = await checker.check_channel(url, make_recipe(payload, hu=None, ru=url), fetcher)

        assert result.status.value == expected
        assert result.mode is CheckMode.PRESUMED

    async def test_application_scheme(self, checker, fetcher, payload):
        url = "chrome-extension://abcdef/tool.zip"

        result = await checker.check_channel(url, make_recipe(payload, hu=url), fetcher)

        assert result.status is Availability.NOT_RD
        assert result.reason == "non-web scheme"


class TestCheckAvailability:
    """Test channel order and outcome combination."""

    async def test_hu_public_stops_before_ru(self, checker, mock_web, fetcher, payload):
        mock_web.add_file(FILE_URL, payload)
        mock_web.add_page(PAGE_URL, page_linking(FILE_URL))

        outcome = await checker.check_availability(make_recipe(payload, ru=PAGE_URL), fetcher)

        assert outcome.best is Availability.PUBLIC_RD
        assert outcome.via_ru is None
        assert mock_web.count(PAGE_URL) == 0

    async def test_exhaustive_checks_both(self, checker, mock_web, fetcher, payload):
        mock_web.add_file(FILE_URL, payload)
        mock_web.add_page(PAGE_URL, page_linking(FILE_URL))

        outcome = await checker.check_availability(
            make_recipe(payload, ru=PAGE_URL), fetcher, exhaustive=True
        )

        assert outcome.via_hu.status is Availability.PUBLIC_RD
        assert outcome.via_ru.status is Availability.PUBLIC_RD
        assert outcome.via_ru.mode is CheckMode.INDIRECT

    async def test_ru_rescues_dead_hu(self, checker, mock_web, fetcher, payload):
        mirror = "http://mirror.example.net/pub/tool.zip"
        mock_web.add_page(PAGE_URL, page_linking(mirror))
        mock_web.add_file(mirror, payload)

        outcome = await checker.check_availability(make_recipe(payload, ru=PAGE_URL), fetcher)

        assert outcome.via_hu.status is Availability.NOT_RD
        assert outcome.best is Availability.PUBLIC_RD
        assert outcome.winning is outcome.via_ru

    async def test_public_beats_auth(self, checker, mock_web, fetcher, payload):
        mock_web.add_status(FILE_URL, 401)
        mock_web.add_page(PAGE_URL, page_linking("http://mirror.example.net/tool.zip"))
        mock_web.add_file("http://mirror.example.net/tool.zip", payload)

        outcome = await checker.check_availability(make_recipe(payload, ru=PAGE_URL), fetcher)

        assert outcome.via_hu.status is Availability.RD_WITH_AUTH
        assert outcome.best is Availability.PUBLIC_RD

    async def test_no_links_recorded(self, checker, fetcher, payload):
        outcome = await checker.check_availability(make_recipe(payload, hu=None), fetcher)

        assert outcome.best is Availability.NOT_RD
        assert outcome.reason == LINKS_NOT_RECORDED
        assert outcome.via_hu is None and outcome.via_ru is None

    async def test_check_many_keeps_order(self, checker, mock_web, fetcher):
        datas = [f"file {i}".encode() * 100 for i in range(6)]
        recipes = []
        for i, data in enumerate(datas):
            url = f"http://cdn.example.net/files/f{i}.bin"
            if i % 2 == 0:
                mock_web.add_file(url, data)
            recipes.append(make_recipe(data, hu=url, name=f"f{i}.bin"))

        outcomes = await checker.check_many(recipes, fetcher)

        assert [o.best for o in outcomes] == [
            Availability.PUBLIC_RD,
            Availability.NOT_RD,
        ] * 3

    async def test_check_many_respects_concurrency(self, web_config, mock_web, fetcher):
        checker = WebChecker(web_config.model_copy(update={"concurrency": 3}), Config().categories)
        recipes = []
        for i in range(10):
            data = f"slow file {i}".encode() * 100
            url = f"http://cdn.example.net/slow/f{i}.bin"
            mock_web.add(url, Route(body=data, delay=0.2))
            recipes.append(make_recipe(data, hu=url, name=f"f{i}.bin"))

        outcomes = await checker.check_many(recipes, fetcher)

        assert all(o.best is Availability.PUBLIC_RD for o in outcomes)
        assert 1 < mock_web.peak_in_flight <= 3
