"""Web availability checks.

Decides whether a recipe's file can still be downloaded byte-identically
through its recorded host URL (HU) or referrer URL (RU). A URL is tried
directly first; when it serves an HTML page instead of the file, the page's
links are probed. Every failure is encoded in the returned ChannelResult.
"""

import asyncio
import logging
from typing import BinaryIO

from ..config import CategoryConfig, WebConfig
from ..core.exceptions import FetchConnectionError, FetchTimeoutError, TooManyRedirectsError
from ..models import (
    Availability,
    AvailabilityOutcome,
    ChannelResult,
    CheckMode,
    OriginMetadata,
    Recipe,
)
from ..services.origin_meta import (
    classify_source,
    has_resource_path,
    is_local_source,
    is_web_url,
    url_host,
)
from ..services.recipe import ContentVerifier
from .fetcher import Fetcher, FetchResponse
from .links import rank_candidates, scrape_links

logger = logging.getLogger(__name__)

LINKS_NOT_RECORDED = "links not recorded"


def _not_rd(url: str, mode: CheckMode, reason: str) -> ChannelResult:
    return ChannelResult(status=Availability.NOT_RD, url_used=url, mode=mode, reason=reason)


class WebChecker:
    """Classifies recipes as not redownloadable, public, or auth-only.

    Checks of distinct recipes may run concurrently (see check_many); each
    check is sequential internally.
    """

    def __init__(self, config: WebConfig, categories: CategoryConfig):
        """Initialize checker.

        Args:
            config: Web settings (probe cap, presume flags, login prefixes).
            categories: Domain lists used for presumed sign-in.
        """
        self.config = config
        self.categories = categories

    def _auth_signal(self, request_url: str, response: FetchResponse) -> str | None:
        if response.status in (401, 403):
            return f"authentication required (HTTP {response.status})"
        if response.redirected:
            final_host = url_host(response.final_url)
            if final_host != url_host(request_url) and final_host.startswith(
                tuple(self.config.login_host_prefixes)
            ):
                return f"redirected to sign-in at {final_host}"
        return None

    async def _probe(
        self,
        url: str,
        recipe: Recipe,
        fetcher: Fetcher,
        sink: BinaryIO | None = None,
    ) -> tuple[ChannelResult, bool]:
        """Fetch url and verify its body against the recipe.

        Returns:
            The result and whether the response was an HTML page that did
            not match.
        """
        mode = CheckMode.DIRECT
        if not is_web_url(url):
            return _not_rd(url, mode, "non-web scheme"), False
        try:
            async with fetcher.open(url) as response:
                auth_reason = self._auth_signal(url, response)
                if auth_reason:
                    result = ChannelResult(
                        status=Availability.RD_WITH_AUTH,
                        url_used=url,
                        mode=mode,
                        reason=auth_reason,
                    )
                    return result, False
                if response.status != 200:
                    return _not_rd(url, mode, f"HTTP {response.status}"), False

                note = ""
                length = response.content_length
                if length is not None and length != recipe.size_bytes:
                    note = f"; content-length {length} differs from size {recipe.size_bytes}"

                verifier = ContentVerifier(recipe)
                if sink is not None:
                    sink.seek(0)
                    sink.truncate()
                async for chunk in response.iter_chunks():
                    if sink is not None:
                        sink.write(chunk)
                    if not verifier.update(chunk):
                        break
                is_page = response.is_html
        except FetchTimeoutError:
            return _not_rd(url, mode, "timeout"), False
        except TooManyRedirectsError:
            return _not_rd(url, mode, "too many redirects"), False
        except FetchConnectionError as e:
            return _not_rd(url, mode, f"connection failed: {e}"), False

        if verifier.matches():
            result = ChannelResult(
                status=Availability.PUBLIC_RD,
                url_used=url,
                mode=mode,
                reason="hash verified" + note,
            )
            return result, False
        reason = verifier.mismatch_reason or "content mismatch"
        return _not_rd(url, mode, reason + note), is_page

    async def check_direct(
        self, url: str, recipe: Recipe, fetcher: Fetcher, sink: BinaryIO | None = None
    ) -> ChannelResult:
        """Fetch url and compare its bytes with the recipe.

        Status 200 streams the body through the recipe's hashes, aborting on
        a partial-hash mismatch. 401/403 or a redirect to a sign-in host is
        RdWithAuth. Other statuses and transport failures are
        NotRedownloadable with the specific reason.

        Args:
            url: URL to fetch.
            recipe: Recipe of the purged file.
            fetcher: Fetcher to use.
            sink: Optional file receiving the streamed bytes.

        Returns:
            ChannelResult with mode direct.
        """
        result, _ = await self._probe(url, recipe, fetcher, sink)
        return result

    async def check_indirect(
        self, page_url: str, recipe: Recipe, fetcher: Fetcher, sink: BinaryIO | None = None
    ) -> ChannelResult:
        """Look for the file among the links of a page.

        Candidates are ranked by exact file name, then extension, and probed
        with check_direct semantics up to the configured probe cap. The first
        verified match wins; a sign-in signal is remembered as fallback.

        Args:
            page_url: Page to scrape.
            recipe: Recipe of the purged file.
            fetcher: Fetcher to use.
            sink: Optional file receiving the winning candidate's bytes.

        Returns:
            ChannelResult with mode indirect.
        """
        mode = CheckMode.INDIRECT
        if not is_web_url(page_url):
            return _not_rd(page_url, mode, "non-web scheme")
        try:
            async with fetcher.open(page_url) as response:
                auth_reason = self._auth_signal(page_url, response)
                if auth_reason:
                    return ChannelResult(
                        status=Availability.RD_WITH_AUTH,
                        url_used=page_url,
                        mode=mode,
                        reason=auth_reason,
                    )
                if response.status != 200:
                    return _not_rd(page_url, mode, f"page HTTP {response.status}")
                if not response.is_html:
                    return _not_rd(page_url, mode, "not an HTML page")
                html = await response.read_text()
                base_url = response.final_url
        except FetchTimeoutError:
            return _not_rd(page_url, mode, "timeout")
        except TooManyRedirectsError:
            return _not_rd(page_url, mode, "too many redirects")
        except FetchConnectionError as e:
            return _not_rd(page_url, mode, f"connection failed: {e}")

        links = [u for u in scrape_links(html, base_url) if u not in (page_url, base_url)]
        candidates = rank_candidates(links, recipe.file_name)[: self.config.max_candidate_probes]
        if not candidates:
            return _not_rd(page_url, mode, "no links on page")

        fallback: ChannelResult | None = None
        for candidate in candidates:
            result, _ = await self._probe(candidate, recipe, fetcher, sink)
            if result.status is Availability.PUBLIC_RD:
                logger.debug(f"Found {recipe.file_name} via {page_url} at {candidate}")
                return result.model_copy(update={"mode": mode})
            if result.status is Availability.RD_WITH_AUTH and fallback is None:
                fallback = result.model_copy(update={"mode": mode})
        if fallback is not None:
            return fallback
        reason = f"no matching file among {len(candidates)} linked candidates"
        return _not_rd(page_url, mode, reason)

    async def check_channel(
        self, url: str, recipe: Recipe, fetcher: Fetcher, sink: BinaryIO | None = None
    ) -> ChannelResult:
        """Evaluate one recorded URL: presumptions, then direct, then indirect.

        Local sources are presumed reachable with sign-in only when
        presume_local is set. With presume_auth, collaboration, webmail and
        big-tech CSP URLs that point below the site root are classified
        RdWithAuth without fetching.
        """
        if is_local_source(url):
            if self.config.presume_local:
                return ChannelResult(
                    status=Availability.RD_WITH_AUTH,
                    url_used=url,
                    mode=CheckMode.PRESUMED,
                    reason="local source presumed reachable by its owner",
                )
            return _not_rd(url, CheckMode.PRESUMED, "local source")
        if not is_web_url(url):
            return _not_rd(url, CheckMode.DIRECT, "non-web scheme")

        if self.config.presume_auth and has_resource_path(url):
            category = classify_source(OriginMetadata(host_url=url), "", self.categories)
            if category in self.categories.presume_auth_categories:
                return ChannelResult(
                    status=Availability.RD_WITH_AUTH,
                    url_used=url,
                    mode=CheckMode.PRESUMED,
                    reason=f"sign-in presumed for {category.value}",
                )

        direct, is_page = await self._probe(url, recipe, fetcher, sink)
        if direct.status is not Availability.NOT_RD or not is_page:
            return direct
        return await self.check_indirect(url, recipe, fetcher, sink)

    async def check_availability(
        self,
        recipe: Recipe,
        fetcher: Fetcher,
        exhaustive: bool = False,
        sink: BinaryIO | None = None,
    ) -> AvailabilityOutcome:
        """Classify a recipe's file over its HU and RU channels.

        HU is evaluated before RU and evaluation stops at the first PublicRd
        unless exhaustive is set. When sink is given it ends up holding the
        bytes of the winning PublicRd channel; exhaustive is ignored then.

        Args:
            recipe: Recipe to check.
            fetcher: Fetcher to use.
            exhaustive: Evaluate RU even after HU verified the file.
            sink: Optional file receiving the downloaded bytes.

        Returns:
            AvailabilityOutcome; never raises for web failures.
        """
        if recipe.host_url is None and recipe.referrer_url is None:
            return AvailabilityOutcome.combine(None, None, reason=LINKS_NOT_RECORDED)

        via_hu: ChannelResult | None = None
        via_ru: ChannelResult | None = None
        if recipe.host_url is not None:
            via_hu = await self.check_channel(recipe.host_url, recipe, fetcher, sink)
            if via_hu.status is Availability.PUBLIC_RD and (not exhaustive or sink is not None):
                return AvailabilityOutcome.combine(via_hu, None)
        if recipe.referrer_url is not None:
            via_ru = await self.check_channel(recipe.referrer_url, recipe, fetcher, sink)
        outcome = AvailabilityOutcome.combine(via_hu, via_ru)
        logger.debug(f"{recipe.file_name}: {outcome.best.value}")
        return outcome

    async def check_many(
        self, recipes: list[Recipe], fetcher: Fetcher, exhaustive: bool = False
    ) -> list[AvailabilityOutcome]:
        """Check several recipes concurrently, bounded by config.concurrency.

        Returns:
            Outcomes in input order. Unexpected failures become
            NotRedownloadable outcomes carrying the error.
        """
        semaphore = asyncio.Semaphore(self.config.concurrency)

        async def check_one(recipe: Recipe) -> AvailabilityOutcome:
            async with semaphore:
                return await self.check_availability(recipe, fetcher, exhaustive)

        results = await asyncio.gather(*(check_one(r) for r in recipes), return_exceptions=True)
        outcomes: list[AvailabilityOutcome] = []
        for recipe, result in zip(recipes, results, strict=True):
            if isinstance(result, BaseException):
                logger.error(f"Availability check failed for {recipe.file_name}: {result}")
                outcomes.append(
                    AvailabilityOutcome.combine(None, None, reason=f"check failed: {result}")
                )
            else:
                outcomes.append(result)
        return outcomes
