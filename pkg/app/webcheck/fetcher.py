"""HTTP fetching abstraction.

Defines the fetcher protocol the availability checker depends on, the
streamed response type it yields, and the aiohttp-backed implementation.
Transport failures are raised as FetchError subclasses.
"""

import asyncio
import logging
from collections.abc import AsyncIterator
from contextlib import AbstractAsyncContextManager, asynccontextmanager
from typing import Protocol

import aiohttp
from aiohttp.abc import AbstractResolver

from ..config import WebConfig
from ..core.exceptions import FetchConnectionError, FetchTimeoutError, TooManyRedirectsError

logger = logging.getLogger(__name__)

MAX_PAGE_BYTES = 5 * 1024 * 1024


class FetchResponse:
    """Response to one GET, with a body that can be consumed once.

    Attributes:
        status: HTTP status of the final response.
        final_url: URL after redirects.
        headers: Response headers with lower-cased names.
        history: URLs of the responses that redirected, in order.
        page_timeout: Seconds read_text may take in total, None for no bound.
    """

    def __init__(
        self,
        status: int,
        final_url: str,
        headers: dict[str, str],
        body: AsyncIterator[bytes],
        history: list[str] | None = None,
        page_timeout: float | None = None,
    ):
        self.status = status
        self.final_url = final_url
        self.headers = headers
        self.history = history or []
        self.page_timeout = page_timeout
        self._body = body
        self._consumed = False

    @property
    def redirected(self) -> bool:
        return bool(self.history)

    @property
    def content_length(self) -> int | None:
        value = self.headers.get("content-length")
        try:
            return int(value) if value is not None else None
        except ValueError:
            return None

    @property
    def content_type(self) -> str:
        return self.headers.get("content-type", "").split(";")[0].strip().lower()

    @property
    def is_html(self) -> bool:
        return self.content_type in ("text/html", "application/xhtml+xml")

    @property
    def charset(self) -> str:
        for param in self.headers.get("content-type", "").split(";")[1:]:
            key, _, value = param.partition("=")
            if key.strip().lower() == "charset" and value.strip():
                return value.strip().strip('"')
        return "utf-8"

    async def iter_chunks(self) -> AsyncIterator[bytes]:
        """Yield body chunks.

        Raises:
            RuntimeError: Body was already consumed.
        """
        if self._consumed:
            raise RuntimeError("response body already consumed")
        self._consumed = True
        async for chunk in self._body:
            yield chunk

    async def read_text(self, limit: int = MAX_PAGE_BYTES) -> str:
        """Read at most limit bytes of the body and decode them.

        Raises:
            FetchTimeoutError: The body took longer than page_timeout.
        """
        data = bytearray()
        try:
            async with asyncio.timeout(self.page_timeout):
                async for chunk in self.iter_chunks():
                    data.extend(chunk)
                    if len(data) >= limit:
                        break
        except TimeoutError as e:
            raise FetchTimeoutError(f"page not read within {self.page_timeout}s") from e
        try:
            return bytes(data[:limit]).decode(self.charset, errors="replace")
        except LookupError:
            return bytes(data[:limit]).decode("utf-8", errors="replace")


class Fetcher(Protocol):
    """Interface for fetching URLs.

    Implementations must be safe to use from concurrent tasks.
    """

    def open(self, url: str) -> AbstractAsyncContextManager[FetchResponse]:
        """Open a GET request, following redirects.

        Args:
            url: http(s) URL.

        Returns:
            Async context manager yielding the response; leaving it releases
            the connection even when the body was not fully read.

        Raises:
            FetchTimeoutError: Connect or read timed out.
            TooManyRedirectsError: Redirect limit exceeded.
            FetchConnectionError: Any other transport failure.
        """
        ...


def create_session(
    config: WebConfig, resolver: AbstractResolver | None = None
) -> aiohttp.ClientSession:
    """Create HTTP session for availability checks.

    Args:
        config: Web settings (timeouts, user agent, concurrency).
        resolver: Custom DNS resolver; the system resolver when None.

    Returns:
        Configured aiohttp ClientSession.
    """
    connector = aiohttp.TCPConnector(
        limit=max(8, config.concurrency * 4),
        ttl_dns_cache=300,
        resolver=resolver,
    )
    timeout = aiohttp.ClientTimeout(
        total=None, sock_connect=config.timeout_secs, sock_read=config.timeout_secs
    )
    headers = {
        "User-Agent": config.user_agent,
        "Accept": "*/*",
        "Accept-Encoding": "identity",
    }
    return aiohttp.ClientSession(connector=connector, timeout=timeout, headers=headers)


class HttpFetcher:
    """aiohttp implementation of the Fetcher protocol.

    Use as an async context manager so the session is created inside the
    running event loop and closed afterwards.
    """

    def __init__(self, config: WebConfig, resolver: AbstractResolver | None = None):
        """Initialize fetcher.

        Args:
            config: Web settings.
            resolver: Custom DNS resolver, e.g. for loopback test servers.
        """
        self.config = config
        self.resolver = resolver
        self._session: aiohttp.ClientSession | None = None

    async def __aenter__(self) -> "HttpFetcher":
        self._session = create_session(self.config, self.resolver)
        return self

    async def __aexit__(self, *exc_info: object) -> None:
        await self.close()

    async def close(self) -> None:
        if self._session is not None:
            await self._session.close()
            self._session = None

    async def _chunks(self, response: aiohttp.ClientResponse) -> AsyncIterator[bytes]:
        async for chunk in response.content.iter_chunked(self.config.chunk_size):
            yield chunk

    @asynccontextmanager
    async def open(self, url: str) -> AsyncIterator[FetchResponse]:
        """Open a GET request; see Fetcher.open."""
        if self._session is None:
            raise RuntimeError("HttpFetcher used outside 'async with'")
        try:
            async with self._session.get(
                url, allow_redirects=True, max_redirects=self.config.max_redirects
            ) as response:
                logger.debug(f"GET {url} -> {response.status} {response.url}")
                yield FetchResponse(
                    status=response.status,
                    final_url=str(response.url),
                    headers={k.lower(): v for k, v in response.headers.items()},
                    body=self._chunks(response),
                    history=[str(r.url) for r in response.history],
                    page_timeout=self.config.timeout_secs,
                )
        except aiohttp.TooManyRedirects as e:
            raise TooManyRedirectsError(f"more than {self.config.max_redirects} redirects") from e
        except TimeoutError as e:
            raise FetchTimeoutError(f"timed out after {self.config.timeout_secs}s") from e
        except aiohttp.InvalidURL as e:
            raise FetchConnectionError(f"invalid URL: {e}") from e
        except aiohttp.ClientError as e:
            raise FetchConnectionError(str(e) or type(e).__name__) from e
