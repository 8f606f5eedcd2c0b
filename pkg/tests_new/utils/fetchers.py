"""Fetcher wrappers for observing and breaking transport behavior in tests."""

from collections.abc import AsyncIterator
from contextlib import asynccontextmanager

from app.core.exceptions import FetchConnectionError
from app.webcheck.fetcher import Fetcher, FetchResponse


class CountingFetcher:
    """Counts body bytes the caller actually consumed, per URL."""

    def __init__(self, inner: Fetcher):
        self.inner = inner
        self.bytes_read: dict[str, int] = {}
        self.opened: list[str] = []

    @asynccontextmanager
    async def open(self, url: str) -> AsyncIterator[FetchResponse]:
        self.opened.append(url)
        async with self.inner.open(url) as response:
            body = response.iter_chunks()

            async def counted() -> AsyncIterator[bytes]:
                async for chunk in body:
                    self.bytes_read[url] = self.bytes_read.get(url, 0) + len(chunk)
                    yield chunk

            yield FetchResponse(
                status=response.status,
                final_url=response.final_url,
                headers=response.headers,
                body=counted(),
                history=response.history,
                page_timeout=response.page_timeout,
            )


class RefusingFetcher:
    """Every request fails as if the connection was refused."""

    @asynccontextmanager
    async def open(self, url: str) -> AsyncIterator[FetchResponse]:
        raise FetchConnectionError(f"connection refused: {url}")
        yield  # pragma: no cover
