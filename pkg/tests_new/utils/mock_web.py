"""Loopback mock web for availability tests.

An aiohttp test server answers for every host name: a custom resolver
sends all connections to the loopback server, and routes are looked up by
(Host header, path). Every request is logged so tests can count downloads.
"""

import asyncio
import socket
from dataclasses import dataclass, field
from urllib.parse import urlsplit

from aiohttp import web
from aiohttp.abc import AbstractResolver, ResolveResult
from aiohttp.test_utils import TestServer

STREAM_CHUNK = 64 * 1024


def route_key(url: str) -> tuple[str, str]:
    """(host, path with query) of a URL, as the server sees the request."""
    parts = urlsplit(url)
    path = parts.path or "/"
    if parts.query:
        path = f"{path}?{parts.query}"
    return (parts.hostname or "").lower(), path


@dataclass
class Route:
    """Scripted response for one URL.

    The body is sent repeat times in chunk_size pieces, sleeping
    chunk_delay seconds between pieces.
    """

    status: int = 200
    body: bytes = b""
    content_type: str = "application/octet-stream"
    headers: dict[str, str] = field(default_factory=dict)
    delay: float = 0.0
    chunk_size: int = STREAM_CHUNK
    chunk_delay: float = 0.0
    repeat: int = 1

    @property
    def length(self) -> int:
        return len(self.body) * self.repeat


@dataclass
class RequestRecord:
    host: str
    path: str
    bytes_sent: int = 0

    @property
    def url(self) -> str:
        return f"http://{self.host}{self.path}"


class LoopbackResolver(AbstractResolver):
    """Resolves every host name to the mock server."""

    def __init__(self, port: int):
        self.port = port

    async def resolve(
        self, host: str, port: int = 0, family: socket.AddressFamily = socket.AF_INET
    ) -> list[ResolveResult]:
        return [
            {
                "hostname": host,
                "host": "127.0.0.1",
                "port": self.port,
                "family": socket.AF_INET,
                "proto": 0,
                "flags": socket.AI_NUMERICHOST,
            }
        ]

    async def close(self) -> None:
        pass


class MockWeb:
    """Scripted web of files, pages, errors and redirects."""

    def __init__(self) -> None:
        self.routes: dict[tuple[str, str], Route] = {}
        self.requests: list[RequestRecord] = []
        self.in_flight = 0
        self.peak_in_flight = 0
        self._server: TestServer | None = None

    async def start(self) -> "MockWeb":
        app = web.Application()
        app.router.add_route("*", "/{tail:.*}", self._handle)
        self._server = TestServer(app, host="127.0.0.1")
        await self._server.start_server()
        return self

    async def close(self) -> None:
        if self._server is not None:
            await self._server.close()
            self._server = None

    @property
    def port(self) -> int:
        assert self._server is not None and self._server.port is not None
        return self._server.port

    @property
    def resolver(self) -> LoopbackResolver:
        return LoopbackResolver(self.port)

    # Scripting

    def add(self, url: str, route: Route) -> None:
        self.routes[route_key(url)] = route

    def add_file(self, url: str, data: bytes, content_type: str = "application/octet-stream"):
        self.add(url, Route(body=data, content_type=content_type))

    def add_page(self, url: str, html: str) -> None:
        self.add(url, Route(body=html.encode("utf-8"), content_type="text/html; charset=utf-8"))

    def add_status(self, url: str, status: int) -> None:
        self.add(url, Route(status=status, body=f"status {status}".encode()))

    def add_redirect(self, url: str, location: str, status: int = 302) -> None:
        self.add(url, Route(status=status, headers={"Location": location}))

    def add_timeout(self, url: str, delay: float = 1.0) -> None:
        self.add(url, Route(delay=delay, body=b"too late"))

    def add_trickle(
        self,
        url: str,
        data: bytes,
        chunk_size: int = 64,
        chunk_delay: float = 0.1,
        content_type: str = "text/html; charset=utf-8",
    ) -> None:
        """Serve data a few bytes at a time, each piece well inside a read timeout."""
        self.add(
            url,
            Route(
                body=data,
                content_type=content_type,
                chunk_size=chunk_size,
                chunk_delay=chunk_delay,
            ),
        )

    def add_repeated(self, url: str, block: bytes, repeat: int) -> None:
        """Serve block repeat times without holding the whole body."""
        self.add(url, Route(body=block, repeat=repeat, chunk_size=len(block)))

    def remove(self, url: str) -> None:
        self.routes.pop(route_key(url), None)

    # Request log

    def requests_to(self, url: str) -> list[RequestRecord]:
        host, path = route_key(url)
        return [r for r in self.requests if (r.host, r.path) == (host, path)]

    def count(self, url: str) -> int:
        return len(self.requests_to(url))

    async def _handle(self, request: web.Request) -> web.StreamResponse:
        host = request.host.rsplit(":", 1)[0].lower()
        record = RequestRecord(host=host, path=request.path_qs)
        self.requests.append(record)
        self.in_flight += 1
        self.peak_in_flight = max(self.peak_in_flight, self.in_flight)
        try:
            return await self._respond(request, record)
        finally:
            self.in_flight -= 1

    async def _respond(self, request: web.Request, record: RequestRecord) -> web.StreamResponse:
        route = self.routes.get((record.host, record.path))
        if route is None:
            return web.Response(status=404, text="not found")
        if route.delay:
            await asyncio.sleep(route.delay)
        if not route.body or route.status != 200:
            return web.Response(
                status=route.status,
                body=route.body,
                content_type=route.content_type.split(";")[0],
                headers=route.headers,
            )

        response = web.StreamResponse(status=route.status, headers=route.headers)
        response.content_type = route.content_type.split(";")[0]
        if "charset=" in route.content_type:
            response.charset = route.content_type.split("charset=")[1]
        response.content_length = route.length
        await response.prepare(request)
        body = memoryview(route.body)
        try:
            for _ in range(route.repeat):
                for start in range(0, len(body), route.chunk_size):
                    chunk = body[start : start + route.chunk_size]
                    await response.write(chunk)
                    record.bytes_sent += len(chunk)
                    if route.chunk_delay:
                        await asyncio.sleep(route.chunk_delay)
        except (ConnectionResetError, ConnectionError):
            return response
        await response.write_eof()
        return response
