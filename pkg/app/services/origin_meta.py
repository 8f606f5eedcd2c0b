"""Download provenance metadata.

Parses NTFS ``Zone.Identifier`` stream content, reads provenance from the
platform's metadata channel (alternate data stream, extended attributes, or
fixture sidecar files), and sorts recorded source URLs into source
categories with an ordered, configurable domain-list cascade.
"""

import codecs
import logging
import os
import re
from pathlib import Path, PurePosixPath
from urllib.parse import unquote, urlsplit

from ..config import CategoryConfig, config
from ..models import OriginChannel, OriginMetadata, SourceCategory

logger = logging.getLogger(__name__)

ZONE_SECTION = "zonetransfer"
ADS_STREAM_NAME = "Zone.Identifier"
SIDECAR_SUFFIX = ".zoneid"
XATTR_HOST_URL = "user.xdg.origin.url"
XATTR_REFERRER_URL = "user.xdg.referrer.url"

WEB_SCHEMES = frozenset({"http", "https"})
APPLICATION_SCHEMES = frozenset(
    {"chrome-extension", "moz-extension", "ms-browser-extension", "blob"}
)

_DRIVE_LETTER_RE = re.compile(r"^[A-Za-z]:[\\/]")
_KEY_MAP = {"zoneid": "zone_id", "referrerurl": "referrer_url", "hosturl": "host_url"}


def _decode_stream(data: bytes | str) -> str:
    if isinstance(data, str):
        text = data
    elif data.startswith((codecs.BOM_UTF16_LE, codecs.BOM_UTF16_BE)):
        text = data.decode("utf-16", errors="replace")
    else:
        text = data.decode("utf-8", errors="replace")
    return text.lstrip("\ufeff")


def parse_zone_identifier(
    data: bytes | str, channel: OriginChannel = OriginChannel.ADS
) -> OriginMetadata | None:
    """Parse Zone.Identifier stream content.

    Recognizes the ``[ZoneTransfer]`` section and its ``ZoneId``,
    ``ReferrerUrl`` and ``HostUrl`` keys (case-insensitive). CRLF or LF line
    endings, a leading byte-order mark and unknown keys are tolerated. Never
    raises.

    Args:
        data: Raw stream content.
        channel: Channel the content was read from.

    Returns:
        OriginMetadata, or None when no recognized key carries a value.
    """
    values: dict[str, str] = {}
    in_section = False
    for raw_line in _decode_stream(data).splitlines():
        line = raw_line.strip()
        if not line or line.startswith((";", "#")):
            continue
        if line.startswith("[") and line.endswith("]"):
            in_section = line[1:-1].strip().lower() == ZONE_SECTION
            continue
        if not in_section or "=" not in line:
            continue
        key, _, value = line.partition("=")
        field = _KEY_MAP.get(key.strip().lower())
        value = value.strip()
        if field and value and field not in values:
            values[field] = value

    zone_id: int | None = None
    if "zone_id" in values:
        try:
            zone_id = int(values["zone_id"])
        except ValueError:
            logger.debug(f"Ignoring malformed ZoneId {values['zone_id']!r}")

    referrer_url = values.get("referrer_url")
    host_url = values.get("host_url")
    if zone_id is None and referrer_url is None and host_url is None:
        return None
    return OriginMetadata(
        zone_id=zone_id, referrer_url=referrer_url, host_url=host_url, channel=channel
    )


def format_zone_identifier(origin: OriginMetadata) -> str:
    """Write origin metadata in canonical Zone.Identifier form (CRLF)."""
    lines = ["[ZoneTransfer]"]
    if origin.zone_id is not None:
        lines.append(f"ZoneId={origin.zone_id}")
    if origin.referrer_url is not None:
        lines.append(f"ReferrerUrl={origin.referrer_url}")
    if origin.host_url is not None:
        lines.append(f"HostUrl={origin.host_url}")
    return "\r\n".join(lines) + "\r\n"


def sidecar_path(path: Path) -> Path:
    """Fixture sidecar holding Zone.Identifier text for a file."""
    return path.with_name(path.name + SIDECAR_SUFFIX)


def _read_xattr(path: Path, key: str) -> str | None:
    try:
        raw = os.getxattr(path, key, follow_symlinks=False)
    except OSError:
        return None
    value = raw.decode("utf-8", errors="replace").rstrip("\x00").strip()
    return value or None


def read_origin(path: Path, fixture_mode: bool = False) -> OriginMetadata | None:
    """Read a file's download provenance from its metadata channel.

    Fixture mode reads ``<file>.zoneid``; Windows reads the Zone.Identifier
    alternate data stream; other platforms read the freedesktop origin and
    referrer extended attributes. Unsupported or unreadable channels yield
    None.

    Args:
        path: File to inspect.
        fixture_mode: Read the sidecar file instead of platform metadata.

    Returns:
        OriginMetadata or None when nothing was recorded.
    """
    path = Path(path)
    try:
        if fixture_mode:
            sidecar = sidecar_path(path)
            if not sidecar.is_file():
                return None
            return parse_zone_identifier(sidecar.read_bytes(), OriginChannel.SIDECAR)

        if os.name == "nt":
            with open(f"{path}:{ADS_STREAM_NAME}", "rb") as stream:
                return parse_zone_identifier(stream.read(), OriginChannel.ADS)

        if not hasattr(os, "getxattr"):
            return None
        host_url = _read_xattr(path, XATTR_HOST_URL)
        referrer_url = _read_xattr(path, XATTR_REFERRER_URL)
        if host_url is None and referrer_url is None:
            return None
        return OriginMetadata(
            host_url=host_url, referrer_url=referrer_url, channel=OriginChannel.XATTR
        )
    except OSError as e:
        logger.debug(f"No readable provenance for {path}: {e}")
        return None


def is_local_source(url: str) -> bool:
    """file:// URLs, drive-letter paths and UNC paths."""
    if url.lower().startswith("file:") or url.startswith("\\\\"):
        return True
    return bool(_DRIVE_LETTER_RE.match(url))


def url_scheme(url: str) -> str:
    try:
        return urlsplit(url).scheme.lower()
    except ValueError:
        return ""


def url_host(url: str) -> str:
    try:
        return (urlsplit(url).hostname or "").lower()
    except ValueError:
        return ""


def is_web_url(url: str) -> bool:
    """http(s) URL with a host."""
    return url_scheme(url) in WEB_SCHEMES and bool(url_host(url))


def has_resource_path(url: str) -> bool:
    """Whether a URL points below the site root (path or query present)."""
    try:
        parts = urlsplit(url)
    except ValueError:
        return False
    return parts.path not in ("", "/") or bool(parts.query)


def url_final_segment(url: str) -> str:
    """Decoded final path segment of a URL."""
    try:
        path = urlsplit(url).path
    except ValueError:
        return ""
    return PurePosixPath(unquote(path)).name


def host_matches(host: str, domains: list[str]) -> bool:
    """Check a host against a domain list (exact or subdomain match)."""
    if not host:
        return False
    host = host.lower().rstrip(".")
    return any(host == d or host.endswith("." + d) for d in domains)


def classify_source(
    origin: OriginMetadata | None,
    file_extension: str,
    categories: CategoryConfig | None = None,
) -> SourceCategory:
    """Categorize a file's download source.

    Rules are tried in order, each over HU then RU, and the first match wins:
    no URLs, local source, application scheme, webmail, cloud collaboration,
    big-tech CSP, small CSP, tool sites, HU naming the file, then fallbacks
    (HU-bearing entries are SmallCSP; RU-only entries are DirectLink when the
    RU is a page below a site root, otherwise ApplicationsTools).

    Args:
        origin: Recorded provenance, possibly restricted to one channel.
        file_extension: Extension of the file, with or without the dot.
        categories: Domain lists, defaults to the global configuration.

    Returns:
        The source category.
    """
    if origin is None or not origin.has_urls:
        return SourceCategory.LINKS_NOT_RECORDED

    cats = categories or config.categories
    urls = [u for u in (origin.host_url, origin.referrer_url) if u]

    if any(is_local_source(u) for u in urls):
        return SourceCategory.LOCAL_ACCESS
    if any(url_scheme(u) in APPLICATION_SCHEMES for u in urls):
        return SourceCategory.APPLICATIONS_TOOLS

    host_rules = (
        (SourceCategory.WEBMAIL, cats.webmail),
        (SourceCategory.CLOUD_COLLABORATION, cats.cloud_collaboration),
        (SourceCategory.BIG_TECH_CSP, cats.big_tech_csp),
        (SourceCategory.SMALL_CSP, cats.small_csp),
        (SourceCategory.APPLICATIONS_TOOLS, cats.tools),
    )
    for category, domains in host_rules:
        if any(host_matches(url_host(u), domains) for u in urls):
            return category

    extension = file_extension.lower()
    if extension and not extension.startswith("."):
        extension = "." + extension
    if origin.host_url:
        if extension and url_final_segment(origin.host_url).lower().endswith(extension):
            return SourceCategory.DIRECT_LINK
        return SourceCategory.SMALL_CSP

    referrer = origin.referrer_url or ""
    if is_web_url(referrer) and has_resource_path(referrer):
        return SourceCategory.DIRECT_LINK
    return SourceCategory.APPLICATIONS_TOOLS
