"""Link extraction from download pages."""

import logging
from urllib.parse import urldefrag, urljoin

from bs4 import BeautifulSoup

from ..models import extension_of
from ..services.origin_meta import is_web_url, url_final_segment

logger = logging.getLogger(__name__)


def scrape_links(html: str, base_url: str) -> list[str]:
    """Extract absolute http(s) anchor targets in document order.

    Relative references resolve against the page's ``<base href>`` when
    present, otherwise against base_url. Fragments are stripped, duplicates
    keep their first occurrence, and fragment-only or non-web targets are
    dropped. Broken markup is parsed best-effort.

    Args:
        html: Page markup.
        base_url: URL the page was served from.

    Returns:
        Ordered, de-duplicated absolute URLs.
    """
    try:
        soup = BeautifulSoup(html, "lxml")
    except Exception as e:
        logger.debug(f"Unparseable page at {base_url}: {e}")
        return []

    base = base_url
    base_tag = soup.find("base", href=True)
    if base_tag is not None:
        base = urljoin(base_url, str(base_tag["href"]).strip())

    seen: set[str] = set()
    links: list[str] = []
    for anchor in soup.find_all("a", href=True):
        href = str(anchor["href"]).strip()
        if not href or href.startswith("#"):
            continue
        try:
            url, _ = urldefrag(urljoin(base, href))
        except ValueError:
            continue
        if not is_web_url(url) or url in seen:
            continue
        seen.add(url)
        links.append(url)
    return links


def rank_candidates(links: list[str], file_name: str) -> list[str]:
    """Order links by how likely they lead to the file.

    Exact final-segment matches come first, then links sharing the file's
    extension, then the rest; document order is kept within each rank.
    """
    extension = extension_of(file_name)

    def rank(url: str) -> int:
        segment = url_final_segment(url)
        if segment == file_name:
            return 0
        if extension and extension_of(segment) == extension:
            return 1
        return 2

    return sorted(links, key=rank)
