"""Web availability checking: fetching, link scraping and classification."""

from .availability import WebChecker
from .fetcher import Fetcher, FetchResponse, HttpFetcher
from .links import rank_candidates, scrape_links

__all__ = [
    "FetchResponse",
    "Fetcher",
    "HttpFetcher",
    "WebChecker",
    "rank_candidates",
    "scrape_links",
]
