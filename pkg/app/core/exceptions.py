"""Error hierarchy for webpurge.

Every error raised by the application derives from WebpurgeError so the CLI
can map failures onto its exit-code contract without catching unrelated
exceptions. Fetch errors never escape the webcheck package; they are encoded
into channel results there.
"""

from pathlib import Path


class WebpurgeError(Exception):
    """Base class for all application errors."""


class ConfigError(WebpurgeError):
    """Configuration file missing, unparsable, or invalid."""


class ScanError(WebpurgeError):
    """Scan root missing, not a directory, unreadable, or on an unknown volume."""


class UnsupportedHashError(WebpurgeError, ValueError):
    """Requested hash algorithm is not supported."""


class RecipeFormatError(WebpurgeError):
    """Recipe text or blob is malformed.

    Attributes:
        field: Name of the offending recipe field, if known.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class RecipeAuthError(WebpurgeError):
    """Wrong passphrase or tampered blob (the two are indistinguishable)."""


class StoreError(WebpurgeError):
    """Generic recipe store failure."""


class StoreNotInitializedError(StoreError):
    """Store directory has no index file.

    Attributes:
        store_dir: Directory that was expected to hold the store.
    """

    def __init__(self, store_dir: Path | str):
        super().__init__(f"no recipe store at {store_dir}")
        self.store_dir = Path(store_dir)


class RecipeNotFoundError(StoreError):
    """No entry with the requested recipe id."""


class StoreCollisionError(StoreError):
    """Recipe id prefix collides with an entry for different content."""


class FetchError(WebpurgeError):
    """Base class for fetcher transport failures."""


class FetchTimeoutError(FetchError):
    """Connect or read timed out."""


class FetchConnectionError(FetchError):
    """Connection refused, reset, DNS failure or invalid URL."""


class TooManyRedirectsError(FetchError):
    """Redirect chain exceeded the configured limit."""


class RestoreError(WebpurgeError):
    """Base class for reconstitution failures."""


class DestinationExistsError(RestoreError):
    """Restore target already exists and force was not given."""


class SourceUnavailableError(RestoreError):
    """No recorded channel could serve the file publicly."""


class IntegrityError(RestoreError):
    """Downloaded bytes did not match the recipe's hash."""


class CorpusError(WebpurgeError):
    """Study corpus file missing or holding an invalid record."""


class PassphraseDeclinedError(WebpurgeError):
    """No passphrase was supplied when one was required."""
