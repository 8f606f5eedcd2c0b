"""Configuration management for webpurge.

Handles environment variables, the optional YAML config file and default
settings. Provides structured configuration sections for scanning, web
availability checks, purging, logging, and the source-category domain lists.

Precedence, highest first: CLI flags, YAML file, environment
(``WEBPURGE_*``), defaults.
"""

from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from . import __version__
from .core.exceptions import ConfigError
from .models import SourceCategory

ENV_PREFIX = "WEBPURGE_"


class ScanConfig(BaseSettings):
    """Largest-file scan settings.

    Attributes:
        top_n: Number of largest files to consider.
        fixture_mode: Read provenance from ``<file>.zoneid`` sidecars.
    """

    model_config = SettingsConfigDict(env_prefix=ENV_PREFIX, extra="ignore")

    top_n: int = Field(default=25, ge=1)
    fixture_mode: bool = False


class WebConfig(BaseSettings):
    """Web availability check settings.

    Attributes:
        concurrency: Availability checks in flight at once.
        timeout_secs: Connect and per-read timeout in seconds, and the bound
            on reading a whole referrer page. File bodies have no total
            limit; a download only times out when a single read stalls.
        max_redirects: Redirects followed per request.
        max_candidate_probes: Candidate downloads per scraped page.
        presume_auth: Presume sign-in is needed for collaboration, webmail
            and big-tech CSP URLs instead of fetching them.
        presume_local: Treat file:// and drive-letter sources as
            redownloadable with authentication.
        user_agent: User-Agent header sent with every request.
        login_host_prefixes: Host prefixes that mark a redirect to a login page.
        chunk_size: Body read size in bytes.
    """

    model_config = SettingsConfigDict(env_prefix=ENV_PREFIX, extra="ignore")

    concurrency: int = Field(default=4, ge=1)
    timeout_secs: float = Field(default=30.0, gt=0)
    max_redirects: int = Field(default=10, ge=0)
    max_candidate_probes: int = Field(default=10, ge=1)
    presume_auth: bool = True
    presume_local: bool = False
    user_agent: str = f"webpurge/{__version__}"
    login_host_prefixes: list[str] = Field(
        default_factory=lambda: ["login.", "auth.", "accounts.", "signin."]
    )
    chunk_size: int = Field(default=64 * 1024, ge=1024)


class PurgeConfig(BaseSettings):
    """Purge, recipe and store settings.

    Attributes:
        store_dir: Recipe store directory.
        target_free: Bytes to free before planning stops, None for all.
        allow_auth: Allow purging files only redownloadable with sign-in.
        trash: Move purged files to ``.webpurge-trash/`` instead of deleting.
        passphrase_env: Environment variable holding the recipe passphrase.
        hash_algo: Digest algorithm for new recipes.
        partial_len: Prefix length of the fail-fast partial hash; 0 disables.
    """

    model_config = SettingsConfigDict(env_prefix=ENV_PREFIX, extra="ignore")

    store_dir: Path = Field(default_factory=lambda: Path.home() / ".webpurge" / "store")
    target_free: int | None = Field(default=None, ge=0)
    allow_auth: bool = False
    trash: bool = False
    passphrase_env: str = "WEBPURGE_PASSPHRASE"
    hash_algo: str = "sha256"
    partial_len: int = Field(default=1_048_576, ge=0)


class LoggingConfig(BaseSettings):
    """Logging settings."""

    model_config = SettingsConfigDict(env_prefix=ENV_PREFIX, extra="ignore")

    log_level: str = "WARNING"


class CategoryConfig(BaseModel):
    """Ordered domain lists used to categorize download sources.

    Attributes:
        webmail: Webmail hosts.
        cloud_collaboration: SharePoint / Teams style hosts.
        big_tech_csp: Big-tech cloud storage hosts.
        small_csp: Other file sharing hosts.
        tools: Converter sites, search engines and in-browser applications.
        presume_auth_categories: Categories presumed to need sign-in.
    """

    webmail: list[str] = Field(default_factory=list)
    cloud_collaboration: list[str] = Field(default_factory=list)
    big_tech_csp: list[str] = Field(default_factory=list)
    small_csp: list[str] = Field(default_factory=list)
    tools: list[str] = Field(default_factory=list)
    presume_auth_categories: list[SourceCategory] = Field(
        default_factory=lambda: [
            SourceCategory.CLOUD_COLLABORATION,
            SourceCategory.WEBMAIL,
            SourceCategory.BIG_TECH_CSP,
        ]
    )

    @field_validator("webmail", "cloud_collaboration", "big_tech_csp", "small_csp", "tools")
    @classmethod
    def _normalize_hosts(cls, hosts: list[str]) -> list[str]:
        return [h.strip().lower().lstrip(".") for h in hosts if h and h.strip()]


class Config:
    """Application configuration manager.

    Aggregates the configuration sections and loads the category lists from
    ``app/config/categories.yml`` plus an optional user YAML file whose
    top-level keys are section names (``scan``, ``web``, ``purge``,
    ``logging``, ``categories``).
    """

    SECTIONS = ("scan", "web", "purge", "logging", "categories")

    def __init__(self, config_file: Path | None = None, config_dir: Path | None = None):
        """Initialize configuration manager.

        Args:
            config_file: Optional user YAML config file.
            config_dir: Directory holding categories.yml, defaults to app/config.

        Raises:
            ConfigError: Config file missing, unparsable or invalid.
        """
        if config_dir is None:
            config_dir = Path(__file__).parent / "config"
        self.config_dir = Path(config_dir)
        self.config_file = config_file

        user_data = self._read_yaml(config_file) if config_file else {}
        unknown = set(user_data) - set(self.SECTIONS)
        if unknown:
            raise ConfigError(f"unknown config sections: {', '.join(sorted(unknown))}")

        category_data = self._read_yaml(self.config_dir / "categories.yml")
        category_data.update(user_data.get("categories") or {})

        try:
            self.scan = ScanConfig(**(user_data.get("scan") or {}))
            self.web = WebConfig(**(user_data.get("web") or {}))
            self.purge = PurgeConfig(**(user_data.get("purge") or {}))
            self.logging = LoggingConfig(**(user_data.get("logging") or {}))
            self.categories = CategoryConfig(**category_data)
        except ValidationError as e:
            raise ConfigError(f"invalid configuration: {e}") from e

    @staticmethod
    def _read_yaml(path: Path) -> dict[str, Any]:
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            with open(path, encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"cannot parse {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{path} must contain a mapping")
        return data

    def override(self, **sections: dict[str, Any]) -> "Config":
        """Apply overrides (e.g. from CLI flags) on top of loaded values.

        None values are ignored so unset flags keep the loaded setting.

        Args:
            **sections: Mapping of section name to field overrides.

        Returns:
            This config, updated in place.

        Raises:
            ConfigError: Unknown section or invalid value.
        """
        for name, values in sections.items():
            if name not in self.SECTIONS:
                raise ConfigError(f"unknown config section: {name}")
            updates = {k: v for k, v in values.items() if v is not None}
            if not updates:
                continue
            current = getattr(self, name)
            try:
                setattr(self, name, type(current)(**{**current.model_dump(), **updates}))
            except ValidationError as e:
                raise ConfigError(f"invalid {name} setting: {e}") from e
        return self


# Global configuration instance
config = Config()
