"""Dependency-injection container.

This module defines a dependency-injection (DI) container that wires the
scanner, the web availability checker and the purge engine to one
``Config`` instance, so commands and tests build services the same way.
"""

from dependency_injector import containers, providers

from app.cli.response_formatter import ResponseFormatter
from app.config import Config
from app.services.engine import PurgeEngine
from app.services.scanner import ScanService
from app.services.store import RecipeStore
from app.webcheck.availability import WebChecker


class Container(containers.DeclarativeContainer):
    """DI container for the application.

    ``config`` must be overridden with a loaded ``Config`` before any
    service is resolved (see build_container).
    """

    config = providers.Dependency(instance_of=Config)

    # Services
    scanner = providers.Singleton(ScanService, config=config.provided.scan)
    web_checker = providers.Singleton(
        WebChecker, config=config.provided.web, categories=config.provided.categories
    )
    engine = providers.Singleton(
        PurgeEngine, config=config, scanner=scanner, checker=web_checker
    )
    store = providers.Factory(RecipeStore, store_dir=config.provided.purge.store_dir)

    # CLI components
    response_formatter = providers.Singleton(ResponseFormatter)


def build_container(cfg: Config) -> Container:
    """Container wired to cfg."""
    container = Container()
    container.config.override(providers.Object(cfg))
    return container
