"""Application entry point.

Configures logging and runs the click command group. Logs go to stderr so
stdout stays machine-readable when commands print JSON.
"""

import logging
import sys

from .cli.commands import cli

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
NOISY_LOGGERS = ("aiohttp", "asyncio")

logger = logging.getLogger(__name__)


def configure_logging(level: str = "WARNING", verbose: int = 0) -> None:
    """Configure root logging once per process.

    Args:
        level: Configured level name (``log_level`` setting).
        verbose: Number of ``-v`` flags; 1 raises to INFO, 2 or more to DEBUG.
    """
    resolved = logging.getLevelName(level.upper())
    if not isinstance(resolved, int):
        resolved = logging.WARNING
    if verbose >= 2:
        resolved = logging.DEBUG
    elif verbose == 1:
        resolved = min(resolved, logging.INFO)

    logging.basicConfig(format=LOG_FORMAT, level=resolved, stream=sys.stderr, force=True)
    for name in NOISY_LOGGERS:
        logging.getLogger(name).setLevel(max(resolved, logging.WARNING))
    logger.debug(f"Logging configured at {logging.getLevelName(resolved)}")


def main() -> None:
    """Console script entry point."""
    cli(prog_name="webpurge")


if __name__ == "__main__":
    main()
