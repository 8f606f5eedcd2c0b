"""CLI helper functions.

Size parsing for ``--target-free``, passphrase resolution, and the fetcher
factory used by every command that touches the web.
"""

import logging
import os
import re

import click

from ..config import Config
from ..core.exceptions import PassphraseDeclinedError
from ..webcheck.fetcher import HttpFetcher
from .messages import PASSPHRASE_PROMPT

logger = logging.getLogger(__name__)

_SIZE_RE = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*([a-z]*)\s*$", re.IGNORECASE)
_SIZE_UNITS = {
    "": 1,
    "b": 1,
    "kb": 10**3,
    "mb": 10**6,
    "gb": 10**9,
    "tb": 10**12,
    "kib": 2**10,
    "mib": 2**20,
    "gib": 2**30,
    "tib": 2**40,
}


def parse_size(text: str) -> int:
    """Parse a byte size such as ``500MB``, ``10GB`` or ``2GiB``.

    Decimal suffixes (KB, MB, GB, TB) are powers of 1000, binary suffixes
    (KiB, MiB, GiB, TiB) powers of 1024; a bare number is bytes.

    Raises:
        ValueError: Unparsable size or unknown unit.
    """
    match = _SIZE_RE.match(text)
    if not match:
        raise ValueError(f"invalid size: {text!r}")
    number, unit = match.groups()
    multiplier = _SIZE_UNITS.get(unit.lower())
    if multiplier is None:
        raise ValueError(f"unknown size unit: {unit!r}")
    return int(float(number) * multiplier)


class SizeParamType(click.ParamType):
    """Click parameter accepting byte sizes with unit suffixes."""

    name = "size"

    def convert(
        self, value: str | int, param: click.Parameter | None, ctx: click.Context | None
    ) -> int:
        if isinstance(value, int):
            return value
        try:
            return parse_size(value)
        except ValueError as e:
            self.fail(str(e), param, ctx)


SIZE = SizeParamType()


def resolve_passphrase(env_name: str, confirm: bool = False) -> str:
    """Passphrase from the environment, else an interactive prompt.

    Args:
        env_name: Environment variable to read first.
        confirm: Ask twice when prompting (used when creating recipes).

    Returns:
        Non-empty passphrase.

    Raises:
        PassphraseDeclinedError: Prompt aborted or left empty.
    """
    passphrase = os.environ.get(env_name)
    if passphrase:
        return passphrase
    try:
        passphrase = click.prompt(
            PASSPHRASE_PROMPT,
            hide_input=True,
            confirmation_prompt=confirm,
            default="",
            show_default=False,
            err=True,
        )
    except click.Abort as e:
        raise PassphraseDeclinedError("no passphrase given") from e
    if not passphrase:
        raise PassphraseDeclinedError("no passphrase given")
    return passphrase


def create_fetcher(config: Config) -> HttpFetcher:
    """Fetcher for availability checks and downloads."""
    return HttpFetcher(config.web)
