"""Logging setup: rich handler on stderr."""

import logging

from rich.console import Console
from rich.logging import RichHandler

from config.settings import LOG_LEVEL

_installed = False


def setup_logging(level: str = LOG_LEVEL) -> None:
    """Route all library logging through a RichHandler on stderr.

    Args:
        level: Logging level name (DEBUG, INFO, WARNING, ...)
    """
    global _installed
    root = logging.getLogger()
    root.setLevel(level)
    if _installed:
        return

    handler = RichHandler(
        console=Console(stderr=True),
        show_path=False,
        rich_tracebacks=True,
        markup=False,
    )
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    root.addHandler(handler)
    _installed = True
