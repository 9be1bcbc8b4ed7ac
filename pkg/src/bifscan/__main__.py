"""``python -m bifscan`` dispatches to the command-line frontend."""

from .cli import entry_point

entry_point()
