"""Allow ``python -m scanemu``."""

from .cli import cli

cli(prog_name="scanemu")
