"""Exceptions raised by the scan-chain emulator."""

from __future__ import annotations

from collections.abc import Sequence


class ScanEmuError(Exception):
    """Base class for every error raised by scanemu."""


class ConfigError(ScanEmuError):
    """A configuration value or file failed validation."""


class NetlistError(ScanEmuError):
    """A netlist is malformed."""


class NetlistSyntaxError(NetlistError):
    """A `.bench` line could not be parsed."""

    def __init__(self, line: int, message: str) -> None:
        """Initialize with the 1-based line number."""
        super().__init__(f"line {line}: {message}")
        self.line = line


class UndeclaredNetError(NetlistError):
    """A net is used but never driven."""


class DuplicateDriverError(NetlistError):
    """A net has more than one driver."""


class CombinationalCycleError(NetlistError):
    """The combinational graph contains a loop not broken by a flip-flop."""

    def __init__(self, cycle: Sequence[str]) -> None:
        """Initialize with the net names along one cycle."""
        super().__init__("combinational cycle through " + " -> ".join(cycle))
        self.cycle = tuple(cycle)


class ScanInsertionError(ScanEmuError):
    """Scan insertion is undefined for the given netlist or chain order."""


class WidthMismatchError(ScanEmuError):
    """A frame or message does not match the declared width."""


class ProtocolError(ScanEmuError):
    """The bridge handshake or scheduler contract was violated."""


class KernelMismatchError(ScanEmuError):
    """The event-driven engine disagreed with the full-sweep oracle."""


class VerificationError(ScanEmuError):
    """A preamble check or golden comparison failed."""


class GoldenMismatchError(VerificationError):
    """Two golden logs diverge."""

    def __init__(self, index: int | None, message: str) -> None:
        """Initialize with the first differing vector index (None for length)."""
        super().__init__(message)
        self.index = index


class GoldenFormatError(ScanEmuError):
    """A golden log file is malformed."""


class StatsSchemaError(ScanEmuError):
    """A stats JSON document does not match the schema."""


class RunTimeoutError(ScanEmuError):
    """Parallel runs did not finish within the deadline."""
