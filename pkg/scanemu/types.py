"""Type definitions shared across the scan-chain emulator."""

from __future__ import annotations

from enum import StrEnum


class ProcessTag(StrEnum):
    """Process a unit of simulation work is charged to."""

    CLOCK_GEN = "ClockGen"
    RESET_SEQ = "ResetSeq"
    SCAN_ENABLE_SEQ = "ScanEnableSeq"
    SCAN_SEQ = "ScanSeq"
    DUT = "DUT"
    BRIDGE_SIGNAL = "BridgeSignal"
    BRIDGE_MESSAGE = "BridgeMessage"


# Testbench processes in the order the profiler reports them.
TESTBENCH_TAGS: tuple[ProcessTag, ...] = (
    ProcessTag.RESET_SEQ,
    ProcessTag.SCAN_ENABLE_SEQ,
    ProcessTag.SCAN_SEQ,
)


class RunMode(StrEnum):
    """Execution regime of a verification run."""

    DIRECT = "direct"
    ACCELERATION = "acceleration"
    EMUL_PASS = "emul-pass"
    EMUL_FSM = "emul-fsm"


class VectorSource(StrEnum):
    """Where scan-sequence test vectors come from."""

    COUNTING = "counting"
    EXPLICIT = "explicit"
    RANDOM = "random"


class PortDirection(StrEnum):
    """Direction of a message port, seen from the hardware side."""

    IN = "in"
    OUT = "out"
