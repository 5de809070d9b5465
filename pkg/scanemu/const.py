"""Constants for the scan-chain emulator."""

from __future__ import annotations

from typing import Final

DOMAIN: Final = "scanemu"

# Environment variable seeding the random vector source.
ENV_SEED: Final = "SCANEMU_SEED"

# Uncontrolled (bridge) clock of the emulation board.
DEFAULT_SYSTEM_FREQUENCY_HZ: Final = 8.33e6
# Testbench clock of the RTL runs; a label only in a zero-delay model.
SIMULATION_CLOCK_HZ: Final = 100e6

# Largest chain length scan_complexity accepts.
MAX_CHAIN_LENGTH: Final = 62

WORD_BITS: Final = 32

# FIFO depth above which a port logs a warning (FIFOs are unbounded).
DEFAULT_FIFO_HIGH_WATER: Final = 1024

# Uclocks the software proxy needs between two sends.
DEFAULT_SOFTWARE_INTERVAL: Final = 4

# In-port messages the software proxy may queue ahead of the hardware.
DEFAULT_PROXY_DEPTH: Final = 1

DEFAULT_RESET_CYCLES: Final = 2

# Parallel runs allowed at once by the runner, and their overall deadline.
MAX_PARALLEL_RUNS: Final = 2
DEFAULT_RUN_TIMEOUT_S: Final = 3600.0

# Pass-through transactor message layout (one DUT cycle per message).
PASSTHROUGH_WIDTH: Final = 8
PT_BIT_SCAN_TEST_MODE: Final = 0
PT_BIT_SCAN_ENABLE: Final = 1
PT_BIT_SCAN_DATA_IN: Final = 2
PT_BIT_CLR: Final = 3
PT_BIT_TEST: Final = 4
PT_BIT_FM: Final = 5
PT_BIT_VDD: Final = 6
PT_BIT_GND: Final = 7

# FSM transactor message layout: bits n-1..0 scan data, then these offsets above n.
FSM_OFFSET_CLR: Final = 0
FSM_OFFSET_TEST: Final = 1
FSM_OFFSET_FM: Final = 2
FSM_CONTROL_BITS: Final = 3

# Control nets added by scan insertion.
NET_TDI: Final = "TDI"
NET_SCAN_ENABLE: Final = "ScanEnable"
NET_CLR: Final = "CLR"
NET_SCAN_TEST_MODE: Final = "ScanTestMode"
SCAN_NET_SUFFIX: Final = "_scan"

GOLDEN_HEADER: Final = "SCANLOG v1"

# Cost model defaults, seconds per unit. Fitted so the s400-profile modes order
# direct > acceleration > emul-pass > emul-fsm; the values are modeled, not measured.
DEFAULT_T_EVENT: Final = 2.0e-7
DEFAULT_T_SIGNAL: Final = 2.0e-7
DEFAULT_T_MSG: Final = 6.0e-7
DEFAULT_T_UCLOCK: Final = 2.0e-7

# Published figures, printed beside the model's own numbers for context only.
PUBLISHED_TB_PERCENT: Final = 44.71
PUBLISHED_DUT_PERCENT: Final = 55.29
PUBLISHED_PROFILE_PERCENT: Final = {
    "ResetSeq": 1.2,
    "ScanEnableSeq": 7.3,
    "ScanSeq": 36.21,
    "DUT": 55.29,
}
PUBLISHED_SECONDS: Final = {
    "direct": 921,
    "acceleration": 435,
    "emul-pass": 379,
    "emul-fsm": 158,
}
PUBLISHED_READS: Final = {"emul-pass": 3_241_936, "emul-fsm": 1_383_556}
PUBLISHED_DUT_FREQUENCY_HZ: Final = {"emul-pass": 254.75e3, "emul-fsm": 681.84e3}
PUBLISHED_CCLOCKS: Final = {"emul-pass": 25_211_651, "emul-fsm": 8_238_807}
WORKLOAD_FRACTIONS: Final = (0.8, 0.6, 0.4, 0.2)
