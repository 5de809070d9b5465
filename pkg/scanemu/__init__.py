"""Scan-chain verification emulator.

Parses ISCAS-89 ``.bench`` netlists, inserts a full scan chain and runs the
same test plan in four modes: pure simulation, simulation acceleration and
transaction-based emulation through a pass-through or FSM transactor.
"""

from __future__ import annotations

from .harness import GoldenLog, ScanRunResult, TestPlan, run_plan
from .netlist import Netlist, load_bench, parse_bench
from .runner import run_modes
from .scan import ScanConfig, ScanNetlist, insert_scan
from .types import RunMode, VectorSource

__all__ = [
    "GoldenLog",
    "Netlist",
    "RunMode",
    "ScanConfig",
    "ScanNetlist",
    "ScanRunResult",
    "TestPlan",
    "VectorSource",
    "insert_scan",
    "load_bench",
    "parse_bench",
    "run_modes",
    "run_plan",
]
