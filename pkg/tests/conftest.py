"""Shared fixtures for scanemu tests."""

from __future__ import annotations

from pathlib import Path

import pytest

from scanemu.netlist import Netlist, load_bench
from scanemu.scan import ScanNetlist, insert_scan

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def counter3_netlist() -> Netlist:
    """3-bit synchronous counter with a CLEAR input."""
    return load_bench(FIXTURES / "counter3.bench")


@pytest.fixture
def counter3(counter3_netlist: Netlist) -> ScanNetlist:
    """The counter with its scan chain in declaration order (Q0 at TDI, Q2 at TDO)."""
    return insert_scan(counter3_netlist)


@pytest.fixture
def toggle1() -> ScanNetlist:
    """Single toggling flip-flop."""
    return insert_scan(load_bench(FIXTURES / "toggle1.bench"))
