"""Tests for scan insertion in scan.py."""

from __future__ import annotations

import pytest

from scanemu.exceptions import ScanInsertionError
from scanemu.netlist import Netlist, next_state, parse_bench
from scanemu.scan import (
    ScanConfig,
    ScanNetlist,
    chain_length,
    emit_scan_bench,
    insert_scan,
    shift_oracle,
)
from scanemu.simkernel import Simulator
from scanemu.types import ProcessTag


class TestInsertScan:
    """Test insert_scan."""

    def test_chain_in_declaration_order(self, counter3: ScanNetlist) -> None:
        """Cells are chained TDI -> Q0 -> Q1 -> Q2 = TDO."""
        nets = counter3.base.nets
        assert chain_length(counter3) == 3
        assert [cell.dff_index for cell in counter3.chain] == [0, 1, 2]
        assert counter3.chain[0].scan_in == counter3.tdi
        assert counter3.chain[1].scan_in == nets["Q0"]
        assert counter3.chain[2].scan_in == nets["Q1"]
        assert counter3.tdo == nets["Q2"]

    def test_control_nets_extend_base(self, counter3: ScanNetlist) -> None:
        """Base net ids are unchanged and the controls follow them."""
        base = counter3.base
        assert counter3.net_names[: base.n_nets] == base.net_names
        assert counter3.net_names[base.n_nets :] == ("TDI", "ScanEnable", "CLR", "ScanTestMode")
        assert (counter3.boundary_inputs, counter3.boundary_outputs) == (5, 3)

    def test_chain_order(self, counter3_netlist: Netlist) -> None:
        """A custom order moves TDO to the last listed DFF."""
        scan = insert_scan(counter3_netlist, ScanConfig(chain_order=(2, 0, 1)))
        assert [cell.dff_index for cell in scan.chain] == [2, 0, 1]
        assert scan.cell_name(0) == "Q2"
        assert scan.tdo == counter3_netlist.nets["Q1"]

    def test_chain_order_must_be_permutation(self, counter3_netlist: Netlist) -> None:
        """Orders that skip or repeat a DFF are rejected."""
        with pytest.raises(ScanInsertionError):
            insert_scan(counter3_netlist, ScanConfig(chain_order=(0, 0, 1)))
        with pytest.raises(ScanInsertionError):
            insert_scan(counter3_netlist, ScanConfig(chain_order=(0, 1)))

    def test_no_dffs(self) -> None:
        """Purely combinational netlists cannot be scanned."""
        with pytest.raises(ScanInsertionError, match="no DFFs"):
            insert_scan(parse_bench("INPUT(A)\nOUTPUT(Z)\nZ = NOT(A)\n"))

    def test_name_collision(self) -> None:
        """A design already using TDI gets a suffixed control net."""
        scan = insert_scan(parse_bench("INPUT(TDI)\nOUTPUT(Q)\nQ = DFF(D)\nD = NOT(TDI)\n"))
        assert scan.net_names[scan.tdi] == "TDI_scan"


class TestShiftOracle:
    """Test the pure shift-register model."""

    def test_shift(self) -> None:
        """The first bit shifted travels furthest."""
        assert shift_oracle([1], 3) == [1, 0, 0]
        assert shift_oracle([1, 0, 1], 3) == [1, 0, 1]
        assert shift_oracle([1, 1, 0, 0], 3) == [0, 0, 1]

    def test_single_one_walks_custom_order(self, counter3_netlist: Netlist) -> None:
        """With order (2,0,1) a lone 1 visits Q2, Q0, then Q1, which drives TDO."""
        scan = insert_scan(counter3_netlist, ScanConfig(chain_order=(2, 0, 1)))
        sim = Simulator(scan)
        seen: list[tuple[int, ...]] = []
        for step, bit in enumerate([1, 0, 0], start=1):
            sim.tick(sim.frame(tdi=bit, scan_enable=1, test_mode=1), ProcessTag.SCAN_SEQ)
            assert sim.state.ff_values == shift_oracle([1, 0, 0][:step], 3)
            seen.append(sim.dff_values())
        assert seen == [(0, 0, 1), (1, 0, 0), (0, 1, 0)]
        assert sim.tdo == 1


class TestEmitScanBench:
    """Test emit_scan_bench."""

    def test_annotations(self, counter3: ScanNetlist) -> None:
        """Every cell is annotated with its chain position."""
        text = emit_scan_bench(counter3)
        for position, name in enumerate(["Q0", "Q1", "Q2"]):
            assert f"# SCANCHAIN {position}: {name}" in text
        assert "TDO = Q2" in text

    def test_reparsed_design_implements_scan_ffs(self, counter3: ScanNetlist) -> None:
        """The emitted muxes shift, capture and clear like the kernel's scan FFs."""
        scanned = parse_bench(emit_scan_bench(counter3))
        names = scanned.net_names
        assert [names[n] for n in scanned.inputs] == [
            "CLEAR",
            "TDI",
            "ScanEnable",
            "CLR",
            "ScanTestMode",
        ]
        assert [names[n] for n in scanned.outputs] == ["CARRY", "Q2OUT", "Q2"]

        state = (1, 1, 0)
        # CLEAR, TDI, ScanEnable, CLR, ScanTestMode
        assert next_state(scanned, [0, 0, 0, 0, 1], state) == (0, 0, 1)
        assert next_state(scanned, [0, 1, 1, 0, 1], state) == (1, 1, 1)
        assert next_state(scanned, [0, 1, 1, 1, 1], state) == (0, 0, 0)
