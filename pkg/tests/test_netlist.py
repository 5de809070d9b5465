"""Tests for `.bench` parsing, validation and levelization in netlist.py."""

from __future__ import annotations

from pathlib import Path

import pytest

from scanemu.exceptions import (
    CombinationalCycleError,
    DuplicateDriverError,
    NetlistSyntaxError,
    UndeclaredNetError,
)
from scanemu.netlist import (
    GateKind,
    Netlist,
    emit_bench,
    evaluate_combinational,
    load_bench,
    next_state,
    parse_bench,
    stats,
)

from .conftest import FIXTURES


def _counter_value(dffs: tuple[int, ...]) -> int:
    """Counter value with Q0 as the least significant bit."""
    return sum(bit << i for i, bit in enumerate(dffs))


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------
class TestParseBench:
    """Test parse_bench and load_bench."""

    def test_counter_census(self, counter3_netlist: Netlist) -> None:
        """The fixture's census is reported exactly."""
        census = stats(counter3_netlist)

        assert census.n_inputs == 1
        assert census.n_outputs == 2
        assert census.n_dffs == 3
        assert census.n_inverters == 2
        assert census.n_gates == 8
        assert {k: v for k, v in census.n_gates_by_kind.items() if v} == {
            GateKind.NOT: 2,
            GateKind.AND: 5,
            GateKind.XOR: 2,
            GateKind.BUF: 1,
        }

    def test_summary_line(self, counter3_netlist: Netlist) -> None:
        """Summary lists non-zero kinds in a fixed order."""
        assert stats(counter3_netlist).summary() == (
            "dffs=3 inputs=1 outputs=2 and=5 not=2 buf=1 xor=2"
        )

    def test_port_order_follows_file(self, counter3_netlist: Netlist) -> None:
        """Inputs and outputs keep their declaration order."""
        names = counter3_netlist.net_names
        assert [names[n] for n in counter3_netlist.inputs] == ["CLEAR"]
        assert [names[n] for n in counter3_netlist.outputs] == ["CARRY", "Q2OUT"]
        assert [names[f.q] for f in counter3_netlist.dffs] == ["Q0", "Q1", "Q2"]

    def test_name_from_file_stem(self) -> None:
        """load_bench names the netlist after the file."""
        assert load_bench(FIXTURES / "counter3.bench").name == "counter3"

    def test_name_from_title_comment(self) -> None:
        """Without an explicit name the leading comment is used."""
        netlist = parse_bench("# s27\nINPUT(A)\nOUTPUT(Z)\nZ = NOT(A)\n")
        assert netlist.name == "s27"

    def test_aliases_and_whitespace(self) -> None:
        """INV and BUFF are accepted, spacing is free."""
        netlist = parse_bench("INPUT(A)\nOUTPUT(Z)\nB=INV( A )\nZ   =   BUFF(B)  # tail\n")
        assert [g.kind for g in netlist.gates] == [GateKind.NOT, GateKind.BUF]

    def test_duplicate_inputs_read_once(self) -> None:
        """A gate reading the same net twice appears once in its fan-out."""
        netlist = parse_bench("INPUT(A)\nOUTPUT(Z)\nZ = AND(A, A)\n")
        assert netlist.fanout[netlist.nets["A"]] == (0,)

    def test_s400_census(self) -> None:
        """Published s400 census, when the benchmark file is available."""
        path = FIXTURES / "s400.bench"
        if not path.exists():
            pytest.skip("s400.bench is not bundled")
        census = stats(load_bench(path))
        assert (census.n_inputs, census.n_outputs, census.n_dffs) == (3, 6, 21)


# ---------------------------------------------------------------------------
# Validation errors
# ---------------------------------------------------------------------------
class TestParseErrors:
    """Test the diagnostics of malformed netlists."""

    def test_unknown_gate_reports_line(self) -> None:
        """Unknown functions name the offending line."""
        with pytest.raises(NetlistSyntaxError) as excinfo:
            parse_bench("INPUT(A)\nB = FOO(A)\n")
        assert excinfo.value.line == 2
        assert "FOO" in str(excinfo.value)

    def test_unparseable_line(self) -> None:
        """Free text is a syntax error."""
        with pytest.raises(NetlistSyntaxError, match="line 3"):
            parse_bench("INPUT(A)\nOUTPUT(A)\nthis is not bench\n")

    def test_non_ascii_file_reports_line(self, tmp_path: Path) -> None:
        """A stray byte in a file is a syntax error on its line."""
        path = tmp_path / "latin1.bench"
        path.write_bytes(b"INPUT(A)\n# caf\xe9\nOUTPUT(A)\n")
        with pytest.raises(NetlistSyntaxError) as excinfo:
            load_bench(path)
        assert excinfo.value.line == 2
        assert "0xe9" in str(excinfo.value)
        assert isinstance(excinfo.value.__cause__, UnicodeDecodeError)

    def test_arity(self) -> None:
        """NOT takes one input, AND at least two, DFF exactly one."""
        with pytest.raises(NetlistSyntaxError):
            parse_bench("INPUT(A)\nINPUT(B)\nZ = NOT(A, B)\n")
        with pytest.raises(NetlistSyntaxError):
            parse_bench("INPUT(A)\nZ = AND(A)\n")
        with pytest.raises(NetlistSyntaxError):
            parse_bench("INPUT(A)\nINPUT(B)\nQ = DFF(A, B)\n")

    def test_undeclared_net(self) -> None:
        """Reading a net nobody drives is rejected."""
        with pytest.raises(UndeclaredNetError, match="'A'"):
            parse_bench("OUTPUT(Z)\nZ = NOT(A)\n")

    def test_duplicate_driver(self) -> None:
        """A net may be driven once."""
        with pytest.raises(DuplicateDriverError, match="line 3"):
            parse_bench("INPUT(A)\nZ = NOT(A)\nZ = BUFF(A)\n")

    def test_combinational_cycle(self) -> None:
        """A loop without a flip-flop is rejected with the nets on it."""
        with pytest.raises(CombinationalCycleError) as excinfo:
            parse_bench("INPUT(A)\nOUTPUT(Y)\nX = AND(A, Y)\nY = NOT(X)\n")
        assert set(excinfo.value.cycle) == {"X", "Y"}

    def test_flip_flop_breaks_loop(self) -> None:
        """The same loop through a DFF is legal."""
        netlist = parse_bench("INPUT(A)\nOUTPUT(Y)\nX = AND(A, Q)\nQ = DFF(Y)\nY = NOT(X)\n")
        assert len(netlist.dffs) == 1


# ---------------------------------------------------------------------------
# Levelization and evaluation
# ---------------------------------------------------------------------------
class TestLevelize:
    """Test the levelized schedule and the functional evaluation."""

    def test_schedule_by_level_then_index(self, counter3_netlist: Netlist) -> None:
        """Ties at one level keep gate index order."""
        assert counter3_netlist.schedule == (0, 1, 3, 5, 9, 2, 4, 6, 8, 7)

    def test_schedule_respects_dependencies(self, counter3_netlist: Netlist) -> None:
        """Every gate is scheduled after the gates that drive it."""
        position = {g: i for i, g in enumerate(counter3_netlist.schedule)}
        for index, gate in enumerate(counter3_netlist.gates):
            for net in gate.inputs:
                driver = counter3_netlist.driver[net]
                if driver is not None:
                    assert position[driver] < position[index]

    def test_counter_counts(self, counter3_netlist: Netlist) -> None:
        """Next state is the current value plus one, modulo eight."""
        for value in range(8):
            current = tuple((value >> i) & 1 for i in range(3))
            nxt = next_state(counter3_netlist, [0], current)
            assert _counter_value(nxt) == (value + 1) % 8

    def test_clear_forces_zero(self, counter3_netlist: Netlist) -> None:
        """CLEAR=1 loads zero."""
        assert next_state(counter3_netlist, [1], (1, 0, 1)) == (0, 0, 0)

    def test_carry_output(self, counter3_netlist: Netlist) -> None:
        """CARRY is high only at seven."""
        values = evaluate_combinational(counter3_netlist, [0], (1, 1, 1))
        assert values[counter3_netlist.nets["CARRY"]] == 1
        values = evaluate_combinational(counter3_netlist, [0], (1, 1, 0))
        assert values[counter3_netlist.nets["CARRY"]] == 0


class TestEmitBench:
    """Test emit_bench."""

    def test_reparse_is_structurally_identical(self, counter3_netlist: Netlist) -> None:
        """Emitted text parses back to the same structure."""
        text = emit_bench(counter3_netlist)
        assert parse_bench(text).canonical() == counter3_netlist.canonical()

    def test_lf_and_header(self, counter3_netlist: Netlist) -> None:
        """Output uses LF and starts with the census header."""
        text = emit_bench(counter3_netlist)
        assert "\r" not in text
        assert text.startswith("# counter3\n# 1 inputs\n# 2 outputs\n# 3 D-type flipflops\n")
