"""Tests for the cycle-based simulation kernel."""

from __future__ import annotations

import io
import random

import pytest

from scanemu.exceptions import KernelMismatchError, WidthMismatchError
from scanemu.netlist import Netlist
from scanemu.scan import ScanNetlist, insert_scan, shift_oracle
from scanemu.simkernel import (
    Engine,
    InputFrame,
    Simulator,
    WaveformRecorder,
    reset_state,
    settle,
    tick,
)
from scanemu.synthetic import S400_PROFILE, generate_netlist
from scanemu.types import ProcessTag


def _make_frames(scan: ScanNetlist, count: int, seed: int = 0) -> list[InputFrame]:
    """Random input frames, with CLR rare so the state does not keep collapsing."""
    rng = random.Random(seed)
    return [
        InputFrame(
            primary_inputs=tuple(rng.getrandbits(1) for _ in scan.base.inputs),
            tdi=rng.getrandbits(1),
            scan_enable=rng.getrandbits(1),
            clr=int(rng.random() < 0.05),
            test_mode=1,
        )
        for _ in range(count)
    ]


def _transitive_fanout(base: Netlist, net: int) -> set[int]:
    """Gates reachable from `net` through combinational logic."""
    reached: set[int] = set()
    frontier = [net]
    while frontier:
        for gate in base.fanout[frontier.pop()]:
            if gate not in reached:
                reached.add(gate)
                frontier.append(base.gates[gate].output)
    return reached


# ---------------------------------------------------------------------------
# reset_state / settle
# ---------------------------------------------------------------------------
class TestResetAndSettle:
    """Test reset_state and settle."""

    def test_reset_is_settled(self, counter3: ScanNetlist) -> None:
        """All flip-flops are 0 and the logic is settled, with zero counters."""
        state = reset_state(counter3)
        nets = counter3.base.nets

        assert state.ff_values == [0, 0, 0]
        assert state.net_values[nets["NCLEAR"]] == 1
        assert state.net_values[nets["D0"]] == 1
        assert (state.cclock_count, state.event_count, state.total_events) == (0, 0, 0)

    def test_settle_evaluates_fanout_only(self, counter3: ScanNetlist) -> None:
        """Raising CLEAR re-evaluates NCLEAR and the three gates it feeds."""
        state = reset_state(counter3)
        settle(counter3, state, InputFrame(primary_inputs=(1,)), ProcessTag.RESET_SEQ)

        assert state.event_count == 4
        assert state.attribution[ProcessTag.DUT] == 4
        assert state.attribution[ProcessTag.RESET_SEQ] == 1
        assert state.net_values[counter3.base.nets["D0"]] == 0

    def test_settle_follows_changed_nets(self) -> None:
        """Toggling one input evaluates each reader of a changed net exactly once."""
        scan = insert_scan(generate_netlist(S400_PROFILE))
        base = scan.base
        state = reset_state(scan)
        for position, pin in enumerate(base.inputs):
            before = list(state.net_values)
            evaluations = state.event_count
            inputs = [before[net] for net in base.inputs]
            inputs[position] ^= 1

            settle(scan, state, InputFrame(primary_inputs=tuple(inputs)), ProcessTag.SCAN_SEQ)

            changed = {
                net
                for net, (old, new) in enumerate(zip(before, state.net_values, strict=True))
                if old != new and net < base.n_nets
            }
            evaluated = {gate for net in changed for gate in base.fanout[net]}
            assert pin in changed
            assert evaluated <= _transitive_fanout(base, pin)
            assert state.event_count - evaluations == len(evaluated)
            assert state.attribution[ProcessTag.SCAN_SEQ] == position + 1

    def test_unchanged_frame_costs_nothing(self, counter3: ScanNetlist) -> None:
        """Re-applying the same inputs schedules no events."""
        state = reset_state(counter3)
        frame = InputFrame(primary_inputs=(1,))
        settle(counter3, state, frame)
        before = state.event_count
        settle(counter3, state, frame)
        assert state.event_count == before

    def test_frame_width_checked(self, counter3: ScanNetlist) -> None:
        """Wrong primary input count or non-binary pins are rejected."""
        state = reset_state(counter3)
        with pytest.raises(WidthMismatchError):
            settle(counter3, state, InputFrame(primary_inputs=(0, 0)))
        with pytest.raises(WidthMismatchError):
            settle(counter3, state, InputFrame(primary_inputs=(0,), tdi=2))


# ---------------------------------------------------------------------------
# tick
# ---------------------------------------------------------------------------
class TestTick:
    """Test the clock edge: functional capture, shift and clear."""

    def test_functional_capture_counts(self, counter3: ScanNetlist) -> None:
        """With ScanEnable low the flip-flops load D: the counter counts."""
        sim = Simulator(counter3)
        for _ in range(3):
            sim.tick(sim.frame(test_mode=1), ProcessTag.SCAN_SEQ)
        assert sim.dff_values() == (1, 1, 0)
        assert sim.state.cclock_count == 3
        assert sim.state.attribution[ProcessTag.CLOCK_GEN] == 6

    def test_shift_matches_oracle(self, counter3: ScanNetlist) -> None:
        """With ScanEnable high the chain is a shift register."""
        sim = Simulator(counter3)
        bits = [1, 0, 1, 1]
        for bit in bits:
            sim.tick(sim.frame(tdi=bit, scan_enable=1, test_mode=1), ProcessTag.SCAN_SEQ)
        assert sim.state.ff_values == shift_oracle(bits, 3)

    def test_clr_dominates_scan_enable(self, counter3: ScanNetlist) -> None:
        """CLR clears the chain whatever ScanEnable and TDI say."""
        sim = Simulator(counter3)
        sim.tick(sim.frame(tdi=1, scan_enable=1, test_mode=1), ProcessTag.SCAN_SEQ)
        sim.tick(sim.frame(tdi=1, scan_enable=1, clr=1, test_mode=1), ProcessTag.RESET_SEQ)
        assert sim.state.ff_values == [0, 0, 0]

    def test_repeated_clear_is_quiet(self, counter3: ScanNetlist) -> None:
        """Clearing an already clear design evaluates no gates."""
        sim = Simulator(counter3)
        frame = sim.frame(clr=1, test_mode=1)
        sim.tick(frame, ProcessTag.RESET_SEQ)
        sim.tick(frame, ProcessTag.RESET_SEQ)
        assert sim.state.event_count == 0
        assert sim.state.attribution[ProcessTag.CLOCK_GEN] == 4
        # CLR and ScanTestMode rise on the first tick; the second changes no pin.
        assert sim.state.attribution[ProcessTag.RESET_SEQ] == 2
        assert sim.state.total_events == 4 + 2

    def test_outputs_sampled_after_edge(self, counter3: ScanNetlist) -> None:
        """tick returns the outputs of the new state."""
        sim = Simulator(counter3)
        out = None
        for _ in range(3):
            out = sim.tick(sim.frame(tdi=1, scan_enable=1, test_mode=1), ProcessTag.SCAN_SEQ)
        assert out is not None
        assert out.tdo == 1
        # CARRY, Q2OUT
        assert out.primary_outputs == (1, 1)
        assert sim.tdo == 1

    def test_function_form(self, toggle1: ScanNetlist) -> None:
        """The free functions thread the same state the Simulator wraps."""
        state = reset_state(toggle1)
        state, out = tick(toggle1, state, InputFrame(primary_inputs=(1,)), ProcessTag.SCAN_SEQ)
        assert state.ff_values == [1]
        assert out.primary_outputs == (1,)
        state, out = tick(toggle1, state, InputFrame(primary_inputs=(1,)), ProcessTag.SCAN_SEQ)
        assert state.ff_values == [0]
        assert out.primary_outputs == (0,)


# ---------------------------------------------------------------------------
# Engines
# ---------------------------------------------------------------------------
class TestEngines:
    """Test that the event engine agrees with the full sweep."""

    @pytest.fixture
    def s400(self) -> ScanNetlist:
        """Synthetic s400-sized design."""
        return insert_scan(generate_netlist(S400_PROFILE, seed=1))

    def test_event_matches_sweep(self, s400: ScanNetlist) -> None:
        """Both engines reach identical net values on every cycle."""
        event = Simulator(s400, Engine.EVENT)
        sweep = Simulator(s400, Engine.SWEEP)
        for frame in _make_frames(s400, 300):
            event.tick(frame, ProcessTag.SCAN_SEQ)
            sweep.tick(frame, ProcessTag.SCAN_SEQ)
            assert event.state.net_values == sweep.state.net_values
        assert event.state.event_count < sweep.state.event_count

    def test_checked_engine_runs_clean(self, s400: ScanNetlist) -> None:
        """The self-checking engine finds no disagreement on random traffic."""
        sim = Simulator(s400, Engine.CHECKED)
        for frame in _make_frames(s400, 100, seed=7):
            sim.tick(frame, ProcessTag.SCAN_SEQ)
        assert sim.state.cclock_count == 100

    def test_checked_engine_catches_corruption(self, counter3: ScanNetlist) -> None:
        """A net that the event engine failed to update is reported."""
        sim = Simulator(counter3, Engine.CHECKED)
        sim.state.net_values[counter3.base.nets["NCLEAR"]] = 0
        with pytest.raises(KernelMismatchError, match="sweep gives 1"):
            sim.settle(sim.frame())


class TestWaveformRecorder:
    """Test the VCD dump."""

    def test_dump_has_every_net(self, counter3: ScanNetlist) -> None:
        """Each net is declared and value changes are written."""
        stream = io.StringIO()
        sim = Simulator(counter3, waveform=WaveformRecorder(stream, counter3))
        for bit in (1, 0, 1):
            sim.tick(sim.frame(tdi=bit, scan_enable=1, test_mode=1), ProcessTag.SCAN_SEQ)
        sim.close()

        text = stream.getvalue()
        assert "$enddefinitions" in text
        for name in ("NCLEAR", "Q2", "TDI", "ScanEnable"):
            assert f" {name} $end" in text
        assert "#3" in text
