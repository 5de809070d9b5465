"""Event-driven, cycle-based simulation of a scanned netlist."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import StrEnum
import heapq
import logging
from typing import TextIO

from vcd import VCDWriter

from .exceptions import KernelMismatchError, WidthMismatchError
from .netlist import GATE_FUNCTIONS
from .scan import ScanNetlist
from .types import ProcessTag

_LOGGER = logging.getLogger(__name__)

# Clock generator work per tick: one rising and one falling edge.
_EDGES_PER_TICK = 2


class Engine(StrEnum):
    """Combinational settle strategy."""

    EVENT = "event"
    SWEEP = "sweep"
    CHECKED = "checked"


@dataclass(frozen=True)
class InputFrame:
    """Values on the DUT input pins for one cycle."""

    primary_inputs: tuple[int, ...]
    tdi: int = 0
    scan_enable: int = 0
    clr: int = 0
    test_mode: int = 0

    @classmethod
    def idle(cls, scan: ScanNetlist, **controls: int) -> InputFrame:
        """Frame with every primary input at 0 and the given controls."""
        return cls(primary_inputs=(0,) * len(scan.base.inputs), **controls)


@dataclass(frozen=True)
class OutputFrame:
    """Values on the DUT output pins."""

    primary_outputs: tuple[int, ...]
    tdo: int


@dataclass(frozen=True)
class _Circuit:
    """Flattened view of a scanned netlist for the inner loops."""

    funcs: tuple
    gate_inputs: tuple[tuple[int, ...], ...]
    gate_outputs: tuple[int, ...]
    rank: tuple[int, ...]
    order: tuple[int, ...]
    fanout: tuple[tuple[int, ...], ...]
    n_nets: int


def _compile(scan: ScanNetlist) -> _Circuit:
    base = scan.base
    order = base.schedule
    rank = [0] * len(base.gates)
    for position, index in enumerate(order):
        rank[index] = position
    return _Circuit(
        funcs=tuple(GATE_FUNCTIONS[g.kind] for g in base.gates),
        gate_inputs=tuple(g.inputs for g in base.gates),
        gate_outputs=tuple(g.output for g in base.gates),
        rank=tuple(rank),
        order=order,
        # Control nets feed no gates; the scan muxes live in the clock edge.
        fanout=base.fanout + ((),) * (scan.n_nets - base.n_nets),
        n_nets=scan.n_nets,
    )


@dataclass(eq=False)
class SimState:
    """Mutable state of one simulation run.

    `attribution` counts events, not cycles: the driving process is charged
    one event per primary input whose value changes, the DUT one per gate
    evaluation, and ClockGen two edges per tick.
    """

    net_values: list[int]
    ff_values: list[int]
    engine: Engine
    cclock_count: int = 0
    event_count: int = 0
    attribution: Counter[ProcessTag] = field(default_factory=Counter)
    circuit: _Circuit | None = field(default=None, repr=False)

    @property
    def total_events(self) -> int:
        """All profiled events: gate evaluations, testbench drives, clock edges."""
        return sum(self.attribution.values())


def _sweep(circuit: _Circuit, values: list[int]) -> int:
    funcs, inputs, outputs = circuit.funcs, circuit.gate_inputs, circuit.gate_outputs
    for index in circuit.order:
        values[outputs[index]] = funcs[index]([values[n] for n in inputs[index]])
    return len(circuit.order)


def _settle_events(circuit: _Circuit, values: list[int], changed: list[int]) -> int:
    """Re-evaluate only the fan-out of changed nets, in rank order."""
    funcs, inputs, outputs = circuit.funcs, circuit.gate_inputs, circuit.gate_outputs
    rank, order, fanout = circuit.rank, circuit.order, circuit.fanout
    heap: list[int] = []
    queued: set[int] = set()
    for net in changed:
        for index in fanout[net]:
            if index not in queued:
                queued.add(index)
                heapq.heappush(heap, rank[index])

    events = 0
    while heap:
        index = order[heapq.heappop(heap)]
        events += 1
        value = funcs[index]([values[n] for n in inputs[index]])
        out = outputs[index]
        if value != values[out]:
            values[out] = value
            for reader in fanout[out]:
                if reader not in queued:
                    queued.add(reader)
                    heapq.heappush(heap, rank[reader])
    return events


def _settle(state: SimState, changed: list[int]) -> int:
    circuit = state.circuit
    assert circuit is not None
    if state.engine is Engine.SWEEP:
        return _sweep(circuit, state.net_values)

    events = _settle_events(circuit, state.net_values, changed)
    if state.engine is Engine.CHECKED:
        expected = list(state.net_values)
        _sweep(circuit, expected)
        if expected != state.net_values:
            net = next(
                i for i, (a, b) in enumerate(zip(expected, state.net_values, strict=True)) if a != b
            )
            raise KernelMismatchError(
                f"net {net} is {state.net_values[net]} after event settle, "
                f"sweep gives {expected[net]} (cycle {state.cclock_count})"
            )
    return events


def _apply_frame(scan: ScanNetlist, state: SimState, frame: InputFrame) -> list[int]:
    """Drive the input pins and return the nets that changed."""
    if len(frame.primary_inputs) != len(scan.base.inputs):
        raise WidthMismatchError(
            f"frame has {len(frame.primary_inputs)} primary inputs, "
            f"netlist has {len(scan.base.inputs)}"
        )
    values = state.net_values
    changed: list[int] = []
    pins = zip(
        (*scan.base.inputs, scan.tdi, scan.scan_enable, scan.clr, scan.scan_test_mode),
        (*frame.primary_inputs, frame.tdi, frame.scan_enable, frame.clr, frame.test_mode),
        strict=True,
    )
    for net, value in pins:
        if value not in (0, 1):
            raise WidthMismatchError(f"pin {scan.net_names[net]} driven with {value!r}")
        if values[net] != value:
            values[net] = value
            changed.append(net)
    return changed


def _outputs(scan: ScanNetlist, state: SimState) -> OutputFrame:
    values = state.net_values
    return OutputFrame(
        primary_outputs=tuple(values[n] for n in scan.base.outputs),
        tdo=values[scan.tdo],
    )


def reset_state(scan: ScanNetlist, engine: Engine = Engine.EVENT) -> SimState:
    """Return a settled state with every scan flip-flop at 0 and zero counters."""
    circuit = _compile(scan)
    values = [0] * circuit.n_nets
    _sweep(circuit, values)
    return SimState(
        net_values=values,
        ff_values=[0] * len(scan.chain),
        engine=Engine(engine),
        circuit=circuit,
    )


def settle(
    scan: ScanNetlist,
    state: SimState,
    frame: InputFrame,
    tag: ProcessTag = ProcessTag.DUT,
) -> SimState:
    """Apply `frame` and settle combinational logic without a clock edge.

    `tag` is charged only for the inputs the frame changes; a frame equal
    to the current inputs costs it nothing.
    """
    changed = _apply_frame(scan, state, frame)
    state.attribution[tag] += len(changed)
    events = _settle(state, changed)
    state.event_count += events
    state.attribution[ProcessTag.DUT] += events
    return state


def tick(
    scan: ScanNetlist,
    state: SimState,
    frame: InputFrame,
    tag: ProcessTag,
) -> tuple[SimState, OutputFrame]:
    """Apply `frame`, clock every scan flip-flop once and re-settle.

    The returned outputs are sampled after the edge. A tick that changes no
    input adds nothing to `tag`; only the ClockGen edges and any DUT
    evaluations are charged.
    """
    settle(scan, state, frame, tag)

    values = state.net_values
    if frame.clr:
        nxt = [0] * len(scan.chain)
    elif frame.scan_enable:
        nxt = [values[cell.scan_in] for cell in scan.chain]
    else:
        nxt = [values[cell.d] for cell in scan.chain]

    changed: list[int] = []
    for cell, value in zip(scan.chain, nxt, strict=True):
        if values[cell.q] != value:
            values[cell.q] = value
            changed.append(cell.q)
    state.ff_values = nxt

    events = _settle(state, changed)
    state.event_count += events
    state.attribution[ProcessTag.DUT] += events
    state.attribution[ProcessTag.CLOCK_GEN] += _EDGES_PER_TICK
    state.cclock_count += 1
    return state, _outputs(scan, state)


def dff_values(scan: ScanNetlist, state: SimState) -> tuple[int, ...]:
    """Flip-flop values in the base netlist's declaration order."""
    ordered = [0] * len(scan.chain)
    for cell, value in zip(scan.chain, state.ff_values, strict=True):
        ordered[cell.dff_index] = value
    return tuple(ordered)


class WaveformRecorder:
    """VCD dump of every net, one time step per clock tick."""

    def __init__(self, stream: TextIO, scan: ScanNetlist) -> None:
        """Register one wire per net under the netlist's scope."""
        self._writer = VCDWriter(stream, timescale="10 ns", date="scanemu")
        self._vars = [
            self._writer.register_var(scan.base.name, name, "wire", size=1, init=0)
            for name in scan.net_names
        ]
        self._last = [0] * len(scan.net_names)

    def record(self, state: SimState) -> None:
        """Write the nets that changed since the last call."""
        for net, value in enumerate(state.net_values):
            if value != self._last[net]:
                self._writer.change(self._vars[net], state.cclock_count, value)
                self._last[net] = value

    def close(self) -> None:
        """Flush and close the dump."""
        self._writer.close()


class Simulator:
    """One run's kernel handle: scan netlist, state and optional waveform."""

    def __init__(
        self,
        scan: ScanNetlist,
        engine: Engine = Engine.EVENT,
        waveform: WaveformRecorder | None = None,
    ) -> None:
        """Reset the kernel."""
        self.scan = scan
        self.state = reset_state(scan, engine)
        self._waveform = waveform
        if waveform is not None:
            waveform.record(self.state)

    @property
    def tdo(self) -> int:
        """Current TDO value, i.e. the bit the next shift moves out."""
        return self.state.net_values[self.scan.tdo]

    def outputs(self) -> OutputFrame:
        """Current output pins."""
        return _outputs(self.scan, self.state)

    def frame(self, **controls: int) -> InputFrame:
        """Frame with primary inputs at 0."""
        return InputFrame.idle(self.scan, **controls)

    def tick(self, frame: InputFrame, tag: ProcessTag) -> OutputFrame:
        """Advance one controlled clock."""
        _, out = tick(self.scan, self.state, frame, tag)
        if self._waveform is not None:
            self._waveform.record(self.state)
        return out

    def settle(self, frame: InputFrame, tag: ProcessTag = ProcessTag.DUT) -> None:
        """Apply inputs without a clock edge."""
        settle(self.scan, self.state, frame, tag)
        if self._waveform is not None:
            self._waveform.record(self.state)

    def dff_values(self) -> tuple[int, ...]:
        """Flip-flop values in declaration order."""
        return dff_values(self.scan, self.state)

    def close(self) -> None:
        """Close the waveform dump, if any."""
        if self._waveform is not None:
            self._waveform.close()
            self._waveform = None
