"""Parsing, validation and levelization of ISCAS89 `.bench` netlists."""

from __future__ import annotations

from collections import deque
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from functools import cached_property
import logging
from pathlib import Path
import re

from .exceptions import (
    CombinationalCycleError,
    DuplicateDriverError,
    NetlistSyntaxError,
    UndeclaredNetError,
)

_LOGGER = logging.getLogger(__name__)

_PORT_RE = re.compile(r"^(INPUT|OUTPUT)\s*\(\s*([^\s(),=]+)\s*\)$", re.IGNORECASE)
_ASSIGN_RE = re.compile(r"^([^\s(),=]+)\s*=\s*([A-Za-z]+)\s*\((.*)\)$")


class GateKind(StrEnum):
    """Combinational primitive."""

    AND = "AND"
    NAND = "NAND"
    OR = "OR"
    NOR = "NOR"
    NOT = "NOT"
    BUF = "BUF"
    XOR = "XOR"
    XNOR = "XNOR"


_KIND_ALIASES: dict[str, GateKind] = {"INV": GateKind.NOT, "BUFF": GateKind.BUF}
_UNARY_KINDS = frozenset({GateKind.NOT, GateKind.BUF})

# `.bench` spelling used on re-emission.
_EMIT_NAMES: dict[GateKind, str] = {GateKind.BUF: "BUFF"}


def _parity(values: Sequence[int]) -> int:
    acc = 0
    for value in values:
        acc ^= value
    return acc


GATE_FUNCTIONS: dict[GateKind, Callable[[Sequence[int]], int]] = {
    GateKind.AND: lambda v: int(all(v)),
    GateKind.NAND: lambda v: int(not all(v)),
    GateKind.OR: lambda v: int(any(v)),
    GateKind.NOR: lambda v: int(not any(v)),
    GateKind.NOT: lambda v: 1 - v[0],
    GateKind.BUF: lambda v: v[0],
    GateKind.XOR: _parity,
    GateKind.XNOR: lambda v: 1 - _parity(v),
}


@dataclass(frozen=True)
class Gate:
    """A combinational gate driving one net."""

    kind: GateKind
    inputs: tuple[int, ...]
    output: int


@dataclass(frozen=True)
class Dff:
    """A D flip-flop on the single implicit global clock."""

    d: int
    q: int


@dataclass(frozen=True)
class NetlistStats:
    """Census of a netlist."""

    n_inputs: int
    n_outputs: int
    n_dffs: int
    n_gates_by_kind: dict[GateKind, int] = field(hash=False)

    @property
    def n_inverters(self) -> int:
        """Number of NOT gates."""
        return self.n_gates_by_kind[GateKind.NOT]

    @property
    def n_gates(self) -> int:
        """Number of gates other than inverters."""
        return sum(self.n_gates_by_kind.values()) - self.n_inverters

    def summary(self) -> str:
        """One-line census, e.g. ``dffs=21 inputs=3 outputs=6 ...``."""
        kinds = " ".join(
            f"{kind.value.lower()}={count}"
            for kind, count in self.n_gates_by_kind.items()
            if count
        )
        line = f"dffs={self.n_dffs} inputs={self.n_inputs} outputs={self.n_outputs}"
        return f"{line} {kinds}" if kinds else line


@dataclass(frozen=True)
class Netlist:
    """A validated gate-level circuit; net ids index `net_names`."""

    name: str
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]
    gates: tuple[Gate, ...]
    dffs: tuple[Dff, ...]
    net_names: tuple[str, ...]

    @cached_property
    def nets(self) -> dict[str, int]:
        """Symbol table mapping net name to net id."""
        return {name: net for net, name in enumerate(self.net_names)}

    @property
    def n_nets(self) -> int:
        """Number of nets."""
        return len(self.net_names)

    @cached_property
    def driver(self) -> tuple[int | None, ...]:
        """Index of the gate driving each net, None for PIs and DFF outputs."""
        drivers: list[int | None] = [None] * self.n_nets
        for index, gate in enumerate(self.gates):
            drivers[gate.output] = index
        return tuple(drivers)

    @cached_property
    def fanout(self) -> tuple[tuple[int, ...], ...]:
        """Gates reading each net, without repeats, in gate index order."""
        readers: list[list[int]] = [[] for _ in range(self.n_nets)]
        for index, gate in enumerate(self.gates):
            for net in dict.fromkeys(gate.inputs):
                readers[net].append(index)
        return tuple(tuple(r) for r in readers)

    @cached_property
    def schedule(self) -> tuple[int, ...]:
        """Levelized gate evaluation order."""
        return levelize(self)

    def canonical(self) -> tuple[object, ...]:
        """Id-independent structure, equal for structurally identical netlists."""
        names = self.net_names
        return (
            tuple(names[n] for n in self.inputs),
            tuple(names[n] for n in self.outputs),
            tuple(sorted((names[f.q], names[f.d]) for f in self.dffs)),
            tuple(
                sorted(
                    (names[g.output], g.kind.value, tuple(names[n] for n in g.inputs))
                    for g in self.gates
                )
            ),
        )


def _split_args(raw: str) -> list[str]:
    return [arg.strip() for arg in raw.split(",")] if raw.strip() else []


def _gate_kind(token: str, line_no: int) -> GateKind | None:
    """Return the gate kind for a `.bench` function name, None for DFF."""
    upper = token.upper()
    if upper == "DFF":
        return None
    if upper in _KIND_ALIASES:
        return _KIND_ALIASES[upper]
    try:
        return GateKind(upper)
    except ValueError:
        raise NetlistSyntaxError(line_no, f"unknown gate type {token!r}") from None


def parse_bench(text: str, name: str | None = None) -> Netlist:
    """Parse and validate `.bench` text.

    Net ids are assigned in first-appearance order; primary input and output
    order follows the file. Raises a `NetlistError` subclass on syntax errors,
    undeclared nets, duplicate drivers and combinational cycles.
    """
    net_ids: dict[str, int] = {}
    drivers: dict[int, int] = {}  # net -> line that drives it
    used_at: dict[int, int] = {}  # net -> first line that reads it
    inputs: list[int] = []
    outputs: list[int] = []
    gates: list[Gate] = []
    dffs: list[Dff] = []
    title: str | None = None

    def net_id(net_name: str) -> int:
        return net_ids.setdefault(net_name, len(net_ids))

    def drive(net: int, line_no: int) -> None:
        if net in drivers:
            raise DuplicateDriverError(
                f"line {line_no}: net {net_name_of(net)!r} already driven "
                f"on line {drivers[net]}"
            )
        drivers[net] = line_no

    def read(net: int, line_no: int) -> None:
        used_at.setdefault(net, line_no)

    def net_name_of(net: int) -> str:
        return next(k for k, v in net_ids.items() if v == net)

    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line, _, comment = raw_line.partition("#")
        line = line.strip()
        if not line:
            if title is None and comment.strip() and not gates and not inputs:
                title = comment.strip().split()[0]
            continue

        if match := _PORT_RE.match(line):
            keyword, net_name = match.group(1).upper(), match.group(2)
            net = net_id(net_name)
            if keyword == "INPUT":
                drive(net, line_no)
                inputs.append(net)
            else:
                if net in outputs:
                    raise NetlistSyntaxError(line_no, f"duplicate OUTPUT({net_name})")
                read(net, line_no)
                outputs.append(net)
            continue

        match = _ASSIGN_RE.match(line)
        if match is None:
            raise NetlistSyntaxError(line_no, f"cannot parse {line!r}")

        target, func, raw_args = match.groups()
        args = _split_args(raw_args)
        if any(not arg or re.search(r"[\s()=]", arg) for arg in args):
            raise NetlistSyntaxError(line_no, f"malformed argument list in {line!r}")
        kind = _gate_kind(func, line_no)
        out = net_id(target)
        arg_ids = [net_id(arg) for arg in args]

        if kind is None:
            if len(arg_ids) != 1:
                raise NetlistSyntaxError(line_no, "DFF takes exactly one input")
            drive(out, line_no)
            read(arg_ids[0], line_no)
            dffs.append(Dff(d=arg_ids[0], q=out))
            continue

        if kind in _UNARY_KINDS and len(arg_ids) != 1:
            raise NetlistSyntaxError(line_no, f"{kind} takes exactly one input")
        if kind not in _UNARY_KINDS and len(arg_ids) < 2:
            raise NetlistSyntaxError(line_no, f"{kind} needs at least two inputs")
        drive(out, line_no)
        for arg in arg_ids:
            read(arg, line_no)
        gates.append(Gate(kind=kind, inputs=tuple(arg_ids), output=out))

    for net, line_no in used_at.items():
        if net not in drivers:
            raise UndeclaredNetError(
                f"line {line_no}: net {net_name_of(net)!r} is never driven"
            )

    netlist = Netlist(
        name=name or title or "netlist",
        inputs=tuple(inputs),
        outputs=tuple(outputs),
        gates=tuple(gates),
        dffs=tuple(dffs),
        net_names=tuple(net_ids),
    )
    _ = netlist.schedule  # rejects combinational cycles
    _LOGGER.debug(
        "Parsed netlist %s: %d nets, %d gates, %d DFFs",
        netlist.name,
        netlist.n_nets,
        len(netlist.gates),
        len(netlist.dffs),
    )
    return netlist


def load_bench(path: str | Path) -> Netlist:
    """Read and parse a `.bench` file, named after the file stem.

    Raises `NetlistSyntaxError` naming the line of the first non-ASCII byte.
    """
    path = Path(path)
    raw = path.read_bytes()
    try:
        text = raw.decode("ascii")
    except UnicodeDecodeError as err:
        line = raw.count(b"\n", 0, err.start) + 1
        raise NetlistSyntaxError(line, f"non-ASCII byte 0x{raw[err.start]:02x}") from err
    return parse_bench(text, name=path.stem)


def stats(netlist: Netlist) -> NetlistStats:
    """Return the exact census of `netlist` by gate kind."""
    by_kind = dict.fromkeys(GateKind, 0)
    for gate in netlist.gates:
        by_kind[gate.kind] += 1
    return NetlistStats(
        n_inputs=len(netlist.inputs),
        n_outputs=len(netlist.outputs),
        n_dffs=len(netlist.dffs),
        n_gates_by_kind=by_kind,
    )


def _find_cycle(netlist: Netlist, remaining: set[int]) -> list[str]:
    """Walk backwards through unscheduled gates until one repeats."""
    driver = netlist.driver
    path: list[int] = []
    position: dict[int, int] = {}
    gate = min(remaining)
    while gate not in position:
        position[gate] = len(path)
        path.append(gate)
        gate = next(
            d
            for net in netlist.gates[gate].inputs
            if (d := driver[net]) is not None and d in remaining
        )
    loop = path[position[gate] :]
    loop.reverse()
    return [netlist.net_names[netlist.gates[g].output] for g in loop]


def levelize(netlist: Netlist) -> tuple[int, ...]:
    """Return gate indices in topological order.

    Gates are ordered by logic level (longest path from a PI or DFF output),
    ties broken by gate index, so the schedule is deterministic.
    """
    driver = netlist.driver
    pending = [0] * len(netlist.gates)
    readers: list[list[int]] = [[] for _ in netlist.gates]
    for index, gate in enumerate(netlist.gates):
        for net in gate.inputs:
            src = driver[net]
            if src is not None:
                pending[index] += 1
                readers[src].append(index)

    level = [0] * len(netlist.gates)
    ready = deque(i for i, count in enumerate(pending) if count == 0)
    done = 0
    while ready:
        index = ready.popleft()
        done += 1
        for reader in readers[index]:
            level[reader] = max(level[reader], level[index] + 1)
            pending[reader] -= 1
            if pending[reader] == 0:
                ready.append(reader)

    if done != len(netlist.gates):
        remaining = {i for i, count in enumerate(pending) if count > 0}
        raise CombinationalCycleError(_find_cycle(netlist, remaining))

    return tuple(sorted(range(len(netlist.gates)), key=lambda i: (level[i], i)))


def evaluate_gate(gate: Gate, values: Sequence[int]) -> int:
    """Evaluate one gate against the current net values."""
    return GATE_FUNCTIONS[gate.kind]([values[n] for n in gate.inputs])


def evaluate_combinational(
    netlist: Netlist,
    pi_values: Sequence[int],
    dff_values: Sequence[int],
) -> list[int]:
    """Settle every net with one pass in levelized order."""
    values = [0] * netlist.n_nets
    for net, value in zip(netlist.inputs, pi_values, strict=True):
        values[net] = value
    for dff, value in zip(netlist.dffs, dff_values, strict=True):
        values[dff.q] = value
    for index in netlist.schedule:
        gate = netlist.gates[index]
        values[gate.output] = evaluate_gate(gate, values)
    return values


def next_state(
    netlist: Netlist,
    pi_values: Sequence[int],
    dff_values: Sequence[int],
) -> tuple[int, ...]:
    """Functional next state of every DFF, in declaration order."""
    values = evaluate_combinational(netlist, pi_values, dff_values)
    return tuple(values[dff.d] for dff in netlist.dffs)


def emit_bench(netlist: Netlist) -> str:
    """Render `netlist` as `.bench` text with LF line endings."""
    names = netlist.net_names
    census = stats(netlist)
    lines = [
        f"# {netlist.name}",
        f"# {census.n_inputs} inputs",
        f"# {census.n_outputs} outputs",
        f"# {census.n_dffs} D-type flipflops",
        f"# {census.n_inverters} inverters",
        f"# {census.n_gates} gates",
        "",
    ]
    lines.extend(f"INPUT({names[n]})" for n in netlist.inputs)
    lines.append("")
    lines.extend(f"OUTPUT({names[n]})" for n in netlist.outputs)
    lines.append("")
    lines.extend(f"{names[f.q]} = DFF({names[f.d]})" for f in netlist.dffs)
    lines.append("")
    for index in netlist.schedule:
        gate = netlist.gates[index]
        func = _EMIT_NAMES.get(gate.kind, gate.kind.value)
        args = ", ".join(names[n] for n in gate.inputs)
        lines.append(f"{names[gate.output]} = {func}({args})")
    return "\n".join(lines) + "\n"
