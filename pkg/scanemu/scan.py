"""Full-scan insertion: daisy-chain every DFF between TDI and TDO."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
import logging

from .const import (
    NET_CLR,
    NET_SCAN_ENABLE,
    NET_SCAN_TEST_MODE,
    NET_TDI,
    SCAN_NET_SUFFIX,
)
from .exceptions import ScanInsertionError
from .netlist import Netlist, emit_bench

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScanConfig:
    """Scan insertion options.

    CLR is always active-high and synchronous; it dominates ScanEnable.
    """

    chain_order: tuple[int, ...] | None = None

    def order_for(self, n_dffs: int) -> tuple[int, ...]:
        """Return the chain order, defaulting to declaration order."""
        if self.chain_order is None:
            return tuple(range(n_dffs))
        if sorted(self.chain_order) != list(range(n_dffs)):
            raise ScanInsertionError(
                f"chain order {self.chain_order} is not a permutation of 0..{n_dffs - 1}"
            )
        return tuple(self.chain_order)


@dataclass(frozen=True)
class ScanCell:
    """One scan flip-flop: next = CLR ? 0 : (ScanEnable ? scan_in : d)."""

    dff_index: int
    scan_in: int
    d: int
    q: int


@dataclass(frozen=True)
class ScanNetlist:
    """A netlist with its scan path and the added control nets.

    Control nets are numbered after the base nets, so base net ids are
    unchanged and `net_names` extends `base.net_names`.
    """

    base: Netlist
    chain: tuple[ScanCell, ...]
    tdi: int
    tdo: int
    scan_enable: int
    clr: int
    scan_test_mode: int
    net_names: tuple[str, ...]

    @property
    def n_nets(self) -> int:
        """Base nets plus control nets."""
        return len(self.net_names)

    @property
    def boundary_inputs(self) -> int:
        """DUT input pins: primary inputs plus TDI, ScanEnable, CLR, ScanTestMode."""
        return len(self.base.inputs) + 4

    @property
    def boundary_outputs(self) -> int:
        """DUT output pins: primary outputs plus TDO."""
        return len(self.base.outputs) + 1

    def cell_name(self, position: int) -> str:
        """Name of the flip-flop at chain position `position`."""
        return self.net_names[self.chain[position].q]


def _unique(name: str, taken: set[str]) -> str:
    candidate = name
    while candidate in taken:
        candidate += SCAN_NET_SUFFIX
    taken.add(candidate)
    return candidate


def insert_scan(netlist: Netlist, config: ScanConfig | None = None) -> ScanNetlist:
    """Replace every DFF by a scan flip-flop and chain them TDI -> TDO."""
    config = config or ScanConfig()
    if not netlist.dffs:
        raise ScanInsertionError(f"netlist {netlist.name} has no DFFs to chain")
    order = config.order_for(len(netlist.dffs))

    taken = set(netlist.net_names)
    control = [_unique(n, taken) for n in (NET_TDI, NET_SCAN_ENABLE, NET_CLR, NET_SCAN_TEST_MODE)]
    tdi, scan_enable, clr, scan_test_mode = range(netlist.n_nets, netlist.n_nets + 4)

    cells: list[ScanCell] = []
    scan_in = tdi
    for index in order:
        dff = netlist.dffs[index]
        cells.append(ScanCell(dff_index=index, scan_in=scan_in, d=dff.d, q=dff.q))
        scan_in = dff.q

    scan = ScanNetlist(
        base=netlist,
        chain=tuple(cells),
        tdi=tdi,
        tdo=cells[-1].q,
        scan_enable=scan_enable,
        clr=clr,
        scan_test_mode=scan_test_mode,
        net_names=netlist.net_names + tuple(control),
    )
    _LOGGER.debug("Inserted scan chain of length %d into %s", len(cells), netlist.name)
    return scan


def chain_length(scan: ScanNetlist) -> int:
    """Number of scan flip-flops in the chain."""
    return len(scan.chain)


def shift_oracle(bits: Sequence[int], n: int) -> list[int]:
    """Chain contents after shifting `bits` (first element first) into an empty chain.

    Position 0 is nearest TDI. Pure shift-register model, no logic.
    """
    chain = [0] * n
    for bit in bits:
        chain = [bit, *chain[:-1]]
    return chain


def emit_scan_bench(scan: ScanNetlist) -> str:
    """Render the scanned design as annotated `.bench` text.

    The scan multiplexers are written out as gates, so the result parses
    as an ordinary netlist whose flip-flops implement the scan-FF function.
    """
    base = scan.base
    names = scan.net_names
    taken = set(names)
    se, clr, tdi, stm = (
        names[scan.scan_enable],
        names[scan.clr],
        names[scan.tdi],
        names[scan.scan_test_mode],
    )
    se_n = _unique(f"{se}_n", taken)
    clr_n = _unique(f"{clr}_n", taken)

    header = emit_bench(base).split("\n\n", 1)[0]
    lines = [header, f"# scan chain length {len(scan.chain)}, TDO = {names[scan.tdo]}", ""]
    lines.extend(f"INPUT({names[n]})" for n in base.inputs)
    lines.extend(f"INPUT({net})" for net in (tdi, se, clr, stm))
    lines.append("")
    lines.extend(f"OUTPUT({names[n]})" for n in base.outputs)
    if scan.tdo not in base.outputs:
        lines.append(f"OUTPUT({names[scan.tdo]})")
    lines.append("")

    mux_lines = [f"{se_n} = NOT({se})", f"{clr_n} = NOT({clr})"]
    for position, cell in enumerate(scan.chain):
        q = names[cell.q]
        shift = _unique(f"{q}_si", taken)
        func = _unique(f"{q}_fd", taken)
        nxt = _unique(f"{q}_sd", taken)
        lines.append(f"# SCANCHAIN {position}: {q}")
        lines.append(f"{q} = DFF({nxt})")
        mux_lines.extend(
            [
                f"{shift} = AND({names[cell.scan_in]}, {se}, {clr_n})",
                f"{func} = AND({names[cell.d]}, {se_n}, {clr_n})",
                f"{nxt} = OR({shift}, {func})",
            ]
        )
    lines.append("")
    lines.extend(mux_lines)

    body = emit_bench(base).rsplit("\n\n", 1)[1]
    lines.append(body.rstrip("\n"))
    return "\n".join(lines) + "\n"
