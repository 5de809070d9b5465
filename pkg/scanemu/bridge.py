"""Message ports, dual-ready handshake and clock control between testbench and DUT."""

from __future__ import annotations

from collections import deque
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from itertools import islice
import logging
from typing import Any, Protocol

from .config import CLOCK_PARAMS_SCHEMA, validate
from .const import (
    DEFAULT_FIFO_HIGH_WATER,
    DEFAULT_PROXY_DEPTH,
    DEFAULT_RESET_CYCLES,
    DEFAULT_SOFTWARE_INTERVAL,
    WORD_BITS,
)
from .exceptions import ProtocolError, WidthMismatchError
from .types import PortDirection

_LOGGER = logging.getLogger(__name__)

_WORD_MASK = (1 << WORD_BITS) - 1


@dataclass(frozen=True)
class Message:
    """A fixed-width bit vector carried by a message port."""

    payload: int
    width: int

    def __post_init__(self) -> None:
        """Check the payload fits the declared width."""
        if self.width <= 0:
            raise WidthMismatchError(f"message width must be positive, got {self.width}")
        if not 0 <= self.payload < 1 << self.width:
            raise WidthMismatchError(f"payload {self.payload:#x} does not fit {self.width} bits")

    @property
    def storage_width(self) -> int:
        """Width rounded up to whole 32-bit words."""
        return -(-self.width // WORD_BITS) * WORD_BITS

    def bit(self, index: int) -> int:
        """Return bit `index` of the payload."""
        return (self.payload >> index) & 1


def pack_message(msg: Message) -> tuple[int, ...]:
    """Split a message into 32-bit words, least significant word first."""
    return tuple(
        (msg.payload >> shift) & _WORD_MASK for shift in range(0, msg.storage_width, WORD_BITS)
    )


def unpack_message(words: Sequence[int], width: int) -> Message:
    """Rebuild a message of `width` bits from its words; pad bits must be zero."""
    expected = -(-width // WORD_BITS)
    if len(words) != expected:
        raise WidthMismatchError(f"{width}-bit message needs {expected} words, got {len(words)}")
    payload = 0
    for index, word in enumerate(words):
        payload |= (word & _WORD_MASK) << (index * WORD_BITS)
    if payload >> width:
        raise WidthMismatchError(f"non-zero pad bits above bit {width - 1}")
    return Message(payload=payload, width=width)


@dataclass(eq=False)
class PortEndpoint:
    """One message port with its software-side FIFO.

    For an in-port the FIFO holds messages the software proxy sent and the
    hardware has not taken yet. For an out-port it holds messages the
    hardware delivered and the software has not received yet.
    """

    name: str
    direction: PortDirection
    width: int
    high_water: int = DEFAULT_FIFO_HIGH_WATER
    fifo: deque[tuple[int, ...]] = field(default_factory=deque)
    receive_ready: bool = False
    delivered_count: int = 0
    sent_count: int = 0
    last_uclock: int | None = field(default=None, repr=False)
    _over_high_water: bool = field(default=False, repr=False)

    @property
    def transmit_ready(self) -> bool:
        """Software-side TransmitReady of an in-port: FIFO is non-empty."""
        return self.direction is PortDirection.IN and bool(self.fifo)

    def check_width(self, msg: Message) -> None:
        """Raise unless `msg` has this port's width."""
        if msg.width != self.width:
            raise WidthMismatchError(
                f"port {self.name} is {self.width} bits wide, message is {msg.width}"
            )

    def enqueue(self, msg: Message) -> None:
        """Append `msg` to the FIFO, warning once per excursion above high water."""
        self.fifo.append(pack_message(msg))
        if len(self.fifo) > self.high_water and not self._over_high_water:
            self._over_high_water = True
            _LOGGER.warning(
                "Port %s FIFO depth %d is above the high-water mark %d",
                self.name,
                len(self.fifo),
                self.high_water,
            )
        elif len(self.fifo) <= self.high_water:
            self._over_high_water = False


def proxy_send(port: PortEndpoint, msg: Message) -> int:
    """Queue `msg` on an in-port from the software side; returns the FIFO depth."""
    if port.direction is not PortDirection.IN:
        raise ProtocolError(f"cannot send on out-port {port.name}")
    port.check_width(msg)
    port.enqueue(msg)
    port.sent_count += 1
    return len(port.fifo)


def proxy_receive(port: PortEndpoint) -> Message | None:
    """Take the oldest delivered message from an out-port, if any."""
    if port.direction is not PortDirection.OUT:
        raise ProtocolError(f"cannot receive on in-port {port.name}")
    if not port.fifo:
        return None
    return unpack_message(port.fifo.popleft(), port.width)


def hw_handshake_step(
    port: PortEndpoint,
    hw_ready: bool,
    uclock: int,
    message: Message | None = None,
) -> Message | None:
    """Run the port's handshake for one uclock edge.

    A message moves iff TransmitReady and ReceiveReady are both high on the
    edge. For an in-port `hw_ready` is the hardware's ReceiveReady; for an
    out-port it is the hardware's TransmitReady and `message` is the message
    on offer, while ReceiveReady comes from the software side.
    """
    if port.last_uclock == uclock:
        raise ProtocolError(f"port {port.name} stepped twice on uclock {uclock}")
    port.last_uclock = uclock

    if port.direction is PortDirection.IN:
        port.receive_ready = hw_ready
        if not (hw_ready and port.fifo):
            return None
        port.delivered_count += 1
        return unpack_message(port.fifo.popleft(), port.width)

    if not (hw_ready and message is not None and port.receive_ready):
        return None
    port.check_width(message)
    port.enqueue(message)
    port.sent_count += 1
    port.delivered_count += 1
    return message


@dataclass(frozen=True)
class ClockParams:
    """Clock port parameters of the single controlled clock.

    Duty is validated and reported only; it does not change edge counts in a
    cycle model.
    """

    ratio_num: int = 1
    ratio_den: int = 1
    duty_hi: int = 1
    duty_lo: int = 1
    phase: int = 0
    reset_cycles: int = DEFAULT_RESET_CYCLES

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ClockParams:
        """Build validated parameters from a mapping."""
        return cls(**validate(CLOCK_PARAMS_SCHEMA, data, what="clock parameters"))

    def __post_init__(self) -> None:
        """Reject ratios above 1/1 and negative counts."""
        validate(CLOCK_PARAMS_SCHEMA, self.__dict__.copy(), what="clock parameters")


@dataclass(eq=False)
class ClockControlState:
    """Uncontrolled clock, gated controlled clock and Ureset."""

    params: ClockParams = field(default_factory=ClockParams)
    uclock_count: int = 0
    cclock_count: int = 0
    ready_for_cclock: bool = False
    reset_cycles_remaining: int = -1
    edge_log: list[tuple[int, bool, bool]] | None = None
    credit: int = field(default=0, repr=False)
    phase_remaining: int = field(default=0, repr=False)

    def __post_init__(self) -> None:
        """Arm Ureset and the phase delay."""
        if self.reset_cycles_remaining < 0:
            self.reset_cycles_remaining = self.params.reset_cycles
        self.phase_remaining = self.params.phase

    @property
    def in_reset(self) -> bool:
        """Whether Ureset is asserted for the next uclock edge."""
        return self.reset_cycles_remaining > 0


def clock_step(ctrl: ClockControlState, transactor_ready: bool) -> bool:
    """Advance the uncontrolled clock one edge; return whether a cclock was granted."""
    ctrl.uclock_count += 1
    granted = False
    if ctrl.reset_cycles_remaining > 0:
        ctrl.reset_cycles_remaining -= 1
        ctrl.ready_for_cclock = False
    elif ctrl.phase_remaining > 0:
        ctrl.phase_remaining -= 1
        ctrl.ready_for_cclock = False
    else:
        params = ctrl.params
        # One pending slot at most, so a frozen DUT never earns a burst.
        ctrl.credit = min(ctrl.credit + params.ratio_num, params.ratio_den)
        ctrl.ready_for_cclock = transactor_ready
        if transactor_ready and ctrl.credit >= params.ratio_den:
            ctrl.credit -= params.ratio_den
            ctrl.cclock_count += 1
            granted = True
    if ctrl.edge_log is not None:
        ctrl.edge_log.append((ctrl.uclock_count, ctrl.ready_for_cclock, granted))
    return granted


def bridge_stats(
    in_port: PortEndpoint,
    out_port: PortEndpoint,
    ctrl: ClockControlState,
) -> dict[str, int]:
    """Counter snapshot: hardware reads and writes, uclocks and cclocks."""
    return {
        "hw_reads": in_port.delivered_count,
        "hw_writes": out_port.delivered_count,
        "uclocks": ctrl.uclock_count,
        "cclocks": ctrl.cclock_count,
    }


class Transactor(Protocol):
    """Hardware-side bus-functional model driven by the bridge once per uclock."""

    in_width: int
    out_width: int

    @property
    def in_ready(self) -> bool:
        """ReceiveReady on the in-port for the coming edge."""

    @property
    def idle(self) -> bool:
        """No message is being processed or waiting to be sent."""

    def reset(self) -> None:
        """Ureset arm."""

    def step(self, delivered: Message | None) -> bool:
        """Consume this edge's delivery; return the cclock request."""

    def cclock(self) -> None:
        """A cclock was granted on this edge; clock the DUT."""

    def out_message(self) -> Message | None:
        """Message on offer at the out-port, if any."""

    def out_accepted(self) -> None:
        """The offered out message was delivered."""


class Bridge:
    """Lockstep scheduler joining a software proxy and a transactor.

    Per uclock edge: the proxy may send the next message, the in-port
    handshakes, the transactor steps, clock control decides the cclock, the
    DUT is clocked if granted, and the out-port handshakes.
    """

    def __init__(
        self,
        transactor: Transactor,
        clock: ClockParams | None = None,
        software_interval: int = DEFAULT_SOFTWARE_INTERVAL,
        high_water: int = DEFAULT_FIFO_HIGH_WATER,
        edge_log: bool = False,
        proxy_depth: int = DEFAULT_PROXY_DEPTH,
    ) -> None:
        """Create ports sized for `transactor` and hold it in Ureset.

        The proxy sends while the in-port FIFO holds fewer than `proxy_depth`
        messages, at most once per `software_interval` uclocks.
        """
        if software_interval < 1:
            raise ProtocolError("software interval must be at least one uclock")
        if proxy_depth < 1:
            raise ProtocolError("proxy depth must be at least one message")
        self.transactor = transactor
        self.in_port = PortEndpoint("in", PortDirection.IN, transactor.in_width, high_water)
        self.out_port = PortEndpoint("out", PortDirection.OUT, transactor.out_width, high_water)
        self.out_port.receive_ready = True
        self.ctrl = ClockControlState(
            params=clock or ClockParams(), edge_log=[] if edge_log else None
        )
        self.software_interval = software_interval
        self.proxy_depth = proxy_depth
        self._last_send = -software_interval
        self.received: list[Message] = []
        self._sink: Callable[[Message], None] | None = None

    @property
    def uclock(self) -> int:
        """Uclock edges so far."""
        return self.ctrl.uclock_count

    def stats(self) -> dict[str, int]:
        """Counter snapshot."""
        return bridge_stats(self.in_port, self.out_port, self.ctrl)

    def step(self, pending: deque[Message]) -> bool:
        """Run one uclock edge; return whether anything moved."""
        edge = self.ctrl.uclock_count + 1
        transactor = self.transactor
        if self.ctrl.in_reset:
            transactor.reset()

        if (
            pending
            and len(self.in_port.fifo) < self.proxy_depth
            and edge - self._last_send >= self.software_interval
        ):
            proxy_send(self.in_port, pending.popleft())
            self._last_send = edge

        hw_ready = transactor.in_ready and not self.ctrl.in_reset
        delivered = hw_handshake_step(self.in_port, hw_ready, edge)
        request = transactor.step(delivered)
        granted = clock_step(self.ctrl, request)
        if granted:
            transactor.cclock()

        offer = transactor.out_message()
        sent = hw_handshake_step(self.out_port, offer is not None, edge, offer)
        if sent is not None:
            transactor.out_accepted()
            received = proxy_receive(self.out_port)
            assert received is not None
            if self._sink is None:
                self.received.append(received)
            else:
                self._sink(received)
        return delivered is not None or granted or sent is not None

    def run(
        self,
        messages: Iterable[Message],
        sink: Callable[[Message], None] | None = None,
        stall_limit: int = 1024,
    ) -> list[Message]:
        """Send `messages` and clock until the transactor is idle again.

        Messages are pulled from `messages` one at a time. Out messages go to
        `sink` as they arrive; without a sink they are collected and returned.
        """
        source = iter(messages)
        pending: deque[Message] = deque(islice(source, 1))
        self.received = []
        self._sink = sink
        stalled = 0
        params = self.ctrl.params
        limit = stall_limit + self.software_interval + params.ratio_den + params.phase
        limit += params.reset_cycles
        while pending or self.in_port.fifo or not self.transactor.idle or self.ctrl.in_reset:
            stalled = 0 if self.step(pending) else stalled + 1
            if not pending:
                pending.extend(islice(source, 1))
            if stalled > limit:
                raise ProtocolError(
                    f"bridge made no progress for {stalled} uclocks at uclock {self.uclock}"
                )
        return self.received
