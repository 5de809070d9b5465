"""Hardware-side bus-functional models between the bridge and the scanned DUT."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import StrEnum
import logging

from .bridge import Message
from .const import (
    FSM_CONTROL_BITS,
    FSM_OFFSET_CLR,
    FSM_OFFSET_FM,
    FSM_OFFSET_TEST,
    PASSTHROUGH_WIDTH,
    PT_BIT_CLR,
    PT_BIT_FM,
    PT_BIT_GND,
    PT_BIT_SCAN_DATA_IN,
    PT_BIT_SCAN_ENABLE,
    PT_BIT_SCAN_TEST_MODE,
    PT_BIT_TEST,
    PT_BIT_VDD,
)
from .exceptions import ProtocolError, WidthMismatchError
from .simkernel import InputFrame, Simulator
from .types import ProcessTag

_LOGGER = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Pass-through transactor: one message, one DUT cycle
# ---------------------------------------------------------------------------


def encode_passthrough(
    *,
    tdi: int = 0,
    scan_enable: int = 0,
    clr: int = 0,
    scan_test_mode: int = 1,
    test: int = 0,
    fm: int = 0,
) -> Message:
    """Build the 8-bit pass-through message; VDD reads 1 and GND 0."""
    payload = (
        scan_test_mode << PT_BIT_SCAN_TEST_MODE
        | scan_enable << PT_BIT_SCAN_ENABLE
        | tdi << PT_BIT_SCAN_DATA_IN
        | clr << PT_BIT_CLR
        | test << PT_BIT_TEST
        | fm << PT_BIT_FM
        | 1 << PT_BIT_VDD
        | 0 << PT_BIT_GND
    )
    return Message(payload=payload, width=PASSTHROUGH_WIDTH)


@dataclass(eq=False)
class PassThroughState:
    """Input registers of the pass-through transactor."""

    latched_frame: InputFrame | None = None
    data_ready_seen: bool = False
    test: int = 0
    fm: int = 0


class PassThroughTransactor:
    """Decode each message straight onto the DUT pins and clock once.

    The out message carries the TDO value (bit 0) and the primary outputs
    (bits 1 and up) sampled before the clock edge.
    """

    in_width = PASSTHROUGH_WIDTH

    def __init__(self, sim: Simulator, tag: ProcessTag = ProcessTag.SCAN_SEQ) -> None:
        """Attach to a kernel; `tag` is the testbench process charged for pin changes."""
        self.sim = sim
        self.tag = tag
        self.out_width = len(sim.scan.base.outputs) + 1
        self.state = PassThroughState()
        self._out: Message | None = None

    @property
    def in_ready(self) -> bool:
        """Ready while no frame waits for its cclock and no output waits to leave."""
        return not self.state.data_ready_seen and self._out is None

    @property
    def idle(self) -> bool:
        """Nothing in flight."""
        return self.in_ready

    def reset(self) -> None:
        """Ureset: clear the input registers."""
        self.state = PassThroughState()
        self._out = None

    def _decode(self, msg: Message) -> None:
        if msg.width != PASSTHROUGH_WIDTH:
            raise WidthMismatchError(
                f"pass-through message must be {PASSTHROUGH_WIDTH} bits, got {msg.width}"
            )
        self.state.latched_frame = InputFrame.idle(
            self.sim.scan,
            tdi=msg.bit(PT_BIT_SCAN_DATA_IN),
            scan_enable=msg.bit(PT_BIT_SCAN_ENABLE),
            clr=msg.bit(PT_BIT_CLR),
            test_mode=msg.bit(PT_BIT_SCAN_TEST_MODE),
        )
        self.state.test = msg.bit(PT_BIT_TEST)
        self.state.fm = msg.bit(PT_BIT_FM)
        self.state.data_ready_seen = True

    def step(self, delivered: Message | None) -> bool:
        """Latch a delivered message; request a cclock while one is latched."""
        if delivered is not None:
            self._decode(delivered)
        return self.state.data_ready_seen

    def cclock(self) -> None:
        """Clock the DUT with the latched frame."""
        frame = self.state.latched_frame
        if not self.state.data_ready_seen or frame is None:
            raise ProtocolError("cclock granted to a pass-through transactor with no frame")
        self.sim.settle(frame, self.tag)
        before = self.sim.outputs()
        self.sim.tick(frame, self.tag)
        payload = before.tdo
        for index, value in enumerate(before.primary_outputs, start=1):
            payload |= value << index
        self._out = Message(payload=payload, width=self.out_width)
        self.state.data_ready_seen = False

    def out_message(self) -> Message | None:
        """Sampled outputs of the last cycle until delivered."""
        return self._out

    def out_accepted(self) -> None:
        """Drop the delivered output."""
        self._out = None


def passthrough_step(
    transactor: PassThroughTransactor, delivered: Message | None
) -> tuple[bool, Message | None]:
    """One uclock with the cclock granted on request.

    Returns whether the DUT ticked and the out message it produced.
    """
    if not transactor.step(delivered):
        return False, None
    transactor.cclock()
    out = transactor.out_message()
    transactor.out_accepted()
    return True, out


# ---------------------------------------------------------------------------
# FSM transactor: one message, one whole test vector
# ---------------------------------------------------------------------------


class FsmPhase(StrEnum):
    """States of the vector-shifting FSM."""

    IN_PORT_CALL = "InPortCall"
    VECTOR_RECEIVED = "VectorReceived"
    SHIFT = "Shift"
    CAPTURE = "Capture"
    SEND_OUT = "SendOut"
    FLUSH = "Flush"


class FsmTransaction(StrEnum):
    """What the FSM does with one received message."""

    # Shift n bits in, capture, send the n bits shifted out.
    SCAN = "scan"
    # Shift n bits in and send the n bits shifted out; no capture.
    SHIFT_ONLY = "shift-only"


def encode_fsm(n: int, data: int, *, clr: int = 0, test: int = 0, fm: int = 0) -> Message:
    """Build an FSM message: scan data in bits n-1..0, CLR, TEST and FM above.

    Data bit i is shifted in on shift cycle i. TEST and FM are carried to
    the DUT boundary but gate nothing.
    """
    payload = (
        data
        | clr << (n + FSM_OFFSET_CLR)
        | test << (n + FSM_OFFSET_TEST)
        | fm << (n + FSM_OFFSET_FM)
    )
    return Message(payload=payload, width=n + FSM_CONTROL_BITS)


@dataclass(eq=False)
class FsmState:
    """Registers of the FSM transactor."""

    current: FsmPhase = FsmPhase.IN_PORT_CALL
    index: int = 0
    in_vector: int = 0
    out_accumulator: int = 0
    vector_index: int = 0
    clr: int = 0
    test: int = 0
    fm: int = 0
    transaction: FsmTransaction = FsmTransaction.SCAN
    offering: bool = False
    next_vector: Message | None = None

    @property
    def label(self) -> str:
        """State name with the shift index, e.g. ``Shift3``."""
        if self.current in (FsmPhase.SHIFT, FsmPhase.FLUSH):
            return f"{self.current}{self.index}"
        return str(self.current)


class FsmTransactor:
    """Receive a whole vector, shift it serially, capture, and send the response.

    The response collected while shifting vector k in is the capture of
    vector k-1, since scan-out overlaps scan-in. Messages are scan
    transactions unless the software side scheduled a shift-only one for
    them with `expect`, in delivery order.
    """

    def __init__(
        self,
        sim: Simulator,
        tag: ProcessTag = ProcessTag.SCAN_SEQ,
        trace: bool = False,
    ) -> None:
        """Attach to a kernel; with `trace`, record the state label of every uclock."""
        self.sim = sim
        self.tag = tag
        self.n = len(sim.scan.chain)
        self.in_width = self.n + FSM_CONTROL_BITS
        self.out_width = self.n
        self.state = FsmState()
        # Software-owned; survives Ureset.
        self.schedule: deque[FsmTransaction] = deque()
        self.trace: list[str] | None = [] if trace else None

    @property
    def in_ready(self) -> bool:
        """InportReady2Receive."""
        state = self.state
        return state.current is FsmPhase.IN_PORT_CALL or (
            state.current is FsmPhase.SEND_OUT and state.next_vector is None
        )

    @property
    def idle(self) -> bool:
        """Waiting for the next vector."""
        return self.state.current is FsmPhase.IN_PORT_CALL

    def expect(self, transaction: FsmTransaction) -> None:
        """Schedule the kind of the next message not yet scheduled."""
        self.schedule.append(FsmTransaction(transaction))

    def reset(self) -> None:
        """Ureset: back to InPortCall with every register cleared."""
        self.state = FsmState()

    def _latch(self, msg: Message) -> None:
        state = self.state
        n = self.n
        state.in_vector = msg.payload & ((1 << n) - 1)
        state.clr = msg.bit(n + FSM_OFFSET_CLR)
        state.test = msg.bit(n + FSM_OFFSET_TEST)
        state.fm = msg.bit(n + FSM_OFFSET_FM)
        state.transaction = self.schedule.popleft() if self.schedule else FsmTransaction.SCAN
        state.current = FsmPhase.VECTOR_RECEIVED

    def step(self, delivered: Message | None) -> bool:
        """Advance the handshake states; return the cclock request."""
        state = self.state
        if self.trace is not None:
            self.trace.append(state.label)
        if delivered is not None and delivered.width != self.in_width:
            raise WidthMismatchError(
                f"FSM message must be {self.in_width} bits, got {delivered.width}"
            )

        match state.current:
            case FsmPhase.IN_PORT_CALL:
                if delivered is not None:
                    self._latch(delivered)
                return False
            case FsmPhase.VECTOR_RECEIVED:
                if state.transaction is FsmTransaction.SCAN:
                    state.current = FsmPhase.SHIFT
                else:
                    state.current = FsmPhase.FLUSH
                state.index = 0
                state.out_accumulator = 0
                return False
            case FsmPhase.SEND_OUT:
                state.offering = True
                if delivered is not None:
                    state.next_vector = delivered
                return False
            case _:
                if delivered is not None:
                    raise ProtocolError(f"message delivered in state {state.label}")
                return True

    def cclock(self) -> None:
        """Run the granted DUT cycle of a Shift, Flush or Capture state."""
        state = self.state
        sim = self.sim
        if state.current in (FsmPhase.SHIFT, FsmPhase.FLUSH):
            bit = (state.in_vector >> state.index) & 1
            state.out_accumulator |= sim.tdo << state.index
            sim.tick(sim.frame(tdi=bit, scan_enable=1, clr=state.clr, test_mode=1), self.tag)
            state.index += 1
            if state.index == self.n:
                if state.current is FsmPhase.SHIFT:
                    state.current = FsmPhase.CAPTURE
                else:
                    state.current = FsmPhase.SEND_OUT
            return
        if state.current is FsmPhase.CAPTURE:
            sim.tick(sim.frame(scan_enable=0, clr=state.clr, test_mode=1), self.tag)
            state.vector_index += 1
            state.current = FsmPhase.SEND_OUT
            return
        raise ProtocolError(f"cclock granted in handshake state {state.label}")

    def out_message(self) -> Message | None:
        """OutportReady2Send with the collected response."""
        state = self.state
        if state.current is FsmPhase.SEND_OUT and state.offering:
            return Message(payload=state.out_accumulator, width=self.n)
        return None

    def out_accepted(self) -> None:
        """Response delivered; take the next vector if one arrived meanwhile."""
        state = self.state
        state.offering = False
        if state.next_vector is not None:
            msg, state.next_vector = state.next_vector, None
            self._latch(msg)
        else:
            state.current = FsmPhase.IN_PORT_CALL


def fsm_step(
    transactor: FsmTransactor,
    delivered: Message | None,
    outport_space: bool = True,
) -> tuple[bool, Message | None]:
    """One uclock with the cclock granted on request.

    Returns whether a cclock was used and the out message sent, if any.
    """
    request = transactor.step(delivered)
    if request:
        transactor.cclock()
    out = transactor.out_message()
    if out is None or not outport_space:
        return request, None
    transactor.out_accepted()
    return request, out


def flush_sequence(transactor: FsmTransactor) -> Message:
    """Shift n zeros without a capture and return the response shifted out."""
    if not transactor.idle or transactor.schedule:
        raise ProtocolError(f"flush requested in state {transactor.state.label}")
    transactor.expect(FsmTransaction.SHIFT_ONLY)
    delivered: Message | None = encode_fsm(transactor.n, 0)
    while True:
        _, out = fsm_step(transactor, delivered)
        delivered = None
        if out is not None:
            return out
