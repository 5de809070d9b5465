"""Software testbench: preamble tests, scan sequence, run modes and golden logs."""

from __future__ import annotations

from collections import Counter
from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass, field
import logging
from pathlib import Path
import random
import re
import time

from .bridge import Bridge, ClockParams, Message
from .const import DEFAULT_PROXY_DEPTH, DEFAULT_SOFTWARE_INTERVAL, GOLDEN_HEADER
from .exceptions import (
    ConfigError,
    GoldenFormatError,
    GoldenMismatchError,
    VerificationError,
)
from .metrics import CostModel, RunStats, attribution_percentages, with_estimate
from .netlist import next_state
from .scan import ScanNetlist
from .simkernel import Engine, Simulator, WaveformRecorder
from .transactor import (
    FsmTransaction,
    FsmTransactor,
    PassThroughTransactor,
    encode_fsm,
    encode_passthrough,
)
from .types import TESTBENCH_TAGS, ProcessTag, RunMode, VectorSource

_LOGGER = logging.getLogger(__name__)

_HEADER_RE = re.compile(rf"^{re.escape(GOLDEN_HEADER)} n=(\d+) count=(\d+)$")

# Scan-sequence progress is logged every this many vectors.
_PROGRESS_EVERY = 1 << 16

# (TDI, ScanEnable, CLR) for one DUT cycle.
Pins = tuple[int, int, int]

_SHIFT_ONLY = FsmTransaction.SHIFT_ONLY


@dataclass(frozen=True)
class TestPlan:
    """What to run: mode, vectors and the bridge set-up for emulation."""

    __test__ = False

    mode: RunMode = RunMode.DIRECT
    vector_count: int | None = None
    vector_source: VectorSource = VectorSource.COUNTING
    vectors: tuple[int, ...] = ()
    seed: int = 0
    engine: Engine = Engine.EVENT
    software_interval: int = DEFAULT_SOFTWARE_INTERVAL
    proxy_depth: int = DEFAULT_PROXY_DEPTH
    clock: ClockParams = field(default_factory=ClockParams)
    cost_model: CostModel = field(default_factory=CostModel)
    record_golden: Path | None = None
    compare_golden: Path | None = None


def plan_vectors(plan: TestPlan, n: int) -> Iterable[int]:
    """Test vectors of `plan` for an n-bit chain, as integers (bit i shifted i-th)."""
    full = 1 << n
    count = plan.vector_count
    match plan.vector_source:
        case VectorSource.COUNTING:
            count = full if count is None else count
            if count > full:
                raise ConfigError(f"{count} counting vectors exceed 2^{n} = {full}")
            return range(count)
        case VectorSource.EXPLICIT:
            vectors = plan.vectors if count is None else plan.vectors[:count]
            if bad := [v for v in vectors if not 0 <= v < full]:
                raise ConfigError(f"vector {bad[0]} does not fit a {n}-bit chain")
            return vectors
        case VectorSource.RANDOM:
            rng = random.Random(plan.seed)
            return [rng.getrandbits(n) for _ in range(full if count is None else count)]
    raise ConfigError(f"unknown vector source {plan.vector_source!r}")


def format_response(value: int, n: int) -> str:
    """Response bits as text, first shifted-out bit leftmost."""
    return "".join("1" if (value >> i) & 1 else "0" for i in range(n))


def capture_oracle(scan: ScanNetlist, vector: int) -> str:
    """Expected response to `vector`, from the levelized next-state function.

    Shifting `vector` in leaves bit n-1-j at chain position j; the capture
    loads each cell's functional next state, and the response lists the
    chain from the TDO end.
    """
    n = len(scan.chain)
    state = [0] * n
    for position, cell in enumerate(scan.chain):
        state[cell.dff_index] = (vector >> (n - 1 - position)) & 1
    nxt = next_state(scan.base, [0] * len(scan.base.inputs), state)
    captured = [nxt[cell.dff_index] for cell in scan.chain]
    return "".join(str(captured[n - 1 - i]) for i in range(n))


# ---------------------------------------------------------------------------
# Golden logs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GoldenLog:
    """Ordered scan-out responses of one run."""

    n: int
    responses: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        """Check every response is an n-character bit string."""
        for index, response in enumerate(self.responses):
            if len(response) != self.n or set(response) - {"0", "1"}:
                raise GoldenFormatError(f"response {index} {response!r} is not {self.n} bits")

    @property
    def count(self) -> int:
        """Number of responses."""
        return len(self.responses)


def format_golden(log: GoldenLog) -> str:
    """Render a log in the SCANLOG text format."""
    lines = [f"{GOLDEN_HEADER} n={log.n} count={log.count}", *log.responses]
    return "\n".join(lines) + "\n"


def parse_golden(text: str) -> GoldenLog:
    """Parse SCANLOG text."""
    header, *lines = text.split("\n")
    match = _HEADER_RE.match(header.rstrip("\r"))
    if match is None:
        raise GoldenFormatError(f"bad SCANLOG header {header!r}")
    n, count = int(match.group(1)), int(match.group(2))
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) != count:
        raise GoldenFormatError(f"header says {count} responses, found {len(lines)}")
    return GoldenLog(n=n, responses=tuple(line.rstrip("\r") for line in lines))


def write_golden(log: GoldenLog, path: str | Path) -> None:
    """Write a log with LF line endings."""
    Path(path).write_text(format_golden(log), encoding="utf-8", newline="\n")
    _LOGGER.info("Wrote %d responses to %s", log.count, path)


def read_golden(path: str | Path) -> GoldenLog:
    """Read a log file."""
    return parse_golden(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class GoldenDiff:
    """Outcome of comparing two logs."""

    equal: bool
    index: int | None = None
    length_mismatch: bool = False
    message: str = ""


def compare_golden(a: GoldenLog, b: GoldenLog) -> GoldenDiff:
    """Bit-exact comparison, reporting the first differing vector index."""
    if a.n != b.n:
        raise VerificationError(f"logs are for different chain lengths ({a.n} and {b.n})")
    for index, (left, right) in enumerate(zip(a.responses, b.responses, strict=False)):
        if left != right:
            return GoldenDiff(False, index, message=f"vector {index}: {left} != {right}")
    if a.count != b.count:
        shorter = min(a.count, b.count)
        return GoldenDiff(
            False,
            shorter,
            length_mismatch=True,
            message=f"logs agree on {shorter} vectors but hold {a.count} and {b.count}",
        )
    return GoldenDiff(True)


def assert_golden_equal(a: GoldenLog, b: GoldenLog) -> None:
    """Raise `GoldenMismatchError` unless the logs are identical."""
    diff = compare_golden(a, b)
    if not diff.equal:
        raise GoldenMismatchError(diff.index, diff.message)


# ---------------------------------------------------------------------------
# Runs
# ---------------------------------------------------------------------------


class _ResponseCollector:
    """Assemble TDO samples into responses, `stride` samples per response."""

    def __init__(self, n: int, stride: int) -> None:
        """Collect n-bit responses from groups of `stride` samples."""
        self.n = n
        self.stride = stride
        self.responses: list[str] = []
        self._value = 0
        self._position = 0

    def __call__(self, tdo: int) -> None:
        """Take one TDO sample."""
        if self._position < self.n:
            self._value |= tdo << self._position
        self._position += 1
        if self._position == self.stride:
            self.finish()

    def finish(self) -> None:
        """Close a partial group, e.g. the final flush."""
        if self._position:
            self.responses.append(format_response(self._value, self.n))
        self._value = 0
        self._position = 0


def _vector_pins(vectors: Iterable[int], n: int) -> Iterator[Pins]:
    for vector in vectors:
        for i in range(n):
            yield (vector >> i) & 1, 1, 0
        yield 0, 0, 0


@dataclass(frozen=True)
class ScanRunResult:
    """Everything one run produced."""

    log: GoldenLog
    stats: RunStats
    preamble_cclocks: int
    scan_cclocks: int
    scan_hw_reads: int
    side_channel: tuple[str, ...]
    comparison: GoldenDiff | None = None
    # Host events per process tag; sums to `stats.events`.
    event_counts: dict[str, int] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        """No golden comparison was requested, or it matched."""
        return self.comparison is None or self.comparison.equal


class ScanRun:
    """One run of the test plan on a scanned design in one mode.

    Direct and acceleration modes drive the kernel cycle by cycle; the
    emulation modes go through the bridge and a transactor.
    """

    def __init__(
        self,
        scan: ScanNetlist,
        plan: TestPlan,
        waveform: WaveformRecorder | None = None,
    ) -> None:
        """Reset the kernel and, for emulation, build the bridge."""
        self.scan = scan
        self.plan = plan
        self.mode = RunMode(plan.mode)
        self.n = len(scan.chain)
        self.sim = Simulator(scan, plan.engine, waveform)
        self.messages: Counter[ProcessTag] = Counter()
        self.bridge: Bridge | None = None
        self._passthrough: PassThroughTransactor | None = None
        self._fsm: FsmTransactor | None = None
        if self.mode is RunMode.EMUL_PASS:
            self._passthrough = PassThroughTransactor(self.sim)
            self.bridge = Bridge(
                self._passthrough,
                plan.clock,
                plan.software_interval,
                proxy_depth=plan.proxy_depth,
            )
        elif self.mode is RunMode.EMUL_FSM:
            self._fsm = FsmTransactor(self.sim)
            self.bridge = Bridge(
                self._fsm, plan.clock, plan.software_interval, proxy_depth=plan.proxy_depth
            )

    def _counted(self, messages: Iterable[Message], tag: ProcessTag) -> Iterator[Message]:
        for msg in messages:
            self.messages[tag] += 1
            yield msg

    def _cycles(self, pins: Iterable[Pins], tag: ProcessTag, sink: Callable[[int], None]) -> None:
        """Run DUT cycles, feeding the TDO value sampled before each edge to `sink`."""
        if self._passthrough is not None and self.bridge is not None:
            self._passthrough.tag = tag
            messages = (
                encode_passthrough(tdi=tdi, scan_enable=se, clr=clr) for tdi, se, clr in pins
            )
            self.bridge.run(self._counted(messages, tag), sink=lambda msg: sink(msg.bit(0)))
            return
        sim = self.sim
        for tdi, se, clr in pins:
            sink(sim.tdo)
            sim.tick(sim.frame(tdi=tdi, scan_enable=se, clr=clr, test_mode=1), tag)

    def _transactions(
        self,
        transactions: Iterable[tuple[FsmTransaction, Message]],
        tag: ProcessTag,
        sink: Callable[[str], None],
    ) -> None:
        """Send FSM messages, feeding each response to `sink`.

        Each message's transaction kind is scheduled as the message leaves
        the software side, so the schedule follows delivery order.
        """
        fsm = self._fsm
        assert fsm is not None and self.bridge is not None
        fsm.tag = tag

        def scheduled() -> Iterator[Message]:
            for kind, msg in transactions:
                fsm.expect(kind)
                yield msg

        self.bridge.run(
            self._counted(scheduled(), tag),
            sink=lambda msg: sink(format_response(msg.payload, self.n)),
        )

    def run_reset_toggle(self) -> bool:
        """Clear the chain with CLR and scan it out; every bit must read 0."""
        n = self.n
        if self._fsm is not None:
            responses: list[str] = []
            self._transactions(
                [(_SHIFT_ONLY, encode_fsm(n, 0, clr=1)), (_SHIFT_ONLY, encode_fsm(n, 0))],
                ProcessTag.RESET_SEQ,
                responses.append,
            )
            return responses[-1] == "0" * n

        samples: list[int] = []
        self._cycles([(0, 0, 1), *[(0, 1, 0)] * n], ProcessTag.RESET_SEQ, samples.append)
        return samples[1:] == [0] * n

    def run_scan_enable_toggle(self) -> bool:
        """Shift a single 1 through the chain; TDO must pulse once, after n shifts."""
        n = self.n
        if self._fsm is not None:
            responses: list[str] = []
            self._transactions(
                [(_SHIFT_ONLY, encode_fsm(n, 1)), (_SHIFT_ONLY, encode_fsm(n, 0))],
                ProcessTag.SCAN_ENABLE_SEQ,
                responses.append,
            )
            return responses[-1] == "1" + "0" * (n - 1)

        samples: list[int] = []
        self._cycles([(1, 1, 0), *[(0, 1, 0)] * n], ProcessTag.SCAN_ENABLE_SEQ, samples.append)
        return samples == [0] * n + [1]

    def run_scan_sequence(self, vectors: Iterable[int]) -> tuple[GoldenLog, tuple[str, ...]]:
        """Shift each vector in, capture, and collect the responses.

        Returns the log and the side channel holding the chain contents
        shifted out ahead of the first vector.
        """
        n = self.n
        if self._fsm is not None:
            responses: list[str] = []

            def fsm_messages() -> Iterator[tuple[FsmTransaction, Message]]:
                sent = 0
                for vector in vectors:
                    yield FsmTransaction.SCAN, encode_fsm(n, vector)
                    sent += 1
                    if sent % _PROGRESS_EVERY == 0:
                        _LOGGER.debug("%s: %d vectors sent", self.mode, sent)
                if sent:
                    yield _SHIFT_ONLY, encode_fsm(n, 0)

            self._transactions(fsm_messages(), ProcessTag.SCAN_SEQ, responses.append)
        else:
            collector = _ResponseCollector(n, n + 1)
            seen = 0

            def pins() -> Iterator[Pins]:
                nonlocal seen
                for pin in _vector_pins(vectors, n):
                    yield pin
                    if pin[1] == 0:
                        seen += 1
                        if seen % _PROGRESS_EVERY == 0:
                            _LOGGER.debug("%s: %d vectors shifted", self.mode, seen)
                if seen:
                    yield from [(0, 1, 0)] * n

            self._cycles(pins(), ProcessTag.SCAN_SEQ, collector)
            collector.finish()
            responses = collector.responses

        if not responses:
            return GoldenLog(n=n), ()
        return GoldenLog(n=n, responses=tuple(responses[1:])), (responses[0],)

    def event_counts(self) -> Counter[ProcessTag]:
        """Profiled events per process, as the host sees them.

        Direct mode profiles the whole kernel. Acceleration moves the DUT
        evaluations to the accelerator and adds one event per boundary
        signal crossing. Emulation also moves the clock to the hardware: the
        testbench tags count messages sent and BridgeMessage counts the
        reads and writes.
        """
        kernel = self.sim.state
        if self.bridge is not None:
            bridge = self.bridge.stats()
            counts: Counter[ProcessTag] = Counter(
                {tag: self.messages[tag] for tag in TESTBENCH_TAGS}
            )
            counts[ProcessTag.BRIDGE_MESSAGE] = bridge["hw_reads"] + bridge["hw_writes"]
            return counts
        counts = Counter(kernel.attribution)
        if self.mode is RunMode.ACCELERATION:
            del counts[ProcessTag.DUT]
            counts[ProcessTag.BRIDGE_SIGNAL] = self.signal_transfers()
        return counts

    def signal_transfers(self) -> int:
        """Boundary pins crossing the link, once per cycle in acceleration mode."""
        if self.mode is not RunMode.ACCELERATION:
            return 0
        boundary = self.scan.boundary_inputs + self.scan.boundary_outputs
        return boundary * self.sim.state.cclock_count

    def stats(self, vectors: int, wall_seconds: float) -> RunStats:
        """Counters of the run so far, with the modeled time.

        `events` is the sum of `event_counts`, so the attribution covers it
        exactly.
        """
        counts = self.event_counts()
        hw_reads = hw_writes = 0
        if self.bridge is not None:
            bridge = self.bridge.stats()
            uclocks, cclocks = bridge["uclocks"], bridge["cclocks"]
            hw_reads, hw_writes = bridge["hw_reads"], bridge["hw_writes"]
        else:
            uclocks = cclocks = self.sim.state.cclock_count
        stats = RunStats(
            mode=str(self.mode),
            n=self.n,
            vectors=vectors,
            uclocks=uclocks,
            cclocks=cclocks,
            hw_reads=hw_reads,
            hw_writes=hw_writes,
            signal_transfers=self.signal_transfers(),
            events=sum(counts.values()),
            attribution=attribution_percentages(counts),
            wall_seconds=wall_seconds,
        )
        return with_estimate(stats, self.plan.cost_model)

    def counters(self) -> tuple[int, int]:
        """Cclocks and hardware reads so far."""
        cclocks = self.sim.state.cclock_count
        reads = self.bridge.stats()["hw_reads"] if self.bridge is not None else 0
        return cclocks, reads


def run_plan(
    scan: ScanNetlist,
    plan: TestPlan,
    waveform: WaveformRecorder | None = None,
) -> ScanRunResult:
    """Run both preamble tests and the scan sequence in the plan's mode.

    Raises `VerificationError` if a preamble test fails. A requested golden
    comparison is reported in the result rather than raised.
    """
    started = time.perf_counter()
    vectors = plan_vectors(plan, len(scan.chain))
    run = ScanRun(scan, plan, waveform)
    _LOGGER.debug("Starting %s run on %s, n=%d", run.mode, scan.base.name, run.n)
    try:
        if not run.run_reset_toggle():
            raise VerificationError(f"{run.mode}: chain does not read all zeros after reset")
        if not run.run_scan_enable_toggle():
            raise VerificationError(f"{run.mode}: single 1 did not reach TDO after {run.n} shifts")
        preamble_cclocks, preamble_reads = run.counters()
        _LOGGER.debug("%s: preamble passed in %d cclocks", run.mode, preamble_cclocks)

        log, side_channel = run.run_scan_sequence(vectors)
        cclocks, reads = run.counters()
    finally:
        run.sim.close()

    stats = run.stats(log.count, time.perf_counter() - started)
    comparison = None
    if plan.record_golden is not None:
        write_golden(log, plan.record_golden)
    if plan.compare_golden is not None:
        comparison = compare_golden(read_golden(plan.compare_golden), log)
        if not comparison.equal:
            _LOGGER.warning("%s: golden mismatch, %s", run.mode, comparison.message)
    _LOGGER.info(
        "%s run done: %d vectors, %d cclocks, %d uclocks",
        run.mode,
        log.count,
        stats.cclocks,
        stats.uclocks,
    )
    return ScanRunResult(
        log=log,
        stats=stats,
        preamble_cclocks=preamble_cclocks,
        scan_cclocks=cclocks - preamble_cclocks,
        scan_hw_reads=reads - preamble_reads,
        side_channel=side_channel,
        comparison=comparison,
        event_counts={str(tag): count for tag, count in run.event_counts().items()},
    )
