"""Complexity formulas, profiler attribution, cost model and report rendering."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import asdict, dataclass, field, replace
import json
import logging
from pathlib import Path
from typing import Any

from .config import COST_MODEL_SCHEMA, STATS_SCHEMA, load_json, validate
from .const import (
    DEFAULT_SYSTEM_FREQUENCY_HZ,
    DEFAULT_T_EVENT,
    DEFAULT_T_MSG,
    DEFAULT_T_SIGNAL,
    DEFAULT_T_UCLOCK,
    MAX_CHAIN_LENGTH,
    PUBLISHED_CCLOCKS,
    PUBLISHED_DUT_FREQUENCY_HZ,
    PUBLISHED_DUT_PERCENT,
    PUBLISHED_PROFILE_PERCENT,
    PUBLISHED_READS,
    PUBLISHED_SECONDS,
    PUBLISHED_TB_PERCENT,
    SIMULATION_CLOCK_HZ,
    WORKLOAD_FRACTIONS,
)
from .exceptions import StatsSchemaError
from .types import TESTBENCH_TAGS, ProcessTag, RunMode

_LOGGER = logging.getLogger(__name__)

_MODE_ORDER = {mode.value: index for index, mode in enumerate(RunMode)}


def scan_complexity(n: int) -> int:
    """Clock cycles of a full scan of an n-bit chain: 2^n (n+1) + n."""
    if not 1 <= n <= MAX_CHAIN_LENGTH:
        raise ValueError(f"chain length must be in 1..{MAX_CHAIN_LENGTH}, got {n}")
    return (1 << n) * (n + 1) + n


def workload_split(total_cycles: int, tb_fraction: float) -> int:
    """Cycles left in the testbench when `tb_fraction` of the work stays there."""
    if not 0 <= tb_fraction <= 1:
        raise ValueError(f"testbench fraction must be in [0, 1], got {tb_fraction}")
    return round(total_cycles * tb_fraction)


def amdahl_acceleration_estimate(tb_fraction: float) -> float:
    """Speedup bound when everything but the testbench is accelerated."""
    if not 0 < tb_fraction <= 1:
        raise ValueError(f"testbench fraction must be in (0, 1], got {tb_fraction}")
    return 1 / tb_fraction


def percent_decrease(old: float, new: float) -> float:
    """Relative decrease from `old` to `new`, in percent."""
    return (old - new) / old * 100


def percent_increase(old: float, new: float) -> float:
    """Relative increase from `old` to `new`, in percent."""
    return (new - old) / old * 100


def speedup(baseline_seconds: float, seconds: float) -> float:
    """How many times faster `seconds` is than `baseline_seconds`."""
    return baseline_seconds / seconds if seconds else float("inf")


def attribution_percentages(counts: Mapping[ProcessTag, int]) -> dict[str, float]:
    """Per-process share of all events, in percent, for tags that did any work."""
    total = sum(counts.values())
    if not total:
        return {}
    return {str(tag): count / total * 100 for tag, count in counts.items() if count}


@dataclass(frozen=True)
class CostModel:
    """Seconds per unit of counted work; turns counters into modeled time."""

    t_event: float = DEFAULT_T_EVENT
    t_signal: float = DEFAULT_T_SIGNAL
    t_msg: float = DEFAULT_T_MSG
    t_uclock: float = DEFAULT_T_UCLOCK

    def __post_init__(self) -> None:
        """Reject negative coefficients."""
        validate(COST_MODEL_SCHEMA, asdict(self), what="cost model")

    def scaled(self, factor: float) -> CostModel:
        """Every coefficient multiplied by `factor`."""
        return CostModel(*(value * factor for value in asdict(self).values()))


def load_cost_model(path: str | Path) -> CostModel:
    """Read a cost model from JSON; missing coefficients take the defaults."""
    return CostModel(**load_json(path, COST_MODEL_SCHEMA, "cost model"))


@dataclass(frozen=True)
class RunStats:
    """Counters of one run, serialized under exactly these field names."""

    mode: str
    n: int
    vectors: int
    uclocks: int = 0
    cclocks: int = 0
    hw_reads: int = 0
    hw_writes: int = 0
    signal_transfers: int = 0
    events: int = 0
    attribution: dict[str, float] = field(default_factory=dict, hash=False)
    wall_seconds: float = 0.0
    estimated_seconds: float = 0.0

    @property
    def testbench_percent(self) -> float:
        """Share of events spent in the testbench processes."""
        return sum(self.attribution.get(str(tag), 0.0) for tag in TESTBENCH_TAGS)


def estimate_time(stats: RunStats, model: CostModel) -> float:
    """Modeled seconds for `stats` under `model`.

    Bridge signal and message events are charged at `t_signal` and `t_msg`;
    `t_event` covers the remaining host events.
    """
    bridge_events = stats.signal_transfers + stats.hw_reads + stats.hw_writes
    return (
        max(stats.events - bridge_events, 0) * model.t_event
        + stats.signal_transfers * model.t_signal
        + (stats.hw_reads + stats.hw_writes) * model.t_msg
        + stats.uclocks * model.t_uclock
    )


def with_estimate(stats: RunStats, model: CostModel) -> RunStats:
    """Copy of `stats` with `estimated_seconds` filled in."""
    return replace(stats, estimated_seconds=estimate_time(stats, model))


def effective_dut_frequency(system_freq: float, stats: RunStats) -> float:
    """DUT clock rate seen through the bridge: system_freq * cclocks / uclocks."""
    if stats.uclocks <= 0:
        raise ValueError("effective DUT frequency needs at least one uclock")
    return system_freq * stats.cclocks / stats.uclocks


def stats_to_dict(stats: RunStats) -> dict[str, Any]:
    """Plain mapping in schema field order."""
    return asdict(stats)


def stats_to_json(stats: RunStats) -> str:
    """Serialize with sorted keys so equal stats give equal bytes."""
    return json.dumps(stats_to_dict(stats), indent=2, sort_keys=True) + "\n"


def stats_from_dict(data: Any) -> RunStats:
    """Validate a mapping against the stats schema."""
    return RunStats(**validate(STATS_SCHEMA, data, what="stats", error=StatsSchemaError))


def stats_from_json(text: str) -> RunStats:
    """Parse and validate a stats document."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise StatsSchemaError(f"stats are not valid JSON ({err})") from err
    return stats_from_dict(data)


def load_stats(path: str | Path) -> RunStats:
    """Read one stats file."""
    return RunStats(**load_json(path, STATS_SCHEMA, "stats", error=StatsSchemaError))


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


def _table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> list[str]:
    """Fixed-width table, first column left-aligned, the rest right-aligned."""
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row, strict=True)]

    def line(cells: Sequence[str]) -> str:
        first, *rest = cells
        parts = [first.ljust(widths[0])]
        parts.extend(cell.rjust(w) for cell, w in zip(rest, widths[1:], strict=True))
        return "  ".join(parts).rstrip()

    return [line(headers), "  ".join("-" * w for w in widths), *(line(r) for r in rows)]


def _published(value: object) -> str:
    return "-" if value is None else str(value)


def _sorted_runs(runs: Sequence[RunStats]) -> list[RunStats]:
    return sorted(runs, key=lambda s: (_MODE_ORDER.get(s.mode, len(_MODE_ORDER)), s.vectors))


def _summary_section(runs: list[RunStats]) -> tuple[list[str], dict[str, Any]]:
    direct = next((s for s in runs if s.mode == RunMode.DIRECT), None)
    baseline = direct or max(runs, key=lambda s: s.estimated_seconds)
    rows = []
    speedups: dict[str, float | None] = {}
    for stats in runs:
        factor = speedup(baseline.estimated_seconds, stats.estimated_seconds)
        speedups[stats.mode] = factor if stats.estimated_seconds else None
        rows.append(
            [
                stats.mode,
                str(stats.vectors),
                str(stats.cclocks),
                str(stats.uclocks),
                str(stats.hw_reads),
                str(stats.hw_writes),
                str(stats.signal_transfers),
                str(stats.events),
                f"{stats.estimated_seconds:.6f}",
                f"{factor:.2f}x" if stats.estimated_seconds else "-",
                _published(PUBLISHED_SECONDS.get(stats.mode)),
            ]
        )
    lines = [
        f"Run summary (modeled seconds, baseline {baseline.mode})",
        *_table(
            [
                "mode",
                "vectors",
                "cclocks",
                "uclocks",
                "hw_reads",
                "hw_writes",
                "signals",
                "events",
                "modeled_s",
                "speedup",
                "published_s",
            ],
            rows,
        ),
    ]
    return lines, {"baseline": baseline.mode, "speedup": speedups}


def _attribution_section(runs: list[RunStats]) -> tuple[list[str], dict[str, Any]]:
    tags = [str(tag) for tag in ProcessTag]
    rows = [
        [stats.mode, *(f"{stats.attribution.get(tag, 0.0):.2f}" for tag in tags)]
        for stats in runs
    ]
    rows.append(
        ["published", *(_published(PUBLISHED_PROFILE_PERCENT.get(tag)) for tag in tags)]
    )
    lines = ["Profiler attribution, percent of events", *_table(["mode", *tags], rows)]
    data: dict[str, Any] = {}
    direct = next((s for s in runs if s.mode == RunMode.DIRECT), None)
    if direct is not None and direct.testbench_percent > 0:
        tb_percent = direct.testbench_percent
        estimate = amdahl_acceleration_estimate(tb_percent / 100)
        lines.append(
            f"testbench {tb_percent:.2f}% / DUT {100 - tb_percent:.2f}% -> "
            f"acceleration estimate {estimate:.2f}x "
            f"(published: {PUBLISHED_TB_PERCENT}% / {PUBLISHED_DUT_PERCENT}% -> "
            f"{amdahl_acceleration_estimate(PUBLISHED_TB_PERCENT / 100):.2f}x)"
        )
        data = {"testbench_percent": tb_percent, "acceleration_estimate": estimate}
    return lines, data


def _emulation_section(
    runs: list[RunStats], system_freq: float
) -> tuple[list[str], dict[str, Any]]:
    passthrough = next((s for s in runs if s.mode == RunMode.EMUL_PASS), None)
    fsm = next((s for s in runs if s.mode == RunMode.EMUL_FSM), None)
    if passthrough is None or fsm is None or not passthrough.uclocks or not fsm.uclocks:
        return [], {}
    pass_freq = effective_dut_frequency(system_freq, passthrough)
    fsm_freq = effective_dut_frequency(system_freq, fsm)
    data = {
        "read_difference": passthrough.hw_reads - fsm.hw_reads,
        "read_percent_decrease": percent_decrease(passthrough.hw_reads, fsm.hw_reads),
        "dut_frequency_hz": {passthrough.mode: pass_freq, fsm.mode: fsm_freq},
        "frequency_percent_increase": percent_increase(pass_freq, fsm_freq),
    }
    ref_pass = PUBLISHED_READS[RunMode.EMUL_PASS]
    ref_fsm = PUBLISHED_READS[RunMode.EMUL_FSM]
    rows = [
        [
            "model",
            str(passthrough.hw_reads),
            str(fsm.hw_reads),
            str(data["read_difference"]),
            f"{data['read_percent_decrease']:.2f}",
            f"{pass_freq / 1e3:.2f}",
            f"{fsm_freq / 1e3:.2f}",
            f"{data['frequency_percent_increase']:.2f}",
        ],
        [
            "published",
            str(ref_pass),
            str(ref_fsm),
            str(ref_pass - ref_fsm),
            f"{percent_decrease(ref_pass, ref_fsm):.2f}",
            f"{PUBLISHED_DUT_FREQUENCY_HZ[RunMode.EMUL_PASS] / 1e3:.2f}",
            f"{PUBLISHED_DUT_FREQUENCY_HZ[RunMode.EMUL_FSM] / 1e3:.2f}",
            f"{percent_increase(PUBLISHED_DUT_FREQUENCY_HZ[RunMode.EMUL_PASS], PUBLISHED_DUT_FREQUENCY_HZ[RunMode.EMUL_FSM]):.2f}",
        ],
    ]
    lines = [
        f"Emulation comparison at {system_freq / 1e6:.2f} MHz system clock",
        *_table(
            [
                "source",
                "pass_reads",
                "fsm_reads",
                "difference",
                "decrease_%",
                "pass_khz",
                "fsm_khz",
                "increase_%",
            ],
            rows,
        ),
    ]
    return lines, data


def _formula_in_range(n: int) -> bool:
    return 1 <= n <= MAX_CHAIN_LENGTH


def _workload_section(n: int) -> tuple[list[str], dict[str, Any]]:
    if not _formula_in_range(n):
        return [f"Clock workload for n={n}: outside the formula range 1..{MAX_CHAIN_LENGTH}"], {}
    total = scan_complexity(n)
    split = {f"{fraction:.1f}": workload_split(total, fraction) for fraction in WORKLOAD_FRACTIONS}
    rows = [[fraction, str(cycles), str(total - cycles)] for fraction, cycles in split.items()]
    lines = [
        f"Clock workload for n={n}: 2^n(n+1)+n = {total}",
        *_table(["tb_fraction", "tb_cycles", "dut_cycles"], rows),
    ]
    return lines, {"scan_complexity": total, "workload_split": split}


def _cclock_section(runs: list[RunStats], n: int) -> tuple[list[str], dict[str, Any]]:
    formula = scan_complexity(n) if _formula_in_range(n) else "n/a"
    rows = [
        [stats.mode, str(stats.cclocks), _published(PUBLISHED_CCLOCKS.get(stats.mode))] for stats in runs
    ]
    lines = [
        f"Controlled clocks, preamble included; full-scan formula {formula}",
        *_table(["mode", "cclocks", "published"], rows),
    ]
    return lines, {stats.mode: stats.cclocks for stats in runs}


def render_report(
    runs: Sequence[RunStats],
    model: CostModel | None = None,
    system_freq: float = DEFAULT_SYSTEM_FREQUENCY_HZ,
) -> tuple[str, str]:
    """Render the comparison tables and their JSON form.

    With a cost model the estimates are recomputed from it, otherwise the
    estimates stored in the stats are used. Output is byte-identical for
    identical inputs. Published s400 figures sit beside the model's own for context only.
    """
    if not runs:
        raise StatsSchemaError("report needs at least one stats file")
    chain_lengths = sorted({s.n for s in runs})
    if len(chain_lengths) > 1:
        raise StatsSchemaError(f"stats mix chain lengths {chain_lengths}; report one design at a time")
    n = chain_lengths[0]
    ordered = _sorted_runs([with_estimate(s, model) if model else s for s in runs])

    sections = [
        _summary_section(ordered),
        _attribution_section(ordered),
        _emulation_section(ordered, system_freq),
        _workload_section(n),
        _cclock_section(ordered, n),
    ]
    keys = ["summary", "attribution", "emulation", "workload", "cclocks"]
    text_parts = [
        f"scanemu report: n={n}, {len(ordered)} run(s), times are modeled, "
        f"simulation clock label {SIMULATION_CLOCK_HZ / 1e6:.0f} MHz"
    ]
    text_parts.extend("\n".join(lines) for lines, _ in sections if lines)
    document = {
        "n": n,
        "runs": [stats_to_dict(s) for s in ordered],
        **{key: data for key, (_, data) in zip(keys, sections, strict=True)},
    }
    return "\n\n".join(text_parts) + "\n", json.dumps(document, indent=2, sort_keys=True) + "\n"
