"""Run several test plans on one design concurrently."""

from __future__ import annotations

import asyncio
from collections.abc import Sequence
import logging

import async_timeout

from .const import DEFAULT_RUN_TIMEOUT_S, MAX_PARALLEL_RUNS
from .exceptions import ConfigError, RunTimeoutError
from .harness import GoldenDiff, ScanRunResult, TestPlan, compare_golden, run_plan
from .scan import ScanNetlist
from .types import RunMode

_LOGGER = logging.getLogger(__name__)


async def _run_one(
    scan: ScanNetlist, plan: TestPlan, semaphore: asyncio.Semaphore
) -> ScanRunResult:
    _LOGGER.debug("%s: waiting for a run slot", plan.mode)
    async with semaphore:
        _LOGGER.debug("%s: acquired a run slot", plan.mode)
        return await asyncio.to_thread(run_plan, scan, plan)


async def async_run_modes(
    scan: ScanNetlist,
    plans: Sequence[TestPlan],
    timeout: float = DEFAULT_RUN_TIMEOUT_S,
    max_parallel: int = MAX_PARALLEL_RUNS,
) -> dict[RunMode, ScanRunResult]:
    """Run `plans` in worker threads, at most `max_parallel` at a time.

    Each run owns its kernel state, so results match sequential runs. On
    timeout the waiting stops; threads already running finish in the
    background.
    """
    modes = [RunMode(plan.mode) for plan in plans]
    if len(set(modes)) != len(modes):
        raise ConfigError(f"each mode may appear once, got {[str(m) for m in modes]}")

    # Fill the shared netlist caches before threads read them.
    _ = scan.base.schedule, scan.base.fanout

    semaphore = asyncio.Semaphore(max_parallel)
    try:
        async with async_timeout.timeout(timeout):
            results = await asyncio.gather(*(_run_one(scan, plan, semaphore) for plan in plans))
    except TimeoutError as exc:
        _LOGGER.warning("Runs of %s did not finish within %.0f s", scan.base.name, timeout)
        raise RunTimeoutError(f"runs did not finish within {timeout:.0f} s") from exc
    return dict(zip(modes, results, strict=True))


def run_modes(
    scan: ScanNetlist,
    plans: Sequence[TestPlan],
    timeout: float = DEFAULT_RUN_TIMEOUT_S,
    max_parallel: int = MAX_PARALLEL_RUNS,
) -> dict[RunMode, ScanRunResult]:
    """Blocking wrapper around `async_run_modes`."""
    return asyncio.run(async_run_modes(scan, plans, timeout, max_parallel))


def cross_compare(results: dict[RunMode, ScanRunResult]) -> dict[RunMode, GoldenDiff]:
    """Compare every log against the first run's log."""
    if not results:
        return {}
    reference_mode, reference = next(iter(results.items()))
    diffs = {}
    for mode, result in results.items():
        if mode is reference_mode:
            continue
        diffs[mode] = compare_golden(reference.log, result.log)
        if not diffs[mode].equal:
            _LOGGER.warning("%s differs from %s: %s", mode, reference_mode, diffs[mode].message)
    return diffs
