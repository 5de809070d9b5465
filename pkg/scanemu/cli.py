"""Command-line interface: parse, scan-insert, run, report and compare."""

from __future__ import annotations

from collections.abc import Iterator
import contextlib
import logging
from pathlib import Path
from typing import Any

import click

from .bridge import ClockParams
from .config import CLI_CONFIG_SCHEMA, validate
from .const import DOMAIN, ENV_SEED
from .exceptions import ConfigError, NetlistError, ScanEmuError, VerificationError
from .harness import (
    ScanRunResult,
    TestPlan,
    compare_golden,
    read_golden,
    run_plan,
    write_golden,
)
from .metrics import CostModel, load_cost_model, load_stats, render_report, stats_to_json
from .netlist import load_bench, stats
from .runner import cross_compare, run_modes
from .scan import ScanConfig, ScanNetlist, emit_scan_bench, insert_scan
from .simkernel import Engine, WaveformRecorder
from .types import RunMode, VectorSource

_LOGGER = logging.getLogger(__name__)

EXIT_MISMATCH = 1
EXIT_USAGE = 2


def _setup_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger(DOMAIN).setLevel(level)


@contextlib.contextmanager
def _exit_codes() -> Iterator[None]:
    """Map scanemu errors to the stable exit codes."""
    try:
        yield
    except VerificationError as err:
        click.echo(f"error: {err}", err=True)
        raise click.exceptions.Exit(EXIT_MISMATCH) from err
    except OSError as err:
        click.echo(f"error: {err}", err=True)
        raise click.exceptions.Exit(EXIT_MISMATCH) from err
    except ScanEmuError as err:
        _LOGGER.debug("Command failed", exc_info=True)
        click.echo(f"error: {err}", err=True)
        raise click.exceptions.Exit(EXIT_USAGE) from err


def _load_scan(netlist: str, chain_order: tuple[int, ...] | None = None) -> ScanNetlist:
    try:
        base = load_bench(netlist)
    except NetlistError as err:
        raise NetlistError(f"{netlist}: {err}") from err
    return insert_scan(base, ScanConfig(chain_order=chain_order))


def _read_vectors(path: str) -> tuple[int, ...]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    try:
        return tuple(int(line.split("#")[0], 0) for line in lines if line.split("#")[0].strip())
    except ValueError as err:
        raise ConfigError(f"{path}: vectors must be integers, one per line ({err})") from err


def _plan(config: dict[str, Any], mode: RunMode, record: bool = False) -> TestPlan:
    num, den = config["clock_ratio"]
    return TestPlan(
        mode=mode,
        vector_count=config["vectors"],
        vector_source=config["source"],
        vectors=_read_vectors(config["vectors_file"]) if config["vectors_file"] else (),
        seed=config["seed"],
        engine=Engine.CHECKED if config["oracle_check"] else Engine.EVENT,
        software_interval=config["software_interval"],
        proxy_depth=config["proxy_depth"],
        clock=ClockParams(ratio_num=num, ratio_den=den),
        cost_model=load_cost_model(config["cost_model"]) if config["cost_model"] else CostModel(),
        record_golden=Path(config["golden_out"]) if record and config["golden_out"] else None,
        compare_golden=Path(config["compare"]) if config["compare"] else None,
    )


def _summary(result: ScanRunResult) -> str:
    stats_ = result.stats
    return (
        f"{stats_.mode}: vectors={stats_.vectors} cclocks={stats_.cclocks} "
        f"(preamble {result.preamble_cclocks}, scan {result.scan_cclocks}) "
        f"uclocks={stats_.uclocks} hw_reads={stats_.hw_reads} hw_writes={stats_.hw_writes} "
        f"modeled={stats_.estimated_seconds:.6f}s"
    )


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress at DEBUG level.")
def cli(verbose: bool) -> None:
    """Scan-chain verification emulator."""
    _setup_logging(verbose)


@cli.command("parse")
@click.argument("netlist", type=click.Path(dir_okay=False))
def cmd_parse(netlist: str) -> None:
    """Print the census of a .bench netlist."""
    with _exit_codes():
        try:
            parsed = load_bench(netlist)
        except NetlistError as err:
            raise NetlistError(f"{netlist}: {err}") from err
        click.echo(stats(parsed).summary())


@cli.command("scan-insert")
@click.argument("netlist", type=click.Path(dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False), help="Write here instead of stdout.")
@click.option("--chain-order", default=None, help="Comma-separated DFF indices, TDI end first.")
def cmd_scan_insert(netlist: str, output: str | None, chain_order: str | None) -> None:
    """Insert a full scan chain and emit the scanned .bench."""
    with _exit_codes():
        config = validate(CLI_CONFIG_SCHEMA, {"netlist": netlist, "chain_order": chain_order})
        text = emit_scan_bench(_load_scan(netlist, config["chain_order"]))
        if output is None:
            click.echo(text, nl=False)
        else:
            Path(output).write_text(text, encoding="utf-8", newline="\n")
            _LOGGER.info("Wrote scanned netlist to %s", output)


@cli.command("run")
@click.argument("netlist", type=click.Path(dir_okay=False))
@click.option(
    "--mode",
    type=click.Choice([str(m) for m in RunMode]),
    default=str(RunMode.DIRECT),
    show_default=True,
)
@click.option("--all-modes", is_flag=True, help="Run all four modes in parallel and cross-compare.")
@click.option("--vectors", default="full", show_default=True, help="'full' (2^n) or a count.")
@click.option(
    "--source",
    type=click.Choice([str(s) for s in VectorSource]),
    default=str(VectorSource.COUNTING),
    show_default=True,
)
@click.option("--vectors-file", type=click.Path(dir_okay=False), default=None)
@click.option("--seed", type=int, default=0, envvar=ENV_SEED, show_default=True)
@click.option("--golden-out", type=click.Path(dir_okay=False), default=None)
@click.option("--compare", type=click.Path(dir_okay=False), default=None, help="Golden log to match.")
@click.option("--stats-out", type=click.Path(), default=None, help="Stats JSON; a directory with --all-modes.")
@click.option("--cost-model", type=click.Path(dir_okay=False), default=None)
@click.option("--oracle-check", is_flag=True, help="Cross-check every settle against a full sweep.")
@click.option("--waveform", type=click.Path(dir_okay=False), default=None, help="VCD dump path.")
@click.option("--chain-order", default=None)
@click.option("--software-interval", type=int, default=None)
@click.option("--proxy-depth", type=int, default=None, help="Messages the proxy may queue ahead.")
@click.option("--clock-ratio", default="1/1", show_default=True, help="Cclock/uclock ratio N/D.")
def cmd_run(**options: Any) -> None:
    """Run the reset, scan-enable and scan-sequence tests."""
    with _exit_codes():
        options = {k: v for k, v in options.items() if v is not None}
        try:
            config = validate(CLI_CONFIG_SCHEMA, options)
        except ConfigError as err:
            raise click.UsageError(str(err)) from err
        scan = _load_scan(config["netlist"], config["chain_order"])
        if config["all_modes"]:
            _run_all(scan, config)
        else:
            _run_single(scan, config)


def _run_single(scan: ScanNetlist, config: dict[str, Any]) -> None:
    plan = _plan(config, config["mode"], record=True)
    if config["waveform"]:
        with open(config["waveform"], "w", encoding="utf-8") as stream:
            result = run_plan(scan, plan, WaveformRecorder(stream, scan))
    else:
        result = run_plan(scan, plan)
    if config["stats_out"]:
        Path(config["stats_out"]).write_text(stats_to_json(result.stats), encoding="utf-8")
    click.echo(_summary(result))
    if not result.passed:
        assert result.comparison is not None
        raise VerificationError(f"golden mismatch: {result.comparison.message}")


def _run_all(scan: ScanNetlist, config: dict[str, Any]) -> None:
    results = run_modes(scan, [_plan(config, mode) for mode in RunMode])
    stats_dir = Path(config["stats_out"]) if config["stats_out"] else None
    if stats_dir is not None:
        stats_dir.mkdir(parents=True, exist_ok=True)
    for mode, result in results.items():
        click.echo(_summary(result))
        if stats_dir is not None:
            (stats_dir / f"{mode}.json").write_text(stats_to_json(result.stats), encoding="utf-8")
    if config["golden_out"]:
        write_golden(results[RunMode.DIRECT].log, config["golden_out"])

    failures = [
        f"{mode}: {diff.message}" for mode, diff in cross_compare(results).items() if not diff.equal
    ]
    failures.extend(
        f"{mode}: golden mismatch, {result.comparison.message}"
        for mode, result in results.items()
        if result.comparison is not None and not result.comparison.equal
    )
    if failures:
        raise VerificationError("; ".join(failures))
    click.echo(f"all {len(results)} modes produced identical logs")


@cli.command("report")
@click.argument("stats_files", nargs=-1, required=True, type=click.Path(dir_okay=False))
@click.option("--cost-model", type=click.Path(dir_okay=False), default=None)
@click.option("--json-out", type=click.Path(dir_okay=False), default=None)
def cmd_report(stats_files: tuple[str, ...], cost_model: str | None, json_out: str | None) -> None:
    """Render comparison tables from stats JSON files."""
    with _exit_codes():
        runs = [load_stats(path) for path in stats_files]
        model = load_cost_model(cost_model) if cost_model else None
        text, document = render_report(runs, model)
        click.echo(text, nl=False)
        if json_out:
            Path(json_out).write_text(document, encoding="utf-8", newline="\n")


@cli.command("compare")
@click.argument("expected", type=click.Path(dir_okay=False))
@click.argument("actual", type=click.Path(dir_okay=False))
def cmd_compare(expected: str, actual: str) -> None:
    """Compare two SCANLOG files bit for bit."""
    with _exit_codes():
        diff = compare_golden(read_golden(expected), read_golden(actual))
        if not diff.equal:
            raise VerificationError(diff.message)
        click.echo(f"identical ({read_golden(expected).count} responses)")

