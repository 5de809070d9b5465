"""Validation schemas for bridge, cost-model, stats and command-line settings."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

import voluptuous as vol

from .const import (
    DEFAULT_FIFO_HIGH_WATER,
    DEFAULT_PROXY_DEPTH,
    DEFAULT_RESET_CYCLES,
    DEFAULT_SOFTWARE_INTERVAL,
    DEFAULT_SYSTEM_FREQUENCY_HZ,
    DEFAULT_T_EVENT,
    DEFAULT_T_MSG,
    DEFAULT_T_SIGNAL,
    DEFAULT_T_UCLOCK,
)
from .exceptions import ConfigError, ScanEmuError
from .types import RunMode, VectorSource

_LOGGER = logging.getLogger(__name__)

_POSITIVE_INT = vol.All(int, vol.Range(min=1))
_COUNT = vol.All(int, vol.Range(min=0))
_SECONDS = vol.All(vol.Coerce(float), vol.Range(min=0))


def parse_ratio(value: Any) -> tuple[int, int]:
    """Parse a clock ratio such as ``"1/2"`` into (numerator, denominator)."""
    if isinstance(value, (tuple, list)) and len(value) == 2:
        num, den = value
    else:
        num_text, sep, den_text = str(value).partition("/")
        try:
            num, den = int(num_text), int(den_text) if sep else 1
        except ValueError as err:
            raise vol.Invalid(f"clock ratio {value!r} is not of the form N/D") from err
    if not 1 <= num <= den:
        raise vol.Invalid(f"clock ratio {num}/{den} must satisfy 1 <= N <= D")
    return num, den


def _ratio_at_most_one(params: dict[str, Any]) -> dict[str, Any]:
    parse_ratio((params["ratio_num"], params["ratio_den"]))
    return params


def parse_vector_count(value: Any) -> int | None:
    """``full`` means every chain state (None); otherwise a count >= 0."""
    if value is None or str(value).lower() == "full":
        return None
    try:
        count = int(value)
    except (TypeError, ValueError) as err:
        raise vol.Invalid(f"vector count {value!r} is neither 'full' nor an integer") from err
    if count < 0:
        raise vol.Invalid("vector count must be >= 0")
    return count


def parse_chain_order(value: Any) -> tuple[int, ...] | None:
    """Comma-separated DFF indices, e.g. ``"2,0,1"``."""
    if value is None or value == "":
        return None
    try:
        return tuple(int(part) for part in str(value).split(","))
    except ValueError as err:
        raise vol.Invalid(f"chain order {value!r} is not a comma-separated index list") from err


CLOCK_PARAMS_SCHEMA = vol.All(
    vol.Schema(
        {
            vol.Optional("ratio_num", default=1): _POSITIVE_INT,
            vol.Optional("ratio_den", default=1): _POSITIVE_INT,
            vol.Optional("duty_hi", default=1): _POSITIVE_INT,
            vol.Optional("duty_lo", default=1): _POSITIVE_INT,
            vol.Optional("phase", default=0): _COUNT,
            vol.Optional("reset_cycles", default=DEFAULT_RESET_CYCLES): _COUNT,
        }
    ),
    _ratio_at_most_one,
)

BRIDGE_CONFIG_SCHEMA = vol.Schema(
    {
        vol.Optional("clock", default={}): CLOCK_PARAMS_SCHEMA,
        vol.Optional("software_interval", default=DEFAULT_SOFTWARE_INTERVAL): _POSITIVE_INT,
        vol.Optional("fifo_high_water", default=DEFAULT_FIFO_HIGH_WATER): _POSITIVE_INT,
        vol.Optional("proxy_depth", default=DEFAULT_PROXY_DEPTH): _POSITIVE_INT,
        vol.Optional("system_frequency_hz", default=DEFAULT_SYSTEM_FREQUENCY_HZ): vol.All(
            vol.Coerce(float), vol.Range(min=0, min_included=False)
        ),
    }
)

COST_MODEL_SCHEMA = vol.Schema(
    {
        vol.Optional("t_event", default=DEFAULT_T_EVENT): _SECONDS,
        vol.Optional("t_signal", default=DEFAULT_T_SIGNAL): _SECONDS,
        vol.Optional("t_msg", default=DEFAULT_T_MSG): _SECONDS,
        vol.Optional("t_uclock", default=DEFAULT_T_UCLOCK): _SECONDS,
    }
)

STATS_SCHEMA = vol.Schema(
    {
        vol.Required("mode"): vol.In([mode.value for mode in RunMode]),
        vol.Required("n"): _POSITIVE_INT,
        vol.Required("vectors"): _COUNT,
        vol.Required("uclocks"): _COUNT,
        vol.Required("cclocks"): _COUNT,
        vol.Required("hw_reads"): _COUNT,
        vol.Required("hw_writes"): _COUNT,
        vol.Required("signal_transfers"): _COUNT,
        vol.Required("events"): _COUNT,
        vol.Required("attribution"): {str: vol.All(vol.Coerce(float), vol.Range(min=0))},
        vol.Required("wall_seconds"): _SECONDS,
        vol.Required("estimated_seconds"): _SECONDS,
    }
)


def _consistent_flags(config: dict[str, Any]) -> dict[str, Any]:
    if config["source"] == VectorSource.EXPLICIT and config["vectors_file"] is None:
        raise vol.Invalid("--source explicit requires --vectors-file")
    if config["vectors_file"] is not None and config["source"] != VectorSource.EXPLICIT:
        raise vol.Invalid("--vectors-file is only used with --source explicit")
    if config["all_modes"] and config["waveform"] is not None:
        raise vol.Invalid("--waveform dumps a single run; drop --all-modes")
    return config


CLI_CONFIG_SCHEMA = vol.All(
    vol.Schema(
        {
            vol.Required("netlist"): str,
            vol.Optional("mode", default=RunMode.DIRECT): vol.Coerce(RunMode),
            vol.Optional("all_modes", default=False): bool,
            vol.Optional("vectors", default=None): parse_vector_count,
            vol.Optional("source", default=VectorSource.COUNTING): vol.Coerce(VectorSource),
            vol.Optional("vectors_file", default=None): vol.Maybe(str),
            vol.Optional("seed", default=0): int,
            vol.Optional("golden_out", default=None): vol.Maybe(str),
            vol.Optional("compare", default=None): vol.Maybe(str),
            vol.Optional("stats_out", default=None): vol.Maybe(str),
            vol.Optional("cost_model", default=None): vol.Maybe(str),
            vol.Optional("oracle_check", default=False): bool,
            vol.Optional("waveform", default=None): vol.Maybe(str),
            vol.Optional("chain_order", default=None): parse_chain_order,
            vol.Optional("software_interval", default=DEFAULT_SOFTWARE_INTERVAL): _POSITIVE_INT,
            vol.Optional("proxy_depth", default=DEFAULT_PROXY_DEPTH): _POSITIVE_INT,
            vol.Optional("clock_ratio", default="1/1"): parse_ratio,
        }
    ),
    _consistent_flags,
)


def validate(
    schema: vol.Schema | vol.All,
    data: Any,
    what: str = "configuration",
    error: type[ScanEmuError] = ConfigError,
) -> Any:
    """Run `schema` on `data`, turning `vol.Invalid` into a scanemu error."""
    try:
        return schema(data)
    except vol.Invalid as err:
        raise error(f"invalid {what}: {err}") from err


def load_json(
    path: str | Path,
    schema: vol.Schema | vol.All,
    what: str,
    error: type[ScanEmuError] = ConfigError,
) -> Any:
    """Read a JSON document and validate it."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise error(f"{path}: not valid JSON ({err})") from err
    _LOGGER.debug("Loaded %s from %s", what, path)
    return validate(schema, data, what=f"{what} in {path}", error=error)
