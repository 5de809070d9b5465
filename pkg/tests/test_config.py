"""Tests for the voluptuous schemas and parsers in config.py."""

from __future__ import annotations

from pathlib import Path

import pytest
import voluptuous as vol

from scanemu.config import (
    BRIDGE_CONFIG_SCHEMA,
    CLI_CONFIG_SCHEMA,
    CLOCK_PARAMS_SCHEMA,
    load_json,
    parse_chain_order,
    parse_ratio,
    parse_vector_count,
    validate,
)
from scanemu.const import DEFAULT_PROXY_DEPTH, DEFAULT_RESET_CYCLES, DEFAULT_SOFTWARE_INTERVAL
from scanemu.exceptions import ConfigError, StatsSchemaError
from scanemu.types import RunMode, VectorSource


class TestParsers:
    """Test the value parsers used by the schemas."""

    @pytest.mark.parametrize(
        ("value", "expected"),
        [("1/1", (1, 1)), ("1/2", (1, 2)), ("3/4", (3, 4)), ("1", (1, 1)), ((2, 3), (2, 3))],
    )
    def test_ratio(self, value: object, expected: tuple[int, int]) -> None:
        """Ratios are N/D with 1 <= N <= D."""
        assert parse_ratio(value) == expected

    @pytest.mark.parametrize("value", ["2/1", "0/1", "a/b", "3"])
    def test_ratio_invalid(self, value: str) -> None:
        """Ratios above one, zero and garbage are rejected."""
        with pytest.raises(vol.Invalid):
            parse_ratio(value)

    def test_vector_count(self) -> None:
        """'full' means every state; otherwise a non-negative integer."""
        assert parse_vector_count("full") is None
        assert parse_vector_count("FULL") is None
        assert parse_vector_count("12") == 12
        with pytest.raises(vol.Invalid):
            parse_vector_count("-1")
        with pytest.raises(vol.Invalid):
            parse_vector_count("many")

    def test_chain_order(self) -> None:
        """Comma-separated indices."""
        assert parse_chain_order("2,0,1") == (2, 0, 1)
        assert parse_chain_order(None) is None
        with pytest.raises(vol.Invalid):
            parse_chain_order("2;0")


class TestSchemas:
    """Test the schemas and validate."""

    def test_clock_defaults(self) -> None:
        """Missing clock keys take the defaults."""
        assert CLOCK_PARAMS_SCHEMA({}) == {
            "ratio_num": 1,
            "ratio_den": 1,
            "duty_hi": 1,
            "duty_lo": 1,
            "phase": 0,
            "reset_cycles": DEFAULT_RESET_CYCLES,
        }

    def test_bridge_defaults(self) -> None:
        """The bridge schema nests clock parameters."""
        config = BRIDGE_CONFIG_SCHEMA({"clock": {"ratio_den": 2}})
        assert config["clock"]["ratio_den"] == 2
        assert config["software_interval"] == DEFAULT_SOFTWARE_INTERVAL
        assert config["proxy_depth"] == DEFAULT_PROXY_DEPTH

    def test_cli_defaults(self) -> None:
        """Only the netlist is required."""
        config = validate(CLI_CONFIG_SCHEMA, {"netlist": "a.bench"})
        assert config["mode"] is RunMode.DIRECT
        assert config["source"] is VectorSource.COUNTING
        assert config["vectors"] is None
        assert config["clock_ratio"] == (1, 1)
        assert config["software_interval"] == DEFAULT_SOFTWARE_INTERVAL
        assert config["proxy_depth"] == DEFAULT_PROXY_DEPTH

    def test_cli_coercion(self) -> None:
        """Strings from the command line become enums and tuples."""
        config = validate(
            CLI_CONFIG_SCHEMA,
            {
                "netlist": "a.bench",
                "mode": "emul-fsm",
                "vectors": "16",
                "chain_order": "1,0",
                "clock_ratio": "1/3",
            },
        )
        assert config["mode"] is RunMode.EMUL_FSM
        assert config["vectors"] == 16
        assert config["chain_order"] == (1, 0)
        assert config["clock_ratio"] == (1, 3)

    @pytest.mark.parametrize(
        "extra",
        [
            {"source": "explicit"},
            {"vectors_file": "v.txt"},
            {"all_modes": True, "waveform": "w.vcd"},
            {"mode": "turbo"},
            {"software_interval": 0},
        ],
    )
    def test_cli_inconsistent(self, extra: dict[str, object]) -> None:
        """Inconsistent or invalid flags are configuration errors."""
        with pytest.raises(ConfigError, match="invalid configuration"):
            validate(CLI_CONFIG_SCHEMA, {"netlist": "a.bench", **extra})

    def test_validate_error_class(self) -> None:
        """The caller picks the error raised."""
        with pytest.raises(StatsSchemaError, match="invalid stats"):
            validate(vol.Schema({"a": int}), {"a": "x"}, what="stats", error=StatsSchemaError)

    def test_load_json(self, tmp_path: Path) -> None:
        """JSON files are parsed then validated."""
        path = tmp_path / "clock.json"
        path.write_text('{"phase": 2}', encoding="utf-8")
        assert load_json(path, CLOCK_PARAMS_SCHEMA, "clock")["phase"] == 2
        path.write_text('{"phase": "soon"}', encoding="utf-8")
        with pytest.raises(ConfigError, match="clock"):
            load_json(path, CLOCK_PARAMS_SCHEMA, "clock")
