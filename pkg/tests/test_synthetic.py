"""Tests for the synthetic circuit generator."""

from __future__ import annotations

import pytest

from scanemu.netlist import GateKind, stats
from scanemu.synthetic import (
    S400_PROFILE,
    CircuitProfile,
    chain_profile,
    generate_bench,
    generate_netlist,
)


class TestGenerateNetlist:
    """Test generate_bench and generate_netlist."""

    def test_s400_profile_census(self) -> None:
        """The generated stand-in matches the published s400 census."""
        census = stats(generate_netlist(S400_PROFILE))

        assert (census.n_inputs, census.n_outputs, census.n_dffs) == (3, 6, 21)
        assert {k: v for k, v in census.n_gates_by_kind.items() if v} == {
            GateKind.NOT: 58,
            GateKind.AND: 11,
            GateKind.NAND: 36,
            GateKind.OR: 25,
            GateKind.NOR: 34,
        }

    def test_same_seed_same_text(self) -> None:
        """Generation is a pure function of profile and seed."""
        assert generate_bench(S400_PROFILE, seed=3) == generate_bench(S400_PROFILE, seed=3)
        assert generate_bench(S400_PROFILE, seed=3) != generate_bench(S400_PROFILE, seed=4)

    @pytest.mark.parametrize("n", [1, 4, 8])
    def test_chain_profile_registers(self, n: int) -> None:
        """chain_profile(n) yields n flip-flops."""
        assert len(generate_netlist(chain_profile(n)).dffs) == n

    def test_too_few_gates(self) -> None:
        """Every DFF needs a gate to drive it."""
        profile = CircuitProfile("tiny", 1, 1, 3, {GateKind.NOT: 1})
        with pytest.raises(ValueError, match="at least one gate"):
            generate_bench(profile)
