"""Deterministic generator of `.bench` circuits with a prescribed census."""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
import random

from .netlist import GateKind, Netlist, parse_bench

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class CircuitProfile:
    """Sizes of a circuit to generate."""

    name: str
    n_inputs: int
    n_outputs: int
    n_dffs: int
    gates_by_kind: dict[GateKind, int] = field(hash=False)

    @property
    def n_gates(self) -> int:
        """Total gate count including inverters."""
        return sum(self.gates_by_kind.values())


# Published census of ISCAS89 s400.
S400_PROFILE = CircuitProfile(
    name="s400_profile",
    n_inputs=3,
    n_outputs=6,
    n_dffs=21,
    gates_by_kind={
        GateKind.NOT: 58,
        GateKind.AND: 11,
        GateKind.NAND: 36,
        GateKind.OR: 25,
        GateKind.NOR: 34,
    },
)


def chain_profile(n_dffs: int) -> CircuitProfile:
    """Small profile with `n_dffs` registers for brute-force checks."""
    return CircuitProfile(
        name=f"chain{n_dffs}",
        n_inputs=2,
        n_outputs=2,
        n_dffs=n_dffs,
        gates_by_kind={
            GateKind.NOT: n_dffs,
            GateKind.NAND: n_dffs + 1,
            GateKind.NOR: n_dffs + 1,
            GateKind.XOR: 1,
        },
    )


def generate_bench(profile: CircuitProfile, seed: int = 0) -> str:
    """Return `.bench` text for a random circuit matching `profile`.

    Gates only read PIs, DFF outputs and earlier gates, so the result is
    acyclic. DFF inputs are the last gates generated.
    """
    if profile.n_gates < max(profile.n_dffs, profile.n_outputs, 1):
        raise ValueError("profile needs at least one gate per DFF and output")

    rng = random.Random(seed)
    kinds = [kind for kind, count in profile.gates_by_kind.items() for _ in range(count)]
    rng.shuffle(kinds)

    inputs = [f"I{i}" for i in range(profile.n_inputs)]
    states = [f"S{i}" for i in range(profile.n_dffs)]
    sources = inputs + states
    gate_lines: list[str] = []
    gate_nets: list[str] = []

    for index, kind in enumerate(kinds):
        out = f"G{index}"
        arity = 1 if kind in (GateKind.NOT, GateKind.BUF) else rng.choice((2, 2, 3))
        # Favor recent nets so the logic gets some depth.
        pool = sources + gate_nets[-8:] * 2
        args = rng.sample(pool, k=min(arity, len(set(pool))))
        while len(set(args)) < len(args):
            args = rng.sample(pool, k=len(args))
        gate_lines.append(f"{out} = {kind.value}({', '.join(args)})")
        gate_nets.append(out)

    d_nets = gate_nets[-profile.n_dffs :]
    rng.shuffle(d_nets)
    outputs = rng.sample(gate_nets, k=profile.n_outputs)

    lines = [f"# {profile.name}", f"# seed {seed}", ""]
    lines.extend(f"INPUT({net})" for net in inputs)
    lines.append("")
    lines.extend(f"OUTPUT({net})" for net in outputs)
    lines.append("")
    lines.extend(f"{q} = DFF({d})" for q, d in zip(states, d_nets, strict=True))
    lines.append("")
    lines.extend(gate_lines)
    return "\n".join(lines) + "\n"


def generate_netlist(profile: CircuitProfile, seed: int = 0) -> Netlist:
    """Generate and parse a circuit matching `profile`."""
    netlist = parse_bench(generate_bench(profile, seed), name=profile.name)
    _LOGGER.debug("Generated %s with seed %d", profile.name, seed)
    return netlist
