"""Shared helpers for the test suite: bare circuit construction and
exhaustive placement enumeration for the fault-tolerance window checks."""

from __future__ import annotations

import itertools

from bft import FaultEvent, FaultPath, GadgetCircuit, NoiseParams, PauliFrame
from bft.gadgets import BlockSpec, GadgetKind, Operation, OpKind, Role
from bft.noise import FaultClass, location_variants


def bare_circuit(ops, blocks) -> GadgetCircuit:
    """A raw circuit with no logical measurements (for probability tests)."""
    return GadgetCircuit(GadgetKind.MEAS_ZL, max(b.size for b in blocks),
                         {}, tuple(blocks), tuple(ops), ())


def single_cphase_circuit() -> GadgetCircuit:
    blocks = [BlockSpec("a", 1, Role.IO), BlockSpec("b", 1, Role.IO)]
    ops = [Operation(OpKind.CPHASE, (("a", 0), ("b", 0)), 0)]
    return bare_circuit(ops, blocks)


def single_meas_circuit() -> GadgetCircuit:
    blocks = [BlockSpec("a", 1, Role.INPUT)]
    ops = [Operation(OpKind.MEAS_X, (("a", 0),), 0)]
    return bare_circuit(ops, blocks)


def dephasing_events(c: GadgetCircuit, p: NoiseParams):
    """Every dephasing-class single event (location, FaultEvent) of a circuit,
    including prep flips and measurement flips."""
    out = []
    for loc, op in enumerate(c.ops):
        for _, ev in location_variants(op.kind, p):
            if ev.fault_class is FaultClass.NON_DEPHASING:
                continue
            out.append(FaultEvent(loc, ev.fault_class, ev.pauli))
    return out


def dephasing_paths(c: GadgetCircuit, p: NoiseParams, max_events: int):
    """All fault paths of up to max_events dephasing-class events."""
    events = dephasing_events(c, p)
    yield FaultPath(())
    for k in range(1, max_events + 1):
        for combo in itertools.combinations(events, k):
            if len({e.location for e in combo}) == k:
                yield FaultPath(tuple(combo))


def z_input_frames(c: GadgetCircuit, weights: dict[str, int]):
    """All input-frame assignments with the given Z weight per block."""
    per_block = []
    for name, m in weights.items():
        n = c.block(name).size
        masks = [sum(1 << q for q in combo)
                 for combo in itertools.combinations(range(n), m)]
        per_block.append([(name, mask) for mask in masks])
    for assignment in itertools.product(*per_block):
        yield {name: PauliFrame(name, c.block(name).size, 0, mask)
               for name, mask in assignment}
