"""Time-stepped circuits for the repetition-code gadgets.

Every gadget is assembled from the three fundamental operations (|+>
preparation, CPHASE, X-basis measurement).  Repeated logical measurements are
staggered so that, with the repetition counts equal to the block length, data
qubits are never idle between consecutive gates and the output blocks finish
one step before the input blocks begin: qubit j's interactions lag qubit 0's
by j steps, and each repetition stream starts one step after the previous one.

Idle (storage) steps that appear for other repetition counts are reported in
the schedule statistics but carry no fault locations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class OpKind(Enum):
    PREP_PLUS = "PrepPlus"
    CPHASE = "Cphase"
    MEAS_X = "MeasX"


class Role(Enum):
    INPUT = "input"
    OUTPUT = "output"
    IO = "io"          # nondestructively measured data block
    ANCILLA = "ancilla"


class GadgetKind(Enum):
    MEAS_ZL = "meas_zl"
    ERROR_CORRECT = "ec"
    CNOT = "cnot"
    BELL_PREP = "bell_prep"
    BELL_MEAS = "bell_meas"


@dataclass(frozen=True)
class Operation:
    """One fundamental operation; operands are (block_id, qubit) addresses."""

    kind: OpKind
    operands: tuple[tuple[str, int], ...]
    timestep: int

    def __post_init__(self) -> None:
        want = 2 if self.kind is OpKind.CPHASE else 1
        if len(self.operands) != want:
            raise ValueError(f"{self.kind.value} takes {want} operand(s)")
        if self.kind is OpKind.CPHASE and self.operands[0] == self.operands[1]:
            raise ValueError("Cphase operands must be distinct")
        if self.timestep < 0:
            raise ValueError("timestep must be non-negative")


@dataclass(frozen=True)
class BlockSpec:
    name: str
    size: int
    role: Role


@dataclass(frozen=True)
class LogicalMeasurement:
    """A decoded measurement: per group, the majority over its constituent
    single-qubit measurements; groups combine by XOR (used by the Bell
    measurement network, where two block majorities give one outcome).

    ``constituent_groups`` holds indices into the circuit's MeasX ops in
    schedule order.  ``exposure_coeff`` is the per-constituent count of fault
    locations that can flip one constituent; the bounds module uses the same
    coefficients.
    """

    label: str
    constituent_groups: tuple[tuple[int, ...], ...]
    exposure_coeff: int
    postselect: bool = False

    @property
    def arity(self) -> int:
        return len(self.constituent_groups[0])

    def __post_init__(self) -> None:
        for g in self.constituent_groups:
            if len(g) % 2 == 0 or len(g) < 1:
                raise ValueError("vote arity must be odd and positive")


@dataclass(frozen=True)
class ScheduleStats:
    cphase_count: int
    prep_count: int
    meas_count: int
    idle_data_steps: int
    depth: int
    output_ready_step: int
    input_first_step: int


@dataclass(frozen=True)
class GadgetCircuit:
    kind: GadgetKind
    n: int
    params: dict = field(compare=False)
    blocks: tuple[BlockSpec, ...] = ()
    ops: tuple[Operation, ...] = ()
    logical_measurements: tuple[LogicalMeasurement, ...] = ()

    def block(self, name: str) -> BlockSpec:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    def blocks_with_role(self, *roles: Role) -> tuple[BlockSpec, ...]:
        return tuple(b for b in self.blocks if b.role in roles)

    @property
    def input_blocks(self) -> tuple[BlockSpec, ...]:
        return self.blocks_with_role(Role.INPUT, Role.IO)

    @property
    def output_blocks(self) -> tuple[BlockSpec, ...]:
        return self.blocks_with_role(Role.OUTPUT, Role.IO)

    @property
    def meas_ops(self) -> tuple[int, ...]:
        """Indices of MeasX ops, in schedule order."""
        return tuple(i for i, op in enumerate(self.ops) if op.kind is OpKind.MEAS_X)

    def to_text(self) -> str:
        """One operation per line: ``<timestep> <kind> <block.qubit> [...]``."""
        lines = []
        for op in self.ops:
            addr = " ".join(f"{b}.{q}" for b, q in op.operands)
            lines.append(f"{op.timestep} {op.kind.value} {addr}")
        return "\n".join(lines) + "\n"


def _require_odd(**kwargs: int) -> None:
    for name, value in kwargs.items():
        if not isinstance(value, int) or value < 1 or value % 2 == 0:
            raise ValueError(f"{name} must be a positive odd integer, got {value!r}")


def _finish(kind, n, params, blocks, ops, lms) -> GadgetCircuit:
    # canonical schedule order fixes the fault-location indexing
    ops = tuple(sorted(ops, key=lambda o: (o.timestep, o.operands)))
    c = GadgetCircuit(kind, n, params, tuple(blocks), ops, tuple(lms))
    validate_circuit(c)
    return c


def validate_circuit(c: GadgetCircuit) -> None:
    """Well-formedness audit; raises ValueError on any violation."""
    sizes = {b.name: b.size for b in c.blocks}
    busy: dict[int, set] = {}
    history: dict[tuple[str, int], list[Operation]] = {}
    for op in c.ops:
        slot = busy.setdefault(op.timestep, set())
        for addr in op.operands:
            name, q = addr
            if name not in sizes or not 0 <= q < sizes[name]:
                raise ValueError(f"operand {addr} outside declared blocks")
            if addr in slot:
                raise ValueError(f"qubit {addr} double-booked at step {op.timestep}")
            slot.add(addr)
            history.setdefault(addr, []).append(op)
    for b in c.blocks:
        for q in range(b.size):
            ops_q = history.get((b.name, q), [])
            kinds = [o.kind for o in ops_q]
            preps = kinds.count(OpKind.PREP_PLUS)
            meas = kinds.count(OpKind.MEAS_X)
            if preps and kinds[0] is not OpKind.PREP_PLUS:
                raise ValueError(f"prep on {b.name}.{q} is not its first operation")
            if b.role is Role.ANCILLA:
                # lifetime PrepPlus -> Cphase* -> MeasX
                if preps != 1 or meas != 1 or kinds[-1] is not OpKind.MEAS_X:
                    raise ValueError(f"ancilla {b.name}.{q} lifetime violated")
                if any(k is not OpKind.CPHASE for k in kinds[1:-1]):
                    raise ValueError(f"ancilla {b.name}.{q} lifetime violated")
    n_meas = len(c.meas_ops)
    for lm in c.logical_measurements:
        for g in lm.constituent_groups:
            if any(not 0 <= i < n_meas for i in g):
                raise ValueError(f"logical measurement {lm.label} references "
                                 "a missing constituent")


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def build_meas_zl(n: int, r: int) -> GadgetCircuit:
    """Nondestructive logical-Z measurement: r staggered repetitions, each one
    ancilla coupled to all n data qubits by CPHASE and read out in the X basis.
    The majority of the r outcomes decodes the measurement.
    """
    _require_odd(n=n, r=r)
    blocks = [BlockSpec("data", n, Role.IO), BlockSpec("anc", r, Role.ANCILLA)]
    ops = []
    for k in range(r):
        ops.append(Operation(OpKind.PREP_PLUS, (("anc", k),), k))
        for j in range(n):
            ops.append(Operation(OpKind.CPHASE, (("anc", k), ("data", j)), k + 1 + j))
        ops.append(Operation(OpKind.MEAS_X, (("anc", k),), k + n + 1))
    lms = [LogicalMeasurement("MZ", (tuple(range(r)),), exposure_coeff=n + 2)]
    return _finish(GadgetKind.MEAS_ZL, n, {"r": r}, blocks, ops, lms)


def build_error_correction(n: int, r: int) -> GadgetCircuit:
    """One-bit-teleportation error correction: a fresh output block prepared
    transversally in |+>, a joint logical-ZZ measurement between input and
    output (r repetitions, 2n CPHASE each), and a destructive logical-X
    measurement of the input block.  Frame updates from the outcomes are
    bookkeeping, not corrective gates.
    """
    _require_odd(n=n, r=r)
    blocks = [BlockSpec("input", n, Role.INPUT), BlockSpec("output", n, Role.OUTPUT),
              BlockSpec("anc", r, Role.ANCILLA)]
    ops = []
    for j in range(n):
        ops.append(Operation(OpKind.PREP_PLUS, (("output", j),), j))
        ops.append(Operation(OpKind.MEAS_X, (("input", j),), r + n + 1 + j))
    for k in range(r):
        ops.append(Operation(OpKind.PREP_PLUS, (("anc", k),), k))
        for j in range(n):
            ops.append(Operation(OpKind.CPHASE, (("anc", k), ("output", j)), k + 1 + j))
            ops.append(Operation(OpKind.CPHASE, (("anc", k), ("input", j)), k + n + 1 + j))
        ops.append(Operation(OpKind.MEAS_X, (("anc", k),), k + 2 * n + 1))
    # meas indices in schedule order: ancilla measurements come first
    # (steps 2n+1..2n+r), input measurements follow (steps r+n+1..r+2n);
    # for r=n the two ranges interleave, so resolve indices after sorting.
    ops = sorted(ops, key=lambda o: (o.timestep, o.operands))
    meas_order = [op.operands[0] for op in ops if op.kind is OpKind.MEAS_X]
    anc_idx = tuple(meas_order.index(("anc", k)) for k in range(r))
    in_idx = tuple(meas_order.index(("input", j)) for j in range(n))
    lms = [LogicalMeasurement("MZZ", (anc_idx,), exposure_coeff=2 * n + 2),
           LogicalMeasurement("MX", (in_idx,), exposure_coeff=2 * r + 2)]
    return _finish(GadgetKind.ERROR_CORRECT, n, {"r": r}, blocks, ops, lms)


def _cnot_network(n: int, r1: int, r2: int):
    """Shared layout of the CNOT measurement network.

    The ZZ stream couples (out_c, in_c); the ZZZ stream couples
    (out_t, in_t, in_c).  For r1 > n the ZZZ stream is delayed so the two
    streams never contend for the shared in_c qubits.
    """
    delay = max(0, r1 - n)
    ops = []
    for k in range(r1):
        ops.append(Operation(OpKind.PREP_PLUS, (("anc_zz", k),), k))
        for j in range(n):
            ops.append(Operation(OpKind.CPHASE, (("anc_zz", k), ("out_c", j)), k + 1 + j))
            ops.append(Operation(OpKind.CPHASE, (("anc_zz", k), ("in_c", j)), k + n + 1 + j))
        ops.append(Operation(OpKind.MEAS_X, (("anc_zz", k),), k + 2 * n + 1))
    for k in range(r2):
        base = k + delay
        ops.append(Operation(OpKind.PREP_PLUS, (("anc_zzz", k),), base))
        for j in range(n):
            ops.append(Operation(OpKind.CPHASE, (("anc_zzz", k), ("out_t", j)), base + 1 + j))
            ops.append(Operation(OpKind.CPHASE, (("anc_zzz", k), ("in_t", j)), base + n + 1 + j))
            ops.append(Operation(OpKind.CPHASE, (("anc_zzz", k), ("in_c", j)), base + 2 * n + 1 + j))
        ops.append(Operation(OpKind.MEAS_X, (("anc_zzz", k),), base + 3 * n + 1))
    last_in_c = r2 + delay + 2 * n   # last CPHASE on in_c[0]
    last_in_t = r2 + delay + n
    return ops, delay, last_in_c, last_in_t


def build_cnot(n: int, r1: int, r2: int, r: int) -> GadgetCircuit:
    """Teleportation-based CNOT gadget on (control, target) input blocks with
    fresh |+>-prepared output blocks.

    Logical measurements: ZZ on (output control, input control) repeated r1
    times; ZZZ on (output target, input target, input control) repeated r2
    times; destructive logical-X on both input blocks.  ``r`` is the
    repetition count of the preceding gadget and enters only the exposure
    bookkeeping shared with the bounds module.
    """
    _require_odd(n=n, r1=r1, r2=r2, r=r)
    blocks = [BlockSpec("in_c", n, Role.INPUT), BlockSpec("in_t", n, Role.INPUT),
              BlockSpec("out_c", n, Role.OUTPUT), BlockSpec("out_t", n, Role.OUTPUT),
              BlockSpec("anc_zz", r1, Role.ANCILLA), BlockSpec("anc_zzz", r2, Role.ANCILLA)]
    ops, delay, last_in_c, last_in_t = _cnot_network(n, r1, r2)
    for j in range(n):
        ops.append(Operation(OpKind.PREP_PLUS, (("out_c", j),), j))
        ops.append(Operation(OpKind.PREP_PLUS, (("out_t", j),), j + delay))
        ops.append(Operation(OpKind.MEAS_X, (("in_c", j),), last_in_c + 1 + j))
        ops.append(Operation(OpKind.MEAS_X, (("in_t", j),), last_in_t + 1 + j))
    ops = sorted(ops, key=lambda o: (o.timestep, o.operands))
    meas_order = [op.operands[0] for op in ops if op.kind is OpKind.MEAS_X]
    lms = [
        LogicalMeasurement("MZZ", (tuple(meas_order.index(("anc_zz", k)) for k in range(r1)),),
                           exposure_coeff=2 * n + 2),
        LogicalMeasurement("MZZZ", (tuple(meas_order.index(("anc_zzz", k)) for k in range(r2)),),
                           exposure_coeff=3 * n + 2),
        LogicalMeasurement("MX_CTRL", (tuple(meas_order.index(("in_c", j)) for j in range(n)),),
                           exposure_coeff=r + r1 + r2 + 2),
        LogicalMeasurement("MX_TGT", (tuple(meas_order.index(("in_t", j)) for j in range(n)),),
                           exposure_coeff=r + r2 + 2),
    ]
    return _finish(GadgetKind.CNOT, n, {"r1": r1, "r2": r2, "r": r}, blocks, ops, lms)


def build_bell_prep(n: int, t: int) -> GadgetCircuit:
    """Encoded Bell-pair preparation: two |+>-prepared blocks joined by a
    logical-ZZ measurement repeated t times (typically t < n), postselected
    on the vote not being close.
    """
    _require_odd(n=n, t=t)
    blocks = [BlockSpec("half_a", n, Role.OUTPUT), BlockSpec("half_b", n, Role.OUTPUT),
              BlockSpec("anc", t, Role.ANCILLA)]
    ops = []
    for j in range(n):
        ops.append(Operation(OpKind.PREP_PLUS, (("half_a", j),), j))
        ops.append(Operation(OpKind.PREP_PLUS, (("half_b", j),), n + j))
    for k in range(t):
        ops.append(Operation(OpKind.PREP_PLUS, (("anc", k),), k))
        for j in range(n):
            ops.append(Operation(OpKind.CPHASE, (("anc", k), ("half_a", j)), k + 1 + j))
            ops.append(Operation(OpKind.CPHASE, (("anc", k), ("half_b", j)), k + n + 1 + j))
        ops.append(Operation(OpKind.MEAS_X, (("anc", k),), k + 2 * n + 1))
    lms = [LogicalMeasurement("MZZ", (tuple(range(t)),), exposure_coeff=2 * n + 2,
                              postselect=True)]
    return _finish(GadgetKind.BELL_PREP, n, {"t": t}, blocks, ops, lms)


def build_bell_meas(n: int, r1: int, r2: int) -> GadgetCircuit:
    """Bell-measurement network consuming four input blocks: the CNOT
    measurement network followed by destructive X-basis measurement of every
    block.  The per-block logical-X majorities are XOR-combined in pairs
    (Bell half with the matching data block) to give the two teleportation
    outcomes.
    """
    _require_odd(n=n, r1=r1, r2=r2)
    blocks = [BlockSpec("in_c", n, Role.INPUT), BlockSpec("in_t", n, Role.INPUT),
              BlockSpec("half_c", n, Role.INPUT), BlockSpec("half_t", n, Role.INPUT),
              BlockSpec("anc_zz", r1, Role.ANCILLA), BlockSpec("anc_zzz", r2, Role.ANCILLA)]
    ops, delay, last_in_c, last_in_t = _cnot_network(n, r1, r2)
    renamed = []
    for op in ops:
        operands = tuple(("half_c" if b == "out_c" else "half_t" if b == "out_t" else b, q)
                         for b, q in op.operands)
        renamed.append(Operation(op.kind, operands, op.timestep))
    ops = renamed
    for j in range(n):
        ops.append(Operation(OpKind.MEAS_X, (("half_c", j),), r1 + 1 + j))
        ops.append(Operation(OpKind.MEAS_X, (("half_t", j),), r2 + delay + 1 + j))
        ops.append(Operation(OpKind.MEAS_X, (("in_c", j),), last_in_c + 1 + j))
        ops.append(Operation(OpKind.MEAS_X, (("in_t", j),), last_in_t + 1 + j))
    ops = sorted(ops, key=lambda o: (o.timestep, o.operands))
    meas_order = [op.operands[0] for op in ops if op.kind is OpKind.MEAS_X]

    def idx(name):
        return tuple(meas_order.index((name, j)) for j in range(n))

    lms = [
        LogicalMeasurement("MZZ", (tuple(meas_order.index(("anc_zz", k)) for k in range(r1)),),
                           exposure_coeff=2 * n + 2),
        LogicalMeasurement("MZZZ", (tuple(meas_order.index(("anc_zzz", k)) for k in range(r2)),),
                           exposure_coeff=3 * n + 2),
        LogicalMeasurement("MX_PAIR_C", (idx("half_c"), idx("in_c")),
                           exposure_coeff=r1 + r2 + 2),
        LogicalMeasurement("MX_PAIR_T", (idx("half_t"), idx("in_t")),
                           exposure_coeff=r2 + 2),
    ]
    return _finish(GadgetKind.BELL_MEAS, n, {"r1": r1, "r2": r2}, blocks, ops, lms)


BUILDERS = {
    GadgetKind.MEAS_ZL: build_meas_zl,
    GadgetKind.ERROR_CORRECT: build_error_correction,
    GadgetKind.CNOT: build_cnot,
    GadgetKind.BELL_PREP: build_bell_prep,
    GadgetKind.BELL_MEAS: build_bell_meas,
}


# ---------------------------------------------------------------------------
# schedule statistics
# ---------------------------------------------------------------------------

def schedule_stats(c: GadgetCircuit) -> ScheduleStats:
    """Exact operation counts and pipelining figures for a circuit.

    ``output_ready_step`` / ``input_first_step`` are reported for qubit 0 of
    the output / input blocks; the remaining qubits lag uniformly, so these
    two numbers carry the whole pipelining relation.
    """
    counts = {OpKind.CPHASE: 0, OpKind.PREP_PLUS: 0, OpKind.MEAS_X: 0}
    steps: dict[tuple[str, int], list[int]] = {}
    for op in c.ops:
        counts[op.kind] += 1
        for addr in op.operands:
            steps.setdefault(addr, []).append(op.timestep)
    idle = 0
    for b in c.blocks:
        if b.role is Role.ANCILLA:
            continue
        for q in range(b.size):
            ts = sorted(steps.get((b.name, q), []))
            idle += sum(b - a - 1 for a, b in zip(ts, ts[1:]))
    depth = max(op.timestep for op in c.ops) + 1
    out_ready = max((max(steps[(b.name, 0)]) for b in c.output_blocks), default=-1)
    in_first = min((min(steps[(b.name, 0)]) for b in c.input_blocks), default=-1)
    return ScheduleStats(
        cphase_count=counts[OpKind.CPHASE],
        prep_count=counts[OpKind.PREP_PLUS],
        meas_count=counts[OpKind.MEAS_X],
        idle_data_steps=idle,
        depth=depth,
        output_ready_step=out_ready,
        input_first_step=in_first,
    )
