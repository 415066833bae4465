"""Sampleable instantiation of the biased stochastic noise model.

Per CPHASE location, independently: a non-dephasing fault with probability
eps' (Pauli uniform over the 12 two-qubit Paulis with an X component on at
least one operand), else a dephasing fault with probability eps (uniform over
Z*I, I*Z, Z*Z), else clean.  Preparations acquire a Z flip and measurements a
classical flip, each with probability eps.

Randomness is counter-based (splitmix64 over a (seed, trial, location, draw)
counter), so trial t's fault path is reproducible independently of batching
or worker assignment, and the vectorized sampler used by the Monte Carlo
engine produces bit-identical paths to the per-trial object sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional

import numpy as np

from .gadgets import GadgetCircuit, OpKind
from .pauli import PauliOp

# canonical Pauli tables; each row is (x1, z1, x2, z2)
DEPHASING_PAULIS: tuple[tuple[int, int, int, int], ...] = (
    (0, 1, 0, 0),   # Z*I
    (0, 0, 0, 1),   # I*Z
    (0, 1, 0, 1),   # Z*Z
)
NON_DEPHASING_PAULIS: tuple[tuple[int, int, int, int], ...] = tuple(
    (x1, z1, x2, z2)
    for x1 in (0, 1) for z1 in (0, 1) for x2 in (0, 1) for z2 in (0, 1)
    if x1 or x2
)
assert len(NON_DEPHASING_PAULIS) == 12


@dataclass(frozen=True)
class NoiseParams:
    """(eps, eps') of the biased noise model; bias = eps/eps'."""

    epsilon: float
    epsilon_prime: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon_prime <= self.epsilon <= 1.0:
            raise ValueError("require 0 <= eps' <= eps <= 1")
        if self.epsilon + self.epsilon_prime > 1.0:
            raise ValueError("require eps + eps' <= 1")

    @property
    def bias(self) -> float:
        if self.epsilon_prime == 0.0:
            return math.inf
        return self.epsilon / self.epsilon_prime

    @classmethod
    def from_bias(cls, epsilon: float, bias: float) -> "NoiseParams":
        if bias <= 0:
            raise ValueError("bias must be positive")
        return cls(epsilon, epsilon / bias)


class FaultClass(Enum):
    DEPHASING = "dephasing"
    NON_DEPHASING = "non_dephasing"
    PREP_FLIP = "prep_flip"
    MEAS_FLIP = "meas_flip"


@dataclass(frozen=True)
class FaultEvent:
    """One fault at one circuit location (index into the op schedule).

    ``pauli`` carries one PauliOp per operand of the location; measurement
    flips are classical and carry none.
    """

    location: int
    fault_class: FaultClass
    pauli: tuple[PauliOp, ...] = ()

    def __post_init__(self) -> None:
        if self.fault_class is FaultClass.DEPHASING:
            if any(p.x for p in self.pauli) or not any(p.z for p in self.pauli):
                raise ValueError("dephasing events carry pure-Z Paulis")
        elif self.fault_class is FaultClass.NON_DEPHASING:
            if not any(p.x for p in self.pauli):
                raise ValueError("non-dephasing events need an X component")
        elif self.fault_class is FaultClass.PREP_FLIP:
            if len(self.pauli) != 1 or self.pauli[0].x or not self.pauli[0].z:
                raise ValueError("prep faults are single-qubit Z flips")
        elif self.pauli:
            raise ValueError("measurement flips carry no Pauli")


@dataclass(frozen=True)
class FaultPath:
    events: tuple[FaultEvent, ...]
    seed: Optional[int] = None
    trial: int = 0

    def __post_init__(self) -> None:
        locs = [e.location for e in self.events]
        if len(locs) != len(set(locs)):
            raise ValueError("at most one event per location")

    def __len__(self) -> int:
        return len(self.events)


# ---------------------------------------------------------------------------
# counter-based uniforms
# ---------------------------------------------------------------------------

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_U64 = np.uint64
_DRAWS_PER_LOC = 2


def _mix64(v: np.ndarray) -> np.ndarray:
    v = (v ^ (v >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    v = (v ^ (v >> _U64(27))) * _U64(0x94D049BB133111EB)
    return v ^ (v >> _U64(31))


def _seed_base(seed: int) -> np.uint64:
    return _mix64(np.asarray(_U64(seed & 0xFFFFFFFFFFFFFFFF)))


def uniform_field(seed: int, trials, location: int, draw: int,
                  n_locations: int):
    """Uniforms in [0, 1) indexed by (seed, trial, location, draw).

    ``trials`` may be an int or an integer array; the result has its shape.
    The stream layout depends on the circuit only through ``n_locations``.
    """
    t = np.asarray(trials, dtype=np.uint64)
    ctr = (t * _U64(n_locations) + _U64(location)) * _U64(_DRAWS_PER_LOC) + _U64(draw)
    with np.errstate(over="ignore"):
        bits = _mix64(_seed_base(seed) + (ctr + _U64(1)) * _GOLDEN)
    out = (bits >> _U64(11)).astype(np.float64) * (2.0 ** -53)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# sampling and probabilities
# ---------------------------------------------------------------------------

def _loc_fault_probability(op_kind: OpKind, p: NoiseParams) -> float:
    if op_kind is OpKind.CPHASE:
        return p.epsilon + p.epsilon_prime
    return p.epsilon


def sample_fault_path(c: GadgetCircuit, p: NoiseParams, seed: int,
                      trial: int = 0) -> FaultPath:
    """Draw one fault path; deterministic given (circuit, params, seed, trial)."""
    n_loc = len(c.ops)
    events = []
    for loc, op in enumerate(c.ops):
        u0 = uniform_field(seed, trial, loc, 0, n_loc)
        if op.kind is OpKind.CPHASE:
            if u0 < p.epsilon_prime:
                u1 = uniform_field(seed, trial, loc, 1, n_loc)
                row = NON_DEPHASING_PAULIS[min(int(u1 * 12), 11)]
                events.append(FaultEvent(loc, FaultClass.NON_DEPHASING,
                                         (PauliOp(bool(row[0]), bool(row[1])),
                                          PauliOp(bool(row[2]), bool(row[3])))))
            elif u0 < p.epsilon_prime + p.epsilon:
                u1 = uniform_field(seed, trial, loc, 1, n_loc)
                row = DEPHASING_PAULIS[min(int(u1 * 3), 2)]
                events.append(FaultEvent(loc, FaultClass.DEPHASING,
                                         (PauliOp(bool(row[0]), bool(row[1])),
                                          PauliOp(bool(row[2]), bool(row[3])))))
        elif u0 < p.epsilon:
            if op.kind is OpKind.PREP_PLUS:
                events.append(FaultEvent(loc, FaultClass.PREP_FLIP,
                                         (PauliOp(False, True),)))
            else:
                events.append(FaultEvent(loc, FaultClass.MEAS_FLIP))
    return FaultPath(tuple(events), seed=seed, trial=trial)


def event_probability(op_kind: OpKind, event: FaultEvent, p: NoiseParams) -> float:
    """Probability weight of one event under the sampling instantiation."""
    if op_kind is OpKind.CPHASE:
        if event.fault_class is FaultClass.NON_DEPHASING:
            return p.epsilon_prime / 12.0
        if event.fault_class is FaultClass.DEPHASING:
            return p.epsilon / 3.0
        raise ValueError(f"{event.fault_class} cannot occur at a Cphase")
    if op_kind is OpKind.PREP_PLUS and event.fault_class is FaultClass.PREP_FLIP:
        return p.epsilon
    if op_kind is OpKind.MEAS_X and event.fault_class is FaultClass.MEAS_FLIP:
        return p.epsilon
    raise ValueError(f"{event.fault_class} cannot occur at a {op_kind}")


def fault_path_probability(fp: FaultPath, c: GadgetCircuit, p: NoiseParams) -> float:
    """Exact product probability of a fault path, clean locations included."""
    by_loc = {e.location: e for e in fp.events}
    if any(loc >= len(c.ops) or loc < 0 for loc in by_loc):
        raise ValueError("event at unknown location")
    prob = 1.0
    for loc, op in enumerate(c.ops):
        event = by_loc.get(loc)
        if event is None:
            prob *= 1.0 - _loc_fault_probability(op.kind, p)
        else:
            prob *= event_probability(op.kind, event, p)
    return prob


def location_variants(op_kind: OpKind, p: NoiseParams):
    """All fault events possible at one location, with their probabilities."""
    def ev(cls, rows):
        for row in rows:
            yield FaultEvent(0, cls, (PauliOp(bool(row[0]), bool(row[1])),
                                      PauliOp(bool(row[2]), bool(row[3]))))
    if op_kind is OpKind.CPHASE:
        variants = [(p.epsilon / 3.0, e) for e in ev(FaultClass.DEPHASING, DEPHASING_PAULIS)]
        variants += [(p.epsilon_prime / 12.0, e)
                     for e in ev(FaultClass.NON_DEPHASING, NON_DEPHASING_PAULIS)]
        return variants
    if op_kind is OpKind.PREP_PLUS:
        return [(p.epsilon, FaultEvent(0, FaultClass.PREP_FLIP, (PauliOp(False, True),)))]
    return [(p.epsilon, FaultEvent(0, FaultClass.MEAS_FLIP))]


def iter_fault_paths(c: GadgetCircuit, p: NoiseParams,
                     max_faults: Optional[int] = None) -> Iterator[FaultPath]:
    """Yield every fault path with at most ``max_faults`` events.

    Intended for small circuits; the yielded paths together with
    ``fault_path_probability`` realize the complete path-space sum.
    """
    n_loc = len(c.ops)
    if max_faults is None:
        max_faults = n_loc
    variants = [location_variants(op.kind, p) for op in c.ops]

    def rec(loc: int, remaining: int, acc: list):
        if loc == n_loc:
            yield FaultPath(tuple(acc))
            return
        yield from rec(loc + 1, remaining, acc)
        if remaining > 0:
            for _, event in variants[loc]:
                acc.append(FaultEvent(loc, event.fault_class, event.pauli))
                yield from rec(loc + 1, remaining - 1, acc)
                acc.pop()

    yield from rec(0, max_faults, [])


@dataclass(frozen=True)
class NoiseConfig:
    """File-backed noise configuration: epsilon, bias, seed."""

    epsilon: float
    bias: float
    seed: int = 0
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def params(self) -> NoiseParams:
        return NoiseParams.from_bias(self.epsilon, self.bias)


def load_noise_config(path: str) -> NoiseConfig:
    """Parse a flat key=value file (``#`` comments allowed)."""
    values: dict[str, str] = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"malformed config line: {raw.rstrip()}")
            key, val = line.split("=", 1)
            values[key.strip()] = val.strip()
    try:
        epsilon = float(values.pop("epsilon"))
        bias = float(values.pop("bias"))
    except KeyError as missing:
        raise ValueError(f"config missing key {missing}") from None
    seed = int(float(values.pop("seed", "0")))
    return NoiseConfig(epsilon=epsilon, bias=bias, seed=seed, extras=values)
