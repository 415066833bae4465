"""Pauli error algebra: operators, per-block error frames, and the CPHASE
conjugation rule that drives all error propagation in this package.

Phases are discarded throughout.  Only error supports and measurement-outcome
flips enter any failure judgment, so a Pauli is just an (x, z) bit pair and
composition is component-wise XOR.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


@dataclass(frozen=True)
class PauliOp:
    """Single-qubit Pauli, phase-free: I=(0,0), X=(1,0), Z=(0,1), Y=(1,1)."""

    x: bool
    z: bool

    def __mul__(self, other: "PauliOp") -> "PauliOp":
        return PauliOp(self.x ^ other.x, self.z ^ other.z)

    @property
    def label(self) -> str:
        return {(False, False): "I", (True, False): "X",
                (False, True): "Z", (True, True): "Y"}[(self.x, self.z)]

    @classmethod
    def from_label(cls, label: str) -> "PauliOp":
        try:
            x, z = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}[label]
        except KeyError:
            raise ValueError(f"unknown Pauli label {label!r}") from None
        return cls(bool(x), bool(z))

    def __repr__(self) -> str:
        return self.label


PAULI_I = PauliOp(False, False)
PAULI_X = PauliOp(True, False)
PAULI_Y = PauliOp(True, True)
PAULI_Z = PauliOp(False, True)


def compose(a: PauliOp, b: PauliOp) -> PauliOp:
    """Product of two Paulis up to phase (component-wise XOR)."""
    return a * b


def cphase_conjugate(pair: tuple[PauliOp, PauliOp]) -> tuple[PauliOp, PauliOp]:
    """Conjugate a two-qubit Pauli by the diagonal gate diag(1, 1, 1, -1).

    An X component on either qubit deposits a Z on the partner; Z components
    pass through unchanged.  Applying the rule twice is the identity.
    """
    a, b = pair
    return (PauliOp(a.x, a.z ^ b.x), PauliOp(b.x, b.z ^ a.x))


class LogicalKind(Enum):
    XL = "XL"
    ZL = "ZL"


@dataclass(frozen=True)
class LogicalOperator:
    """Logical Pauli of the length-n repetition code in the dual basis.

    XL acts on one designated qubit; ZL acts on every qubit of the block.
    """

    kind: LogicalKind
    support: frozenset[int]

    @classmethod
    def for_block(cls, kind: LogicalKind, n: int, pivot: int = 0) -> "LogicalOperator":
        if n < 1:
            raise ValueError("block length must be positive")
        if kind is LogicalKind.XL:
            return cls(kind, frozenset({pivot}))
        return cls(kind, frozenset(range(n)))

    def __post_init__(self) -> None:
        if self.kind is LogicalKind.XL and len(self.support) != 1:
            raise ValueError("XL support must have weight 1")
        if self.kind is LogicalKind.ZL and not self.support:
            raise ValueError("ZL support must be the full block")


class PauliFrame:
    """X/Z error bit vectors for one code block, stored as bit masks.

    The zero frame is ideal execution.  ``z_weight`` counts the block's Z
    errors (the m statistic of the fault-tolerance windows).
    """

    __slots__ = ("block_id", "n", "x_mask", "z_mask")

    def __init__(self, block_id: str, n: int, x_mask: int = 0, z_mask: int = 0):
        if n < 1:
            raise ValueError("frame length must be positive")
        if x_mask >> n or z_mask >> n:
            raise ValueError("mask exceeds block length")
        self.block_id = block_id
        self.n = n
        self.x_mask = x_mask
        self.z_mask = z_mask

    @classmethod
    def zero(cls, block_id: str, n: int) -> "PauliFrame":
        return cls(block_id, n)

    @classmethod
    def from_bits(cls, block_id: str, x_bits, z_bits) -> "PauliFrame":
        x_bits, z_bits = list(x_bits), list(z_bits)
        if len(x_bits) != len(z_bits):
            raise ValueError("x and z bit vectors must have equal length")
        x = sum(1 << i for i, b in enumerate(x_bits) if b)
        z = sum(1 << i for i, b in enumerate(z_bits) if b)
        return cls(block_id, len(x_bits), x, z)

    @property
    def x_bits(self) -> tuple[bool, ...]:
        return tuple(bool(self.x_mask >> i & 1) for i in range(self.n))

    @property
    def z_bits(self) -> tuple[bool, ...]:
        return tuple(bool(self.z_mask >> i & 1) for i in range(self.n))

    @property
    def x_weight(self) -> int:
        return self.x_mask.bit_count()

    @property
    def z_weight(self) -> int:
        return self.z_mask.bit_count()

    def is_zero(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def copy(self) -> "PauliFrame":
        return PauliFrame(self.block_id, self.n, self.x_mask, self.z_mask)

    def apply(self, qubit: int, p: PauliOp) -> None:
        if not 0 <= qubit < self.n:
            raise IndexError(f"qubit {qubit} outside block of length {self.n}")
        if p.x:
            self.x_mask ^= 1 << qubit
        if p.z:
            self.z_mask ^= 1 << qubit

    def __eq__(self, other) -> bool:
        return (isinstance(other, PauliFrame)
                and (self.block_id, self.n, self.x_mask, self.z_mask)
                == (other.block_id, other.n, other.x_mask, other.z_mask))

    def __repr__(self) -> str:
        labels = "".join(
            PauliOp(bool(self.x_mask >> i & 1), bool(self.z_mask >> i & 1)).label
            for i in range(self.n))
        return f"PauliFrame({self.block_id!r}, {labels})"


def outcome_flip(frame: PauliFrame, qubit: int, meas_fault: bool) -> bool:
    """Whether a single-qubit X-basis measurement disagrees with ideal.

    Z errors anticommute with the measured observable and flip the outcome;
    X errors do not.  A measurement fault flips it once more.
    """
    if not 0 <= qubit < frame.n:
        raise IndexError(f"qubit {qubit} outside block of length {frame.n}")
    return bool(frame.z_mask >> qubit & 1) ^ bool(meas_fault)
