"""Fault-path propagation through gadget circuits, majority-vote decoding
with close-vote flagging, and failure-probability estimation by Monte Carlo
and by exact truncated enumeration.

Propagation tracks only deviations from ideal execution (the zero frame), so
the ideal outcome itself is never computed.  Fault Paulis act after their
operation; CPHASE conjugates the running frame (an X component deposits a Z
on the partner qubit); a single-qubit X-basis measurement flips iff the
qubit's Z bit, XOR a measurement fault, is set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.stats import norm

from .gadgets import (BUILDERS, GadgetCircuit, GadgetKind, OpKind, Role,
                      build_cnot)
from .noise import (FaultEvent, FaultPath, NoiseParams, location_variants,
                    sample_fault_path, uniform_field)
from .pauli import PauliFrame


class GuardExceededError(RuntimeError):
    """Raised when an exact enumeration would exceed its tractability budget."""


# ---------------------------------------------------------------------------
# decoding
# ---------------------------------------------------------------------------

def majority(flips: list[bool], arity: int) -> tuple[bool, bool]:
    """Majority vote plus the close-vote flag (winning margin exactly one)."""
    if arity % 2 == 0 or arity < 1:
        raise ValueError("vote arity must be odd and positive")
    if len(flips) != arity:
        raise ValueError("vote size does not match arity")
    ones = sum(bool(f) for f in flips)
    return ones * 2 > arity, abs(2 * ones - arity) == 1


@dataclass(frozen=True)
class Transcript:
    """Decoded result of one propagated fault path."""

    logical_flips: dict[str, bool]
    flags: dict[str, bool]
    output_frames: dict[str, PauliFrame]
    meas_flips: tuple[bool, ...] = field(default=(), compare=False)


def judge_failure(t: Transcript) -> bool:
    """A gadget fails iff any decoded measurement disagrees with ideal;
    close-vote flags alone are advisory."""
    return any(t.logical_flips.values())


def propagate(c: GadgetCircuit, fp: FaultPath,
              inputs: Optional[dict[str, PauliFrame]] = None) -> Transcript:
    """Push a fault path (plus optional input-block frames) through a circuit."""
    frames: dict[str, PauliFrame] = {}
    input_names = {b.name for b in c.input_blocks}
    for b in c.blocks:
        frames[b.name] = PauliFrame.zero(b.name, b.size)
    if inputs:
        for name, frame in inputs.items():
            if name not in input_names:
                raise ValueError(f"{name} is not an input block of this circuit")
            if frame.n != c.block(name).size:
                raise ValueError(f"input frame for {name} has wrong length")
            frames[name] = frame.copy()
    events = {e.location: e for e in fp.events}
    if any(not 0 <= loc < len(c.ops) for loc in events):
        raise ValueError("event at unknown location")

    meas_flips: list[bool] = []
    for loc, op in enumerate(c.ops):
        event = events.get(loc)
        if op.kind is OpKind.PREP_PLUS:
            name, q = op.operands[0]
            f = frames[name]
            f.x_mask &= ~(1 << q)
            f.z_mask &= ~(1 << q)
            if event is not None:
                f.apply(q, event.pauli[0])
        elif op.kind is OpKind.CPHASE:
            (n1, q1), (n2, q2) = op.operands
            f1, f2 = frames[n1], frames[n2]
            x1 = f1.x_mask >> q1 & 1
            x2 = f2.x_mask >> q2 & 1
            f1.z_mask ^= x2 << q1
            f2.z_mask ^= x1 << q2
            if event is not None:
                f1.apply(q1, event.pauli[0])
                f2.apply(q2, event.pauli[1])
        else:
            name, q = op.operands[0]
            meas_flips.append(bool(frames[name].z_mask >> q & 1) ^ (event is not None))

    logical_flips: dict[str, bool] = {}
    flags: dict[str, bool] = {}
    for lm in c.logical_measurements:
        flip = False
        close = False
        for group in lm.constituent_groups:
            g_flip, g_close = majority([meas_flips[i] for i in group], len(group))
            flip ^= g_flip
            close |= g_close
        logical_flips[lm.label] = flip
        flags[lm.label] = close
    outputs = {b.name: frames[b.name].copy() for b in c.output_blocks}
    return Transcript(logical_flips, flags, outputs, tuple(meas_flips))


# ---------------------------------------------------------------------------
# vectorized Monte Carlo engine
# ---------------------------------------------------------------------------

_ND_TABLE = np.array(
    [[x1, z1, x2, z2]
     for x1 in (0, 1) for z1 in (0, 1) for x2 in (0, 1) for z2 in (0, 1)
     if x1 or x2], dtype=np.uint64)
_D_TABLE = np.array([[0, 1, 0, 0], [0, 0, 0, 1], [0, 1, 0, 1]], dtype=np.uint64)

# seed tags decorrelate auxiliary draw streams from the gadget's own stream
_CHAIN_SEED_TAG = 0x5B8C_11A3_9D2E_F007
_INPUT_SEED_TAG = 0x2E1B_66D4_03C7_A559

_ONE = np.uint64(1)


class _Compiled:
    """Array form of a circuit for trial-vectorized propagation."""

    def __init__(self, c: GadgetCircuit):
        self.circuit = c
        self.block_index = {b.name: i for i, b in enumerate(c.blocks)}
        self.sizes = [b.size for b in c.blocks]
        self.ops = []
        meas_col = 0
        for op in c.ops:
            if op.kind is OpKind.CPHASE:
                (n1, q1), (n2, q2) = op.operands
                self.ops.append((1, self.block_index[n1], q1, self.block_index[n2], q2, -1))
            else:
                name, q = op.operands[0]
                if op.kind is OpKind.PREP_PLUS:
                    self.ops.append((0, self.block_index[name], q, -1, -1, -1))
                else:
                    self.ops.append((2, self.block_index[name], q, -1, -1, meas_col))
                    meas_col += 1
        self.n_meas = meas_col
        self.n_loc = len(c.ops)
        self.output_names = [b.name for b in c.output_blocks]


def _propagate_batch(comp: _Compiled, p: NoiseParams, seed: int,
                     trials: np.ndarray,
                     input_x: Optional[dict[str, np.ndarray]] = None,
                     input_z: Optional[dict[str, np.ndarray]] = None):
    """Propagate a batch of trials; returns (meas flips, output x/z masks).

    Trial t's sampled faults are bit-identical to
    ``sample_fault_path(c, p, seed, t)``.
    """
    size = trials.shape[0]
    eps = p.epsilon
    epsp = p.epsilon_prime
    x = [np.zeros(size, dtype=np.uint64) for _ in comp.sizes]
    z = [np.zeros(size, dtype=np.uint64) for _ in comp.sizes]
    if input_x:
        for name, mask in input_x.items():
            x[comp.block_index[name]] = mask.astype(np.uint64).copy()
    if input_z:
        for name, mask in input_z.items():
            z[comp.block_index[name]] = mask.astype(np.uint64).copy()
    flips = np.zeros((size, comp.n_meas), dtype=bool)
    n_loc = comp.n_loc
    for loc, (kind, b1, q1, b2, q2, col) in enumerate(comp.ops):
        u0 = uniform_field(seed, trials, loc, 0, n_loc)
        if kind == 1:
            nd = u0 < epsp
            dep = (~nd) & (u0 < epsp + eps)
            s1 = np.uint64(q1)
            s2 = np.uint64(q2)
            x1b = (x[b1] >> s1) & _ONE
            x2b = (x[b2] >> s2) & _ONE
            z[b1] ^= x2b << s1
            z[b2] ^= x1b << s2
            if nd.any() or dep.any():
                u1 = uniform_field(seed, trials, loc, 1, n_loc)
                nd_idx = np.minimum((u1 * 12).astype(np.int64), 11)
                d_idx = np.minimum((u1 * 3).astype(np.int64), 2)
                fault = (_ND_TABLE[nd_idx].T * nd) ^ (_D_TABLE[d_idx].T * dep)
                x[b1] ^= fault[0] << s1
                z[b1] ^= fault[1] << s1
                x[b2] ^= fault[2] << s2
                z[b2] ^= fault[3] << s2
        elif kind == 0:
            s1 = np.uint64(q1)
            keep = ~(_ONE << s1)
            x[b1] &= keep
            z[b1] &= keep
            z[b1] ^= (u0 < eps).astype(np.uint64) << s1
        else:
            s1 = np.uint64(q1)
            flips[:, col] = (((z[b1] >> s1) & _ONE) != 0) ^ (u0 < eps)
    out_x = {name: x[comp.block_index[name]] for name in comp.output_names}
    out_z = {name: z[comp.block_index[name]] for name in comp.output_names}
    return flips, out_x, out_z


def _decode_batch(c: GadgetCircuit, flips: np.ndarray):
    """Per-trial logical flips and close-vote flags for each measurement."""
    lm_flips = {}
    lm_close = {}
    for lm in c.logical_measurements:
        flip = np.zeros(flips.shape[0], dtype=bool)
        close = np.zeros(flips.shape[0], dtype=bool)
        for group in lm.constituent_groups:
            arity = len(group)
            ones = flips[:, list(group)].sum(axis=1)
            flip ^= ones * 2 > arity
            close |= np.abs(2 * ones.astype(np.int64) - arity) == 1
        lm_flips[lm.label] = flip
        lm_close[lm.label] = close
    return lm_flips, lm_close


# ---------------------------------------------------------------------------
# estimation
# ---------------------------------------------------------------------------

def wilson_interval(failures: int, trials: int, confidence: float = 0.99) -> tuple[float, float]:
    """Wilson score interval; well-defined at zero observed failures."""
    if trials < 1:
        raise ValueError("trials must be positive")
    zq = float(norm.ppf(0.5 + confidence / 2.0))
    phat = failures / trials
    denom = 1.0 + zq * zq / trials
    center = (phat + zq * zq / (2 * trials)) / denom
    half = (zq / denom) * math.sqrt(phat * (1 - phat) / trials + zq * zq / (4 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class SimResult:
    trials: int
    failures: int
    flag_raised: int
    accepted: int
    failures_accepted: int
    failure_rate: float
    ci_lo: float
    ci_hi: float
    seed: int
    gadget: str
    params: dict = field(compare=False)

    def __post_init__(self) -> None:
        if self.failures > self.trials:
            raise ValueError("failures exceed trials")
        if not self.ci_lo <= self.failure_rate <= self.ci_hi:
            raise ValueError("interval must bracket the failure rate")

    @property
    def wilson(self) -> tuple[float, float]:
        return (self.ci_lo, self.ci_hi)

    @property
    def cond_failure_rate(self) -> Optional[float]:
        if self.accepted == 0:
            return None
        return self.failures_accepted / self.accepted

    def to_json_dict(self) -> dict:
        out = {
            "trials": self.trials,
            "failures": self.failures,
            "failure_rate": self.failure_rate,
            "ci_lo": self.ci_lo,
            "ci_hi": self.ci_hi,
            "seed": self.seed,
            "gadget": self.gadget,
            "params": dict(self.params),
            "flag_raised": self.flag_raised,
            "accepted": self.accepted,
            "failures_accepted": self.failures_accepted,
        }
        if self.cond_failure_rate is not None:
            out["cond_failure_rate"] = self.cond_failure_rate
        return out


InputErrorSpec = Union[None, str, dict[str, int]]


def _sample_input_masks(c: GadgetCircuit, weights: dict[str, int], seed: int,
                        trials: np.ndarray) -> dict[str, np.ndarray]:
    """Per-trial random Z-error placements of fixed weight per input block."""
    input_sizes = {b.name: b.size for b in c.input_blocks}
    aux_total = sum(input_sizes.values())
    offsets = {}
    running = 0
    for b in c.input_blocks:
        offsets[b.name] = running
        running += b.size
    masks = {}
    for name, m in weights.items():
        if name not in input_sizes:
            raise ValueError(f"{name} is not an input block")
        n = input_sizes[name]
        if not 0 <= m <= n:
            raise ValueError(f"input weight {m} outside block of length {n}")
        if m == 0:
            continue
        u = np.stack([uniform_field(seed ^ _INPUT_SEED_TAG, trials,
                                    offsets[name] + j, 0, aux_total)
                      for j in range(n)], axis=1)
        chosen = np.argsort(u, axis=1)[:, :m]
        mask = np.zeros(trials.shape[0], dtype=np.uint64)
        for k in range(m):
            mask |= _ONE << chosen[:, k].astype(np.uint64)
        masks[name] = mask
    return masks


_CHAIN_FEEDS = {
    GadgetKind.CNOT: (("out_c", "in_c", "MZZ"), ("out_t", "in_t", "MZZZ")),
    GadgetKind.MEAS_ZL: (("out_c", "data", "MZZ"),),
    GadgetKind.ERROR_CORRECT: (("out_c", "input", "MZZ"),),
}


def estimate_failure(c: GadgetCircuit, p: NoiseParams, trials: int, seed: int,
                     input_errors: InputErrorSpec = None,
                     batch_size: int = 1 << 17) -> SimResult:
    """Monte Carlo failure estimate over ``trials`` sampled fault paths.

    ``input_errors`` is None (clean inputs), a dict of per-block Z-error
    weights placed uniformly at random each trial, or ``"chained"`` to feed
    the gadget from a preceding CNOT gadget whose output frames and
    forwarded logical-X byproducts (from its ZZ/ZZZ measurement flips) are
    handed off; the preceding gadget's own failures are not counted.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    comp = _Compiled(c)
    chained = input_errors == "chained"
    pre_comp = None
    if chained:
        if c.kind not in _CHAIN_FEEDS:
            raise ValueError(f"chained inputs are not defined for {c.kind.value}")
        n = c.n
        r1 = c.params.get("r1", c.params.get("r", c.params.get("t", n)))
        r2 = c.params.get("r2", r1)
        r = c.params.get("r", max(r1, r2))
        pre_comp = _Compiled(build_cnot(n, r1, r2, r))
    elif isinstance(input_errors, str):
        raise ValueError(f"unknown input error spec {input_errors!r}")

    postselect_labels = [lm.label for lm in c.logical_measurements if lm.postselect]
    failures = 0
    flagged = 0
    accepted = 0
    failures_accepted = 0
    for start in range(0, trials, batch_size):
        batch = np.arange(start, min(start + batch_size, trials), dtype=np.uint64)
        input_x = input_z = None
        if chained:
            pre_flips, pre_x, pre_z = _propagate_batch(
                pre_comp, p, seed ^ _CHAIN_SEED_TAG, batch)
            pre_lm_flips, _ = _decode_batch(pre_comp.circuit, pre_flips)
            input_x, input_z = {}, {}
            for out_name, in_name, byproduct in _CHAIN_FEEDS[c.kind]:
                input_x[in_name] = pre_x[out_name] ^ pre_lm_flips[byproduct].astype(np.uint64)
                input_z[in_name] = pre_z[out_name]
        elif isinstance(input_errors, dict) and input_errors:
            input_z = _sample_input_masks(c, input_errors, seed, batch)
        flips, _, _ = _propagate_batch(comp, p, seed, batch, input_x, input_z)
        lm_flips, lm_close = _decode_batch(c, flips)
        fail = np.zeros(batch.shape[0], dtype=bool)
        flag = np.zeros(batch.shape[0], dtype=bool)
        for label in lm_flips:
            fail |= lm_flips[label]
            flag |= lm_close[label]
        failures += int(fail.sum())
        flagged += int(flag.sum())
        if postselect_labels:
            acc = np.ones(batch.shape[0], dtype=bool)
            for label in postselect_labels:
                acc &= ~lm_close[label]
            accepted += int(acc.sum())
            failures_accepted += int((fail & acc).sum())
    ci_lo, ci_hi = wilson_interval(failures, trials)
    return SimResult(
        trials=trials, failures=failures, flag_raised=flagged,
        accepted=accepted, failures_accepted=failures_accepted,
        failure_rate=failures / trials, ci_lo=ci_lo, ci_hi=ci_hi, seed=seed,
        gadget=c.kind.value, params=dict(c.params, n=c.n,
                                         epsilon=p.epsilon,
                                         epsilon_prime=p.epsilon_prime),
    )


def estimate_failure_for(kind: Union[str, GadgetKind], params: dict,
                         p: NoiseParams, trials: int, seed: int,
                         input_errors: InputErrorSpec = None) -> SimResult:
    """Build the requested gadget and estimate its failure probability."""
    kind = GadgetKind(kind) if isinstance(kind, str) else kind
    circuit = BUILDERS[kind](**params)
    return estimate_failure(circuit, p, trials, seed, input_errors)


# ---------------------------------------------------------------------------
# exact enumeration
# ---------------------------------------------------------------------------

def max_faults_for_tail(c: GadgetCircuit, p: NoiseParams, tol: float) -> int:
    """Smallest K with P(more than K faulty locations) < tol (exact
    Poisson-binomial tail over the circuit's locations)."""
    probs = [p.epsilon + p.epsilon_prime if op.kind is OpKind.CPHASE else p.epsilon
             for op in c.ops]
    dist = np.zeros(len(probs) + 1)
    dist[0] = 1.0
    for q in probs:
        dist[1:] = dist[1:] * (1 - q) + dist[:-1] * q
        dist[0] *= 1 - q
    cumulative = np.cumsum(dist)
    for k in range(len(probs) + 1):
        if 1.0 - cumulative[k] < tol:
            return k
    return len(probs)


def _event_vectors(c: GadgetCircuit, p: NoiseParams):
    """Per-location fault variants as (probability, meas-flip bitmask).

    Propagation is GF(2)-linear in the injected faults, so a path's flip
    vector is the XOR of its events' single-event vectors.
    """
    out = []
    for loc, op in enumerate(c.ops):
        items = []
        for prob, event in location_variants(op.kind, p):
            tr = propagate(c, FaultPath((
                FaultEvent(loc, event.fault_class, event.pauli),)))
            vec = 0
            for i, bit in enumerate(tr.meas_flips):
                vec |= bit << i
            items.append((prob, vec))
        out.append(items)
    return out


def _failure_table(c: GadgetCircuit) -> np.ndarray:
    """judge_failure over all 2^M meas-flip vectors, M = measurement count."""
    m = len(c.meas_ops)
    vectors = np.arange(1 << m, dtype=np.uint64)
    fail = np.zeros(1 << m, dtype=bool)
    for lm in c.logical_measurements:
        flip = np.zeros(1 << m, dtype=bool)
        for group in lm.constituent_groups:
            mask = np.uint64(sum(1 << i for i in group))
            ones = np.bitwise_count(vectors & mask)
            flip ^= ones * 2 > len(group)
        fail |= flip
    return fail


def enumerate_exact(c: GadgetCircuit, p: NoiseParams,
                    max_faults: int,
                    state_budget: int = 2_000_000) -> tuple[float, float]:
    """Bracket the failure probability by summing fault-path probabilities
    over every path with at most ``max_faults`` events.

    Returns (lower, upper): the failing mass found, and that plus all
    unexplored mass.  The sum is organized as a transfer scan over the
    2^M measurement-flip vectors, which covers the truncated path space
    exactly; circuits whose state space exceeds the budget are refused.
    """
    if max_faults < 0:
        raise ValueError("max_faults must be non-negative")
    m = len(c.meas_ops)
    n_states = 1 << m
    if m > 26 or n_states * (max_faults + 1) > state_budget:
        raise GuardExceededError(
            f"enumeration needs {m}-bit transcripts x {max_faults + 1} fault "
            f"counts; budget is {state_budget} states")
    variants = _event_vectors(c, p)
    dist = np.zeros((n_states, max_faults + 1))
    dist[0, 0] = 1.0
    state_ids = np.arange(n_states, dtype=np.int64)
    for loc, op in enumerate(c.ops):
        clean = 1.0 - (p.epsilon + (p.epsilon_prime if op.kind is OpKind.CPHASE else 0.0))
        new = dist * clean
        if max_faults > 0:
            for prob, vec in variants[loc]:
                if prob > 0.0:
                    new[state_ids ^ vec, 1:] += prob * dist[:, :-1]
        dist = new
    fail = _failure_table(c)
    explored_per_state = dist.sum(axis=1)
    lower = float(explored_per_state[fail].sum())
    unexplored = max(0.0, 1.0 - float(explored_per_state.sum()))
    return lower, min(1.0, lower + unexplored)
