import random

import pytest

from bft import (GadgetCircuit, build_bell_meas, build_bell_prep, build_cnot,
                 build_error_correction, build_meas_zl, schedule_stats,
                 validate_circuit)
from bft.gadgets import BlockSpec, GadgetKind, Operation, OpKind, Role

MEAS_ZL_3_3_GOLDEN = """\
0 PrepPlus anc.0
1 Cphase anc.0 data.0
1 PrepPlus anc.1
2 Cphase anc.0 data.1
2 Cphase anc.1 data.0
2 PrepPlus anc.2
3 Cphase anc.0 data.2
3 Cphase anc.1 data.1
3 Cphase anc.2 data.0
4 MeasX anc.0
4 Cphase anc.1 data.2
4 Cphase anc.2 data.1
5 MeasX anc.1
5 Cphase anc.2 data.2
6 MeasX anc.2
"""


def interaction_steps(c: GadgetCircuit, block: str, qubit: int) -> list[int]:
    return sorted(op.timestep for op in c.ops
                  if op.kind is OpKind.CPHASE and (block, qubit) in op.operands)


# ---------------------------------------------------------------------------
# logical-Z measurement
# ---------------------------------------------------------------------------

def test_meas_zl_paper_counts():
    s = schedule_stats(build_meas_zl(3, 3))
    assert (s.cphase_count, s.prep_count, s.meas_count) == (9, 3, 3)


def test_meas_zl_degenerate():
    s = schedule_stats(build_meas_zl(1, 1))
    assert (s.cphase_count, s.prep_count, s.meas_count) == (1, 1, 1)


def test_meas_zl_staggered_depth():
    # hand layout: n+r-1 CPHASE layers plus a leading prep and trailing meas layer
    assert schedule_stats(build_meas_zl(5, 3)).depth == 9


def test_meas_zl_golden_text():
    assert build_meas_zl(3, 3).to_text() == MEAS_ZL_3_3_GOLDEN


@pytest.mark.parametrize("n,r", [(1, 1), (3, 3), (5, 3), (3, 7), (7, 7)])
def test_meas_zl_data_never_idle(n, r):
    c = build_meas_zl(n, r)
    assert schedule_stats(c).idle_data_steps == 0
    for j in range(n):
        ts = interaction_steps(c, "data", j)
        assert ts == list(range(ts[0], ts[0] + r))


def test_meas_zl_vote_arity():
    c = build_meas_zl(5, 3)
    (lm,) = c.logical_measurements
    assert lm.arity == 3 and lm.exposure_coeff == 5 + 2


# ---------------------------------------------------------------------------
# error correction
# ---------------------------------------------------------------------------

def test_error_correction_counts():
    s = schedule_stats(build_error_correction(3, 3))
    assert s.cphase_count == 18          # 2n per repetition, r times
    assert s.prep_count == 6             # 3 ancilla + 3 output-block
    assert s.meas_count == 6             # 3 ancilla + 3 input-block


def test_error_correction_degenerate():
    assert schedule_stats(build_error_correction(1, 1)).cphase_count == 2


@pytest.mark.parametrize("n,r", [(1, 1), (3, 3), (3, 5), (5, 3), (5, 5)])
def test_error_correction_measurement_structure(n, r):
    c = build_error_correction(n, r)
    labels = {lm.label: lm.arity for lm in c.logical_measurements}
    assert labels == {"MZZ": r, "MX": n}


# ---------------------------------------------------------------------------
# CNOT gadget
# ---------------------------------------------------------------------------

def test_cnot_cphase_count_closed_form():
    rng = random.Random(20240809)
    for _ in range(20):
        n, r1, r2 = (rng.randrange(1, 13, 2) for _ in range(3))
        c = build_cnot(n, r1, r2, min(n, max(r1, r2)))
        assert schedule_stats(c).cphase_count == (2 * r1 + 3 * r2) * n


@pytest.mark.parametrize("n", [3, 5, 7, 11])
def test_cnot_uniform_reps_pipelines(n):
    s = schedule_stats(build_cnot(n, n, n, n))
    assert s.idle_data_steps == 0
    assert s.output_ready_step == s.input_first_step - 1


@pytest.mark.parametrize("n", [3, 5, 7])
def test_cnot_qubit_lag_pattern(n):
    c = build_cnot(n, n, n, n)
    for b in c.blocks:
        if b.role is Role.ANCILLA:
            continue
        base = interaction_steps(c, b.name, 0)
        for j in range(n):
            assert interaction_steps(c, b.name, j) == [t + j for t in base]


def test_cnot_exposure_metadata():
    n, r1, r2, r = 5, 3, 7, 5
    c = build_cnot(n, r1, r2, r)
    coeffs = {lm.label: lm.exposure_coeff for lm in c.logical_measurements}
    assert coeffs == {"MZZ": 2 * n + 2, "MZZZ": 3 * n + 2,
                      "MX_CTRL": r + r1 + r2 + 2, "MX_TGT": r + r2 + 2}


def test_cnot_control_block_sees_both_measurements():
    c = build_cnot(3, 3, 3, 3)
    assert len(interaction_steps(c, "in_c", 0)) == 6
    assert len(interaction_steps(c, "in_t", 0)) == 3


# ---------------------------------------------------------------------------
# Bell pair preparation and Bell measurement
# ---------------------------------------------------------------------------

def test_bell_prep_paper_point():
    c = build_bell_prep(7, 5)
    s = schedule_stats(c)
    block_preps = sum(1 for op in c.ops if op.kind is OpKind.PREP_PLUS
                      and op.operands[0][0] != "anc")
    assert s.cphase_count == 70 and block_preps == 14
    assert s.prep_count == 14 + 5        # the 5 ancillas are prepared too


def test_bell_prep_degenerate():
    assert schedule_stats(build_bell_prep(1, 1)).cphase_count == 2


def test_bell_prep_vote_and_flag_slot():
    c = build_bell_prep(3, 3)
    assert schedule_stats(c).cphase_count == 18
    (lm,) = c.logical_measurements
    assert lm.arity == 3 and lm.postselect


def test_bell_meas_structure():
    c = build_bell_meas(3, 3, 3)
    labels = [lm.label for lm in c.logical_measurements]
    assert labels == ["MZZ", "MZZZ", "MX_PAIR_C", "MX_PAIR_T"]
    zl_type = [lm for lm in c.logical_measurements if lm.label.startswith("MZZ")]
    assert len(zl_type) == 2
    for lm in c.logical_measurements:
        if lm.label.startswith("MX_PAIR"):
            assert len(lm.constituent_groups) == 2
            assert all(len(g) == 3 for g in lm.constituent_groups)


def test_bell_meas_cphase_counts():
    assert schedule_stats(build_bell_meas(1, 1, 1)).cphase_count == 5
    assert schedule_stats(build_bell_meas(3, 3, 3)).cphase_count == 45


# ---------------------------------------------------------------------------
# validation and audit
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("builder,args", [
    (build_meas_zl, (4, 3)), (build_meas_zl, (3, 2)), (build_meas_zl, (0, 1)),
    (build_meas_zl, (3, -1)), (build_error_correction, (2, 3)),
    (build_cnot, (3, 3, 4, 3)), (build_cnot, (3, 0, 3, 3)),
    (build_bell_prep, (3, 2)), (build_bell_meas, (6, 3, 3)),
])
def test_builders_reject_even_or_nonpositive(builder, args):
    with pytest.raises(ValueError):
        builder(*args)


@pytest.mark.parametrize("make", [
    lambda: build_meas_zl(5, 7),
    lambda: build_error_correction(5, 5),
    lambda: build_cnot(5, 3, 7, 5),
    lambda: build_cnot(3, 7, 3, 5),
    lambda: build_bell_prep(7, 3),
    lambda: build_bell_meas(5, 5, 5),
])
def test_builders_pass_wellformedness_audit(make):
    validate_circuit(make())  # raises on double-booking or lifetime breaks


def test_audit_catches_double_booking():
    blocks = (BlockSpec("a", 2, Role.IO),)
    ops = (Operation(OpKind.MEAS_X, (("a", 0),), 0),
           Operation(OpKind.MEAS_X, (("a", 0),), 0))
    with pytest.raises(ValueError, match="double-booked"):
        validate_circuit(GadgetCircuit(GadgetKind.MEAS_ZL, 2, {}, blocks, ops, ()))


def test_audit_catches_unmeasured_ancilla():
    blocks = (BlockSpec("a", 1, Role.IO), BlockSpec("anc", 1, Role.ANCILLA))
    ops = (Operation(OpKind.PREP_PLUS, (("anc", 0),), 0),
           Operation(OpKind.CPHASE, (("anc", 0), ("a", 0)), 1))
    with pytest.raises(ValueError, match="lifetime"):
        validate_circuit(GadgetCircuit(GadgetKind.MEAS_ZL, 1, {}, blocks, ops, ()))


def test_operation_invariants():
    with pytest.raises(ValueError):
        Operation(OpKind.CPHASE, (("a", 0),), 0)
    with pytest.raises(ValueError):
        Operation(OpKind.CPHASE, (("a", 0), ("a", 0)), 0)
    with pytest.raises(ValueError):
        Operation(OpKind.MEAS_X, (("a", 0),), -1)


def test_text_export_format():
    line = build_cnot(3, 3, 3, 3).to_text().splitlines()[1]
    step, kind, *addrs = line.split()
    assert step.isdigit() and kind in {"PrepPlus", "Cphase", "MeasX"}
    assert all("." in a for a in addrs)
