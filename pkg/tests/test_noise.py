import math

import numpy as np
import pytest
from scipy.stats import chisquare

from bft import (FaultClass, FaultEvent, FaultPath, NoiseParams, PauliOp,
                 build_meas_zl, fault_path_probability, iter_fault_paths,
                 load_noise_config, sample_fault_path)
from bft.gadgets import OpKind
from bft.noise import (DEPHASING_PAULIS, NON_DEPHASING_PAULIS, uniform_field)

from helpers import single_cphase_circuit, single_meas_circuit


def test_params_invariants():
    NoiseParams(0.1, 0.01)
    with pytest.raises(ValueError):
        NoiseParams(0.1, 0.2)        # eps' > eps
    with pytest.raises(ValueError):
        NoiseParams(-0.1, 0.0)
    with pytest.raises(ValueError):
        NoiseParams(0.6, 0.5)        # eps + eps' > 1
    assert NoiseParams(0.1, 0.0).bias == math.inf
    assert NoiseParams.from_bias(1e-2, 1e3).epsilon_prime == pytest.approx(1e-5)


def test_pauli_tables():
    assert len(NON_DEPHASING_PAULIS) == 12
    assert all(x1 or x2 for x1, _, x2, _ in NON_DEPHASING_PAULIS)
    assert DEPHASING_PAULIS == ((0, 1, 0, 0), (0, 0, 0, 1), (0, 1, 0, 1))


def test_zero_noise_gives_empty_path():
    c = build_meas_zl(3, 3)
    for seed in (0, 1, 99):
        assert len(sample_fault_path(c, NoiseParams(0.0, 0.0), seed)) == 0


def test_saturated_dephasing_faults_everything():
    c = build_meas_zl(3, 3)
    fp = sample_fault_path(c, NoiseParams(1.0, 0.0), seed=4)
    assert len(fp) == len(c.ops)
    for event in fp.events:
        kind = c.ops[event.location].kind
        if kind is OpKind.CPHASE:
            assert event.fault_class is FaultClass.DEPHASING
        elif kind is OpKind.PREP_PLUS:
            assert event.fault_class is FaultClass.PREP_FLIP
        else:
            assert event.fault_class is FaultClass.MEAS_FLIP


def test_sampling_is_deterministic():
    c = build_meas_zl(3, 3)
    p = NoiseParams.from_bias(0.05, 10)
    for trial in (0, 7):
        a = sample_fault_path(c, p, seed=123, trial=trial)
        b = sample_fault_path(c, p, seed=123, trial=trial)
        assert a == b
    assert (sample_fault_path(c, p, seed=123)
            != sample_fault_path(c, p, seed=124))


def test_probability_empty_path():
    c = build_meas_zl(1, 1)   # one prep, one cphase, one meas
    p = NoiseParams(0.25, 0.05)
    expected = (1 - 0.25) * (1 - 0.25 - 0.05) * (1 - 0.25)
    assert fault_path_probability(FaultPath(()), c, p) == pytest.approx(expected)


def test_probability_single_meas_flip():
    c = single_meas_circuit()
    p = NoiseParams(0.1, 0.0)
    fp = FaultPath((FaultEvent(0, FaultClass.MEAS_FLIP),))
    assert fault_path_probability(fp, c, p) == pytest.approx(0.1)


def test_probability_single_dephasing_on_cphase():
    # hand product over the one location: eps/3 and no other factors
    c = single_cphase_circuit()
    p = NoiseParams(0.3, 0.1)
    fp = FaultPath((FaultEvent(0, FaultClass.DEPHASING,
                               (PauliOp(False, True), PauliOp(False, False))),))
    assert fault_path_probability(fp, c, p) == pytest.approx(0.1)


def test_probability_rejects_unknown_location():
    c = single_meas_circuit()
    fp = FaultPath((FaultEvent(5, FaultClass.MEAS_FLIP),))
    with pytest.raises(ValueError):
        fault_path_probability(fp, c, NoiseParams(0.1, 0.0))


def test_probabilities_sum_to_one_over_complete_enumeration():
    c = build_meas_zl(1, 1)   # 3 locations
    p = NoiseParams(0.2, 0.05)
    total = sum(fault_path_probability(fp, c, p) for fp in iter_fault_paths(c, p))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_local_stochastic_biased_bound_is_tight():
    """Marginal probability of faults at r chosen locations, s designated
    non-dephasing, equals eps^(r-s) * eps'^s under independence."""
    c = build_meas_zl(1, 1)   # locations: prep=0, cphase=1, meas=2
    p = NoiseParams(0.2, 0.05)

    def marginal(required, designated_nd):
        total = 0.0
        for fp in iter_fault_paths(c, p):
            by_loc = {e.location: e for e in fp.events}
            ok = True
            for loc in required:
                e = by_loc.get(loc)
                if e is None:
                    ok = False
                    break
                is_nd = e.fault_class is FaultClass.NON_DEPHASING
                if is_nd != (loc in designated_nd):
                    ok = False
                    break
            if ok:
                total += fault_path_probability(fp, c, p)
        return total

    assert marginal({0, 2}, set()) == pytest.approx(0.2 ** 2, abs=1e-12)
    assert marginal({1}, {1}) == pytest.approx(0.05, abs=1e-12)
    assert marginal({0, 1, 2}, {1}) == pytest.approx(0.2 ** 2 * 0.05, abs=1e-12)
    assert marginal({0, 1, 2}, set()) == pytest.approx(0.2 ** 3, abs=1e-12)


def test_classification_frequencies_chi_square():
    """Empirical (none, dephasing, non-dephasing) frequencies at a CPHASE
    location match (1-eps-eps', eps, eps') at 1e6 samples."""
    eps, epsp = 0.05, 0.01
    u = uniform_field(2024, np.arange(1_000_000), 0, 0, 1)
    nd = int((u < epsp).sum())
    d = int(((u >= epsp) & (u < epsp + eps)).sum())
    clean = u.size - nd - d
    stat, pvalue = chisquare([clean, d, nd],
                             [u.size * (1 - eps - epsp), u.size * eps, u.size * epsp])
    assert pvalue > 1e-4


def test_uniform_field_statistics():
    u = uniform_field(7, np.arange(200_000), 3, 1, 10)
    assert 0.0 <= u.min() and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 5e-3
    # distinct seeds decorrelate
    v = uniform_field(8, np.arange(200_000), 3, 1, 10)
    assert abs(np.corrcoef(u, v)[0, 1]) < 1e-2


def test_event_validation():
    with pytest.raises(ValueError):
        FaultEvent(0, FaultClass.DEPHASING,
                   (PauliOp(True, False), PauliOp(False, False)))
    with pytest.raises(ValueError):
        FaultEvent(0, FaultClass.NON_DEPHASING,
                   (PauliOp(False, True), PauliOp(False, True)))
    with pytest.raises(ValueError):
        FaultEvent(0, FaultClass.PREP_FLIP, (PauliOp(True, False),))
    with pytest.raises(ValueError):
        FaultEvent(0, FaultClass.MEAS_FLIP, (PauliOp(False, True),))
    with pytest.raises(ValueError):
        FaultPath((FaultEvent(0, FaultClass.MEAS_FLIP),
                   FaultEvent(0, FaultClass.MEAS_FLIP)))


def test_noise_config_file(tmp_path):
    path = tmp_path / "noise.cfg"
    path.write_text("# comment\nepsilon = 2.5e-3\nbias = 1e4\nseed = 42\n")
    cfg = load_noise_config(str(path))
    assert cfg.epsilon == 2.5e-3 and cfg.bias == 1e4 and cfg.seed == 42
    assert cfg.params.epsilon_prime == pytest.approx(2.5e-7)
    bad = tmp_path / "bad.cfg"
    bad.write_text("epsilon 2.5e-3\n")
    with pytest.raises(ValueError):
        load_noise_config(str(bad))
    missing = tmp_path / "missing.cfg"
    missing.write_text("epsilon = 1e-3\n")
    with pytest.raises(ValueError):
        load_noise_config(str(missing))
