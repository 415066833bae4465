"""Failure bounds and Pauli-frame simulation for repetition-code gadgets
built from CPHASE gates under biased dephasing noise."""

from .bounds import (BoundReport, CodeParams, ExternalConstants,
                     ThresholdResult, cnot_failure_bound, effective_noise,
                     flagged_bounds, injection_bound, optimize_threshold,
                     sweep_effective_noise)
from .gadgets import (GadgetCircuit, GadgetKind, LogicalMeasurement, Operation,
                      OpKind, Role, ScheduleStats, build_bell_meas,
                      build_bell_prep, build_cnot, build_error_correction,
                      build_meas_zl, schedule_stats, validate_circuit)
from .noise import (FaultClass, FaultEvent, FaultPath, NoiseConfig,
                    NoiseParams, fault_path_probability, iter_fault_paths,
                    load_noise_config, sample_fault_path)
from .pauli import (LogicalKind, LogicalOperator, PauliFrame, PauliOp,
                    compose, cphase_conjugate, outcome_flip)
from .simulator import (GuardExceededError, SimResult, Transcript,
                        enumerate_exact, estimate_failure,
                        estimate_failure_for, judge_failure, majority,
                        max_faults_for_tail, propagate, wilson_interval)

__version__ = "0.1.0"

__all__ = [
    "BoundReport", "CodeParams", "ExternalConstants", "FaultClass",
    "FaultEvent", "FaultPath", "GadgetCircuit", "GadgetKind",
    "GuardExceededError", "LogicalKind", "LogicalMeasurement",
    "LogicalOperator", "NoiseConfig", "NoiseParams", "Operation", "OpKind",
    "PauliFrame", "PauliOp", "Role", "ScheduleStats", "SimResult",
    "ThresholdResult", "Transcript", "build_bell_meas", "build_bell_prep",
    "build_cnot", "build_error_correction", "build_meas_zl",
    "cnot_failure_bound", "compose", "cphase_conjugate", "effective_noise",
    "enumerate_exact", "estimate_failure", "estimate_failure_for",
    "fault_path_probability", "flagged_bounds", "injection_bound",
    "iter_fault_paths", "judge_failure", "load_noise_config", "majority",
    "max_faults_for_tail", "optimize_threshold", "outcome_flip", "propagate",
    "sample_fault_path", "schedule_stats", "sweep_effective_noise",
    "validate_circuit", "wilson_interval",
]
