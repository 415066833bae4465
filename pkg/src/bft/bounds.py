"""Closed-form failure bounds for the CNOT gadget, the accuracy-threshold
optimizer over the block length, the effective-noise sweep, the state
injection budget, and the flagged (close-vote) refinements.

The CNOT gadget contains the most fundamental operations, so its bound is
the effective noise strength of all the protected operations.  Binomial
coefficients are exact integers; for large majority exponents the terms are
combined in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .noise import NoiseParams

_LOG_SPACE_EXPONENT = 30


@dataclass(frozen=True)
class CodeParams:
    """Block length and repetition counts; all odd, with r bounded by the
    larger measurement repetition count."""

    n: int
    r1: int
    r2: int
    r: int
    t: int = 1

    def __post_init__(self) -> None:
        for name in ("n", "r1", "r2", "r", "t"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1 or v % 2 == 0:
                raise ValueError(f"{name} must be a positive odd integer, got {v!r}")
        if self.r > max(self.r1, self.r2):
            raise ValueError("require r <= max(r1, r2)")

    @classmethod
    def uniform(cls, n: int, t: int = 1) -> "CodeParams":
        return cls(n=n, r1=n, r2=n, r=n, t=t)


@dataclass(frozen=True)
class BoundReport:
    """The five component bounds and their totals."""

    eps_nd: float
    eps_mzz: float
    eps_mzzz: float
    eps_mx1: float
    eps_mx2: float

    @property
    def eps_d(self) -> float:
        return self.eps_mzz + self.eps_mzzz + self.eps_mx1 + self.eps_mx2

    @property
    def eps_total(self) -> float:
        return self.eps_nd + self.eps_d

    def to_json_dict(self) -> dict:
        return {
            "eps_nd": self.eps_nd,
            "eps_mzz": self.eps_mzz,
            "eps_mzzz": self.eps_mzzz,
            "eps_mx1": self.eps_mx1,
            "eps_mx2": self.eps_mx2,
            "eps_d": self.eps_d,
            "eps_total": self.eps_total,
        }


@dataclass(frozen=True)
class ExternalConstants:
    """Results imported from the outer-code and distillation analyses."""

    eps_th_css: float = 0.67e-3
    eps_decode: float = 8.24e-2
    distill_threshold: float = 0.141


@dataclass(frozen=True)
class ThresholdResult:
    eps_max: float
    best_params: CodeParams
    target: float
    diagnostic: str = ""
    per_n: dict = field(default_factory=dict, compare=False)

    def to_json_dict(self) -> dict:
        return {
            "eps_max": self.eps_max,
            "n": self.best_params.n,
            "r1": self.best_params.r1,
            "r2": self.best_params.r2,
            "r": self.best_params.r,
            "target": self.target,
            "diagnostic": self.diagnostic,
        }


def _majority_term(reps: int, per_location: float) -> float:
    """C(reps, (reps+1)/2) * per_location^((reps+1)/2), log-space for deep votes."""
    k = (reps + 1) // 2
    comb = math.comb(reps, k)
    if per_location <= 0.0:
        return 0.0
    if k > _LOG_SPACE_EXPONENT:
        return math.exp(math.log(comb) + k * math.log(per_location))
    return comb * per_location ** k


def cnot_failure_bound(cp: CodeParams, p: NoiseParams) -> BoundReport:
    """Component failure bounds for the CNOT gadget.

    A non-dephasing CPHASE fault anywhere in the gadget, or propagating in
    from the preceding gadget's exposure window, is assumed fatal.  Each
    repeated measurement fails only if a majority of its repetitions are
    flipped, each flip requiring a fault among the ancilla's exposure_coeff
    locations; each destructive X measurement fails only if a majority of the
    block's qubits are hit.
    """
    n, r1, r2, r = cp.n, cp.r1, cp.r2, cp.r
    eps, epsp = p.epsilon, p.epsilon_prime
    return BoundReport(
        eps_nd=(2 * r1 + 3 * r2 + 2 * r) * n * epsp,
        eps_mzz=_majority_term(r1, (2 * n + 2) * eps),
        eps_mzzz=_majority_term(r2, (3 * n + 2) * eps),
        eps_mx1=_majority_term(n, (r + r1 + r2 + 2) * eps),
        eps_mx2=_majority_term(n, (r + r2 + 2) * eps),
    )


def effective_noise(n, p: NoiseParams) -> float:
    """Effective noise strength at r1 = r2 = r = n:

        7 n^2 eps' + 2 C(n,(n+1)/2) [ (2n+2)^((n+1)/2) + (3n+2)^((n+1)/2) ] eps^((n+1)/2)

    ``n`` may also be a CodeParams; repetition counts differing from the
    block length are rejected.
    """
    if isinstance(n, CodeParams):
        cp = n
        if not cp.r1 == cp.r2 == cp.r == cp.n:
            raise ValueError("effective_noise requires r1 = r2 = r = n")
        n = cp.n
    if not isinstance(n, int) or n < 1 or n % 2 == 0:
        raise ValueError(f"n must be a positive odd integer, got {n!r}")
    dephasing = (_majority_term(n, (2 * n + 2) * p.epsilon)
                 + _majority_term(n, (3 * n + 2) * p.epsilon))
    return 7 * n * n * p.epsilon_prime + 2 * dephasing


def _max_epsilon(bound_at, target: float, rel_tol: float = 1e-4,
                 abs_tol: float = 5e-7) -> float:
    """Largest eps with bound_at(eps) <= target, by bisection.

    The bound is monotone non-decreasing in eps (every term has a
    non-negative eps derivative), which justifies bisection.  The returned
    value is feasible and within both tolerances of the infeasible edge.
    """
    if bound_at(0.0) > target:
        return 0.0
    lo, hi = 0.0, 1e-6
    while bound_at(hi) <= target:
        lo = hi
        hi *= 2.0
        if hi >= 1.0:
            return 1.0
    for _ in range(200):
        if hi - lo <= abs_tol and hi - lo <= rel_tol * max(lo, 1e-300):
            break
        mid = (lo + hi) / 2.0
        if mid <= lo or mid >= hi:
            break
        if bound_at(mid) <= target:
            lo = mid
        else:
            hi = mid
    return lo


def optimize_threshold(bias: float, target: float = ExternalConstants.eps_th_css,
                       n_range=range(3, 42, 2),
                       full_grid: bool = False) -> ThresholdResult:
    """Largest tolerable eps, optimizing the block length (and, with
    ``full_grid``, the repetition counts over a window around each n with
    r = max(r1, r2)); eps' is eps/bias throughout.
    """
    if bias <= 0:
        raise ValueError("bias must be positive")
    if target < 0:
        raise ValueError("target must be non-negative")
    best_eps = 0.0
    best_cp = None
    per_n = {}
    for n in n_range:
        if full_grid:
            candidates = [CodeParams(n, r1, r2, max(r1, r2))
                          for r1 in range(max(1, n - 4), n + 5, 2)
                          for r2 in range(max(1, n - 4), n + 5, 2)]
        else:
            candidates = [CodeParams.uniform(n)]
        for cp in candidates:
            def bound_at(eps, cp=cp):
                return cnot_failure_bound(
                    cp, NoiseParams.from_bias(eps, bias)).eps_total
            eps_n = _max_epsilon(bound_at, target)
            per_n.setdefault(n, 0.0)
            per_n[n] = max(per_n[n], eps_n)
            if eps_n > best_eps:
                best_eps, best_cp = eps_n, cp
    if best_cp is None or best_eps == 0.0:
        return ThresholdResult(
            eps_max=0.0, best_params=CodeParams.uniform(min(n_range)),
            target=target, per_n=per_n,
            diagnostic="no feasible eps: target admits no noise at any n")
    return ThresholdResult(eps_max=best_eps, best_params=best_cp,
                           target=target, per_n=per_n)


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    bias: float
    n_opt: int
    eps1: float


def sweep_effective_noise(bias_list, eps_grid,
                          n_range=range(3, 42, 2)) -> list[SweepRow]:
    """Optimized effective noise over an (eps, bias) grid: for each point,
    the minimum over odd n of the effective noise strength."""
    bias_list = list(bias_list)
    eps_grid = list(eps_grid)
    if not bias_list or not eps_grid:
        raise ValueError("sweep grids must be non-empty")
    rows = []
    for bias in bias_list:
        for eps in eps_grid:
            p = NoiseParams.from_bias(eps, bias)
            eps1, n_opt = min((effective_noise(n, p), n) for n in n_range)
            rows.append(SweepRow(epsilon=eps, bias=bias, n_opt=n_opt, eps1=eps1))
    return rows


def injection_bound(cp: CodeParams, p: NoiseParams,
                    ext: ExternalConstants = ExternalConstants()) -> tuple[float, float, bool]:
    """State-injection error budget (Bell measurement plus recursive decoding).

    eps_bm collects: non-dephasing faults in the Bell measurement's own and
    the preceding gadget's CPHASE gates; dephasing on the bare measured qubit;
    majority failure of the repeated ZZ measurement (each ancilla is exposed
    at n+3 locations); and majority failure of the block X measurement (each
    qubit exposed at 2r+2 locations).  Passing means the total stays below
    the distillation threshold.
    """
    n, r = cp.n, cp.r
    eps, epsp = p.epsilon, p.epsilon_prime
    eps_bm = ((2 * r * n + r) * epsp
              + (1 + r) * eps
              + _majority_term(r, (n + 3) * eps)
              + _majority_term(n, (2 * r + 2) * eps))
    eps_inject = ext.eps_decode + eps_bm + eps
    return eps_bm, eps_inject, eps_inject < ext.distill_threshold


def flagged_bounds(n: int, r1: int, t: int, p: NoiseParams) -> tuple[float, float, float]:
    """Close-vote refinements for the repeated ZZ measurement.

    Returns (failure with a flag, failure without a flag, conditional failure
    of the t-fold postselected preparation measurement given acceptance).
    With a flag, (r1+1)/2 flipped repetitions suffice to fail; without one,
    (r1+3)/2 are needed.
    """
    for name, v in (("n", n), ("r1", r1), ("t", t)):
        if not isinstance(v, int) or v < 1 or v % 2 == 0:
            raise ValueError(f"{name} must be a positive odd integer, got {v!r}")
    eps, epsp = p.epsilon, p.epsilon_prime
    per_loc = (2 * n + 2) * eps
    eps_flag = _majority_term(r1, per_loc)
    k_noflag = (r1 + 3) // 2
    eps_noflag = math.comb(r1, k_noflag) * per_loc ** k_noflag
    k_num = (t + 3) // 2
    numerator = math.comb(t, k_num) * per_loc ** k_num + 2 * n * t * epsp
    k_den = (t - 1) // 2
    denominator = 1.0 - math.comb(t, k_den) * per_loc ** k_den - 2 * n * t * epsp
    if denominator <= 0.0:
        raise ValueError("rejection-dominated regime: acceptance bound is not positive")
    return eps_flag, eps_noflag, numerator / denominator
