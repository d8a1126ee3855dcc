"""Exact distributional quantities for the sparse-plus-noise power model.

The squared magnitude of one noisy Bernoulli complex Gaussian entry is a
two-component exponential mixture; its CDF is

    F(z) = (1 - p)(1 - exp(-z / N0)) + p (1 - exp(-z / (N0 + Eh))).

This module evaluates that CDF, finds its exact median by bisection, and
forms the two-sided certificate that brackets the true noise power
around (median / log 2):

    median / min(log((2-2p)/(1-2p)), log(2) (1+SNR))
        <= N0 <= (median / log 2) ((1-p) + p^2 / (p + SNR)),

valid whenever the activity rate satisfies
p <= (1/2 - e^-2)/(1 - e^-2) ~= 0.4217. The first upper bound on the
median additionally requires p < 1/2 and is excluded from the min
otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import LOG2, BcgParams

# Largest activity rate for which the two-sided certificate is valid.
ACTIVITY_RATE_LIMIT = (0.5 - math.exp(-2.0)) / (1.0 - math.exp(-2.0))

_BISECTION_TOL = 1e-12


class BoundViolationError(RuntimeError):
    """The certificate failed to bracket the true noise power (a code bug)."""


@dataclass(frozen=True)
class BoundCheck:
    """Exact power median with its noise-power certificate for one model."""

    params: BcgParams
    median_exact: float
    lower_bound_n0: float
    upper_bound_n0: float
    condition_p_ok: bool
    lemma2_ub: float  # NaN when p >= 1/2 (bound undefined)
    lemma3_ub: float
    lemma4_lb: float


def power_cdf(z, params: BcgParams):
    """CDF of the squared magnitude of one noisy sparse-model entry."""
    z = np.asarray(z, dtype=np.float64)
    p = params.activity_rate
    n0 = params.noise_power
    slow = n0 + params.active_power
    out = (1.0 - p) * (1.0 - np.exp(-z / n0)) + p * (1.0 - np.exp(-z / slow))
    return out if out.ndim else float(out)


def exact_power_median(params: BcgParams) -> float:
    """Unique root of F(m) = 1/2, found by bisection to 1e-12 absolute.

    The CDF is strictly increasing, F(0) = 0, and the mixture median never
    exceeds the slow component's median (N0 + Eh) log 2, so the bracket
    [0, (N0 + Eh) log 2 + 1] always contains the root.
    """
    lo = 0.0
    hi = (params.noise_power + params.active_power) * LOG2 + 1.0
    while hi - lo > _BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if power_cdf(mid, params) < 0.5:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def n0_bounds_from_median(median: float, p: float, snr: float):
    """Noise-power bracket implied by a (sample or exact) power median."""
    if p < 0.5:
        lemma2 = math.log((2.0 - 2.0 * p) / (1.0 - 2.0 * p))
    else:
        lemma2 = math.inf  # undefined; excluded from the min
    denom = min(lemma2, LOG2 * (1.0 + snr))
    lower = median / denom
    upper = (median / LOG2) * ((1.0 - p) + p * p / (p + snr))
    return lower, upper


def theorem1_bounds(params: BcgParams) -> BoundCheck:
    """Exact power median plus the noise-power certificate for one model."""
    p = params.activity_rate
    snr = params.snr
    n0 = params.noise_power
    median = exact_power_median(params)
    lower, upper = n0_bounds_from_median(median, p, snr)
    if p < 0.5:
        lemma2_ub = n0 * math.log((2.0 - 2.0 * p) / (1.0 - 2.0 * p))
    else:
        lemma2_ub = math.nan
    lemma3_ub = LOG2 * (n0 + params.signal_power)
    lemma4_lb = LOG2 * n0 / ((1.0 - p) + p * p / (p + snr))
    return BoundCheck(params=params, median_exact=median,
                      lower_bound_n0=lower, upper_bound_n0=upper,
                      condition_p_ok=p <= ACTIVITY_RATE_LIMIT,
                      lemma2_ub=lemma2_ub, lemma3_ub=lemma3_ub,
                      lemma4_lb=lemma4_lb)


@dataclass(frozen=True)
class SandwichReport:
    checks: tuple
    max_violation: float


def verify_sandwich(grid, tol: float = 1e-10) -> SandwichReport:
    """Check lower <= N0 <= upper at every grid point using the exact median.

    Every supplied model must satisfy the activity-rate condition; a
    violation beyond ``tol`` signals an implementation bug and raises
    :class:`BoundViolationError`.
    """
    checks = []
    worst = 0.0
    for params in grid:
        chk = theorem1_bounds(params)
        if not chk.condition_p_ok:
            raise ValueError(
                f"activity rate {params.activity_rate} exceeds the "
                f"certificate's validity limit {ACTIVITY_RATE_LIMIT:.4f}")
        n0 = params.noise_power
        violation = max(chk.lower_bound_n0 - n0, n0 - chk.upper_bound_n0, 0.0)
        worst = max(worst, violation)
        checks.append(chk)
    if worst > tol:
        raise BoundViolationError(
            f"noise-power certificate violated by {worst:.3e} (tol {tol:.1e})")
    return SandwichReport(checks=tuple(checks), max_violation=worst)
