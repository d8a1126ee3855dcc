"""Complex soft-thresholding, its risk estimate, and the adaptive threshold search.

The soft threshold shrinks each entry's magnitude by tau (zeroing entries
below tau) while preserving phase. For Gaussian noise of known power, the
unbiased risk estimate of the resulting MSE is

    SURE(tau) = (1/D) sum_d min(|y_d|^2, tau^2) - n0
                + (n0/D) sum_{|y_d| > tau} (2 - tau/|y_d|).

Entries with |y_d| exactly equal to tau count as below threshold
(divergence 0); this matches max(|y_d| - tau, 0) = 0 and makes the
minimum of SURE attained. Note SURE drops by exactly n0/D as tau crosses
each magnitude from below (the divergence term of the crossing entry
falls from 1 to 0), so the minimizer typically sits exactly on a sorted
magnitude; the search below therefore evaluates every inter-order-
statistic stationary point clamped to its interval, plus tau = 0 and the
zero-map candidate, all in closed form after one sort: O(D log D) total.

The fully blind variant reuses the same sorted array to form the
median-based noise estimate, so a single sort serves both jobs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ComplexVector, abs_squared
from .estimators import (
    MseEstimate,
    NoisePowerEstimate,
    SignalPowerEstimate,
    SnrEstimate,
    estimate_mse,
    estimate_signal_power,
    estimate_snr,
    noise_power_from_sorted,
)


@dataclass(frozen=True)
class ThresholdSearchResult:
    """Outcome of the adaptive threshold search.

    ``sure_at_tau`` is minimal over every candidate examined;
    ``candidates_evaluated`` counts them. ``tau_star`` lies in
    [0, max |y_d|]; the zero-map case is reported as tau_star = max |y_d|
    (any larger threshold acts identically).
    """

    tau_star: float
    sure_at_tau: float
    n0_used: float
    candidates_evaluated: int


def _magnitudes(y: ComplexVector) -> np.ndarray:
    # sqrt(re^2 + im^2) everywhere, so threshold comparisons are bit-identical
    # across the evaluate / risk / search paths.
    return np.sqrt(abs_squared(y))


def soft_threshold(y: ComplexVector, tau: float) -> ComplexVector:
    """Entrywise (y_d/|y_d|) * max(|y_d| - tau, 0), with 0 mapped to 0."""
    if tau < 0.0:
        raise ValueError("tau must be non-negative")
    r = _magnitudes(y)
    keep = r > tau
    scale = np.zeros_like(r)
    scale[keep] = 1.0 - tau / r[keep]
    out = y.values * scale
    return ComplexVector(out.real, out.imag)


class DenoiserFunction:
    """Entrywise denoising map bundled with its divergence evaluator.

    Supported kinds: ``identity``, ``zero``, and ``soft_threshold`` with a
    fixed non-negative tau. The divergence is the entrywise
    dRe f/dRe y + dIm f/dIm y required by the risk estimate; for the soft
    threshold it is 0 below (or at) the threshold and 2 - tau/|y_d| above.
    """

    KINDS = ("identity", "zero", "soft_threshold")

    __slots__ = ("kind", "tau")

    def __init__(self, kind: str, tau: float | None = None):
        if kind not in self.KINDS:
            raise ValueError(f"unknown denoiser kind {kind!r}")
        if kind == "soft_threshold":
            if tau is None or tau < 0.0:
                raise ValueError("soft_threshold requires tau >= 0")
            tau = float(tau)
        elif tau is not None:
            raise ValueError(f"{kind} takes no tau parameter")
        self.kind = kind
        self.tau = tau

    @classmethod
    def identity(cls) -> "DenoiserFunction":
        return cls("identity")

    @classmethod
    def zero(cls) -> "DenoiserFunction":
        return cls("zero")

    @classmethod
    def soft(cls, tau: float) -> "DenoiserFunction":
        return cls("soft_threshold", tau)

    def evaluate(self, y: ComplexVector) -> ComplexVector:
        if self.kind == "identity":
            return y
        if self.kind == "zero":
            return ComplexVector(np.zeros(y.dim), np.zeros(y.dim))
        return soft_threshold(y, self.tau)

    def divergence(self, y: ComplexVector) -> np.ndarray:
        if self.kind == "identity":
            return np.full(y.dim, 2.0)
        if self.kind == "zero":
            return np.zeros(y.dim)
        r = _magnitudes(y)
        above = r > self.tau
        div = np.zeros(y.dim)
        div[above] = 2.0 - self.tau / r[above]
        return div

    def __repr__(self) -> str:
        if self.kind == "soft_threshold":
            return f"DenoiserFunction(soft_threshold, tau={self.tau})"
        return f"DenoiserFunction({self.kind})"


def sure_of_threshold(y: ComplexVector, tau: float, n0: float) -> float:
    """Risk estimate of the soft threshold at tau, in closed form.

    Agrees with :func:`blindsnr.estimators.estimate_mse` applied to the
    corresponding soft-threshold denoiser up to rounding.
    """
    if tau < 0.0:
        raise ValueError("tau must be non-negative")
    if not n0 > 0.0:
        raise ValueError("n0 must be positive")
    z = abs_squared(y)
    r = np.sqrt(z)
    d = y.dim
    # classify in magnitude space (r > tau), exactly as the threshold and
    # the search do, so a tau sitting on a magnitude is "below" everywhere
    above = r > tau
    term1 = float(np.minimum(z, tau * tau).sum()) / d
    div = float((2.0 - tau / r[above]).sum())
    return term1 - n0 + n0 * div / d


def _sure_from_sorted(taus: np.ndarray, rs: np.ndarray, prefix_z: np.ndarray,
                      suffix_recip: np.ndarray, n0: float) -> np.ndarray:
    """Exact SURE at each tau given ascending magnitudes and prefix sums."""
    d = rs.size
    j = np.searchsorted(rs, taus, side="right")  # entries <= tau: below
    above = (d - j).astype(np.float64)
    return (prefix_z[j] + above * taus * taus) / d - n0 \
        + (n0 / d) * (2.0 * above - taus * suffix_recip[j])


def _search_sorted_magnitudes(rs: np.ndarray, n0: float) -> ThresholdSearchResult:
    d = rs.size
    z = rs * rs
    prefix_z = np.concatenate(([0.0], np.cumsum(z)))
    recip = np.zeros(d)
    nz = rs > 0
    recip[nz] = 1.0 / rs[nz]
    suffix_recip = np.concatenate((np.cumsum(recip[::-1])[::-1], [0.0]))

    # For tau in [rs[k-1], rs[k]) exactly k entries sit below threshold;
    # the above-set has c = d - k entries and the smooth piece is minimized
    # at tau = n0 * S / (2 c) with S the reciprocal sum over the above-set.
    k = np.arange(d)
    c = (d - k).astype(np.float64)
    s_above = suffix_recip[:d]
    tau_raw = n0 * s_above / (2.0 * c)
    lower = np.concatenate(([0.0], rs[:-1]))
    stationary = np.clip(tau_raw, lower, rs)

    taus = np.concatenate(([0.0], stationary, rs[-1:]))
    sures = _sure_from_sorted(taus, rs, prefix_z, suffix_recip, n0)
    best = np.lexsort((taus, sures))[0]  # ties resolved toward smaller tau
    return ThresholdSearchResult(tau_star=float(taus[best]),
                                 sure_at_tau=float(sures[best]),
                                 n0_used=float(n0),
                                 candidates_evaluated=int(taus.size))


def search_threshold(y: ComplexVector, n0: float) -> ThresholdSearchResult:
    """Minimize the soft-threshold risk estimate over tau >= 0.

    Sorts the magnitudes once and evaluates, in closed form, the clamped
    stationary point of every inter-order-statistic interval plus tau = 0
    and the zero-map candidate; total cost O(D log D).
    """
    if not n0 > 0.0:
        raise ValueError("n0 must be positive")
    rs = np.sort(_magnitudes(y))
    return _search_sorted_magnitudes(rs, n0)


def denoise_blind(y: ComplexVector):
    """Soft-threshold denoising with both parameters learned from y alone.

    A single sort of |y|^2 yields the median-based noise power estimate
    and (after a square root) the sorted magnitudes for the threshold
    search. Returns (denoised vector, search result, noise estimate),
    mutually consistent.

    A zero noise estimate (at least half the entries exactly zero) carries
    no usable noise information, so the input is returned unchanged with
    tau = 0.
    """
    zs = np.sort(abs_squared(y))
    noise = noise_power_from_sorted(zs)
    if noise.value <= 0.0:
        degenerate = ThresholdSearchResult(tau_star=0.0, sure_at_tau=0.0,
                                           n0_used=0.0, candidates_evaluated=0)
        return y, degenerate, noise
    search = _search_sorted_magnitudes(np.sqrt(zs), noise.value)
    return soft_threshold(y, search.tau_star), search, noise


@dataclass(frozen=True)
class EstimateReport:
    """The four blind estimates for one observation, plus the denoiser state."""

    noise: NoisePowerEstimate
    signal: SignalPowerEstimate
    snr: SnrEstimate
    mse: MseEstimate
    search: ThresholdSearchResult
    denoised: ComplexVector


def blind_report(y: ComplexVector) -> EstimateReport:
    """Run the full blind pipeline on one observation (single sort).

    The MSE estimate uses the adaptively selected threshold; the SNR and
    signal power chain on the clipped noise estimate.
    """
    denoised, search, noise = denoise_blind(y)
    signal = estimate_signal_power(y, noise.value)
    if noise.value > 0.0:
        snr = estimate_snr(y, noise.value)
        mse = estimate_mse(y, DenoiserFunction.soft(search.tau_star), noise.value)
    else:
        snr = SnrEstimate(value=0.0, raw=0.0)
        mse = MseEstimate(value=0.0, raw_sure=0.0, divergence_sum=0.0)
    return EstimateReport(noise=noise, signal=signal, snr=snr, mse=mse,
                          search=search, denoised=denoised)
