"""Shared helpers for the test suite."""

import numpy as np

from blindsnr import BcgParams, RngStream, add, sample_bcg, sample_noise


def bcg_params(dim, p, snr, n0=1.0):
    """Model parameters from (p, SNR, N0); per-entry active power follows."""
    return BcgParams(dim=dim, activity_rate=p, active_power=snr * n0 / p,
                     noise_power=n0)


def draw_observation(params, seed, trial):
    """One (signal, noise, observation) triple from a per-trial stream."""
    st = RngStream(seed, trial)
    s = sample_bcg(params, st)
    n = sample_noise(params.noise_power, params.dim, st)
    return s, n, add(s, n)


def empirical_cdf_at(samples, z):
    return float(np.mean(np.asarray(samples) <= z))
