"""Beamspace transform, synthetic channels, QAM mapping, and the pipelines."""

import math

import numpy as np
import pytest

from blindsnr import (
    ChannelConfig,
    ComplexVector,
    DenoisePipeline,
    RngStream,
    abs_squared,
    beamspace,
    gen_los_channel,
    inverse_beamspace,
    run_ber,
    run_denoise_pipeline,
    search_threshold,
    soft_threshold,
)
from blindsnr.channel import (
    channel_from_paths,
    qam16_demodulate,
    qam16_modulate,
    steering_vector,
)


class TestConfigValidation:
    def test_defaults(self):
        cfg = ChannelConfig()
        assert cfg.antennas == 128 and cfg.users == 8

    def test_power_of_two_required(self):
        with pytest.raises(ValueError):
            ChannelConfig(antennas=96)

    def test_variant_validation(self):
        with pytest.raises(ValueError):
            DenoisePipeline("magic")
        DenoisePipeline("beaches_blind")

    def test_profile_length(self):
        with pytest.raises(ValueError):
            ChannelConfig(paths_per_user=2, path_power_profile=(1.0,))


class TestSteeringAndBeamspace:
    def test_broadside_is_all_ones_and_one_sparse(self):
        a = steering_vector(0.0, 16)
        np.testing.assert_allclose(a.values, np.ones(16), atol=1e-15)
        x = beamspace(channel_from_paths([0.0], [1.0], 16))
        expected = np.zeros(16, dtype=complex)
        expected[0] = 4.0  # sqrt(16)
        np.testing.assert_allclose(x.values, expected, atol=1e-12)

    def test_roundtrip_identity(self):
        rng = np.random.default_rng(90)
        h = ComplexVector(rng.standard_normal(64), rng.standard_normal(64))
        back = inverse_beamspace(beamspace(h))
        np.testing.assert_allclose(back.values, h.values, atol=1e-12)

    def test_unit_basis_maps_to_flat_phase(self):
        e1 = ComplexVector([1.0] + [0.0] * 15, [0.0] * 16)
        x = beamspace(e1)
        np.testing.assert_allclose(np.abs(x.values), np.full(16, 1 / 4.0), atol=1e-12)
        assert abs(np.linalg.norm(x.values) - 1.0) <= 1e-10

    def test_parseval(self):
        rng = np.random.default_rng(91)
        for _ in range(20):
            h = ComplexVector(rng.standard_normal(128), rng.standard_normal(128))
            x = beamspace(h)
            assert abs(float(abs_squared(x).sum()) - float(abs_squared(h).sum())) <= 1e-10

    def test_non_power_of_two_rejected(self):
        h = ComplexVector(np.ones(12), np.zeros(12))
        with pytest.raises(ValueError):
            beamspace(h)

    def test_channel_power_normalization(self):
        cfg = ChannelConfig(antennas=128, users=8, paths_per_user=2)
        total = 0.0
        trials = 400
        for t in range(trials):
            for h in gen_los_channel(cfg, RngStream(92, t)):
                total += float(abs_squared(h).sum()) / cfg.antennas
        assert abs(total / (trials * cfg.users) - 1.0) <= 0.05

    def test_two_path_beamspace_concentration(self):
        # median over trials of the energy share of the 8 strongest bins
        cfg = ChannelConfig(antennas=128, users=1, paths_per_user=2)
        fracs = []
        for t in range(1000):
            h = gen_los_channel(cfg, RngStream(93, t))[0]
            e = abs_squared(beamspace(h))
            s = np.sort(e)[::-1]
            fracs.append(s[:8].sum() / e.sum())
        assert np.median(fracs) >= 0.9


class TestQam:
    def test_roundtrip_all_symbols(self):
        bits = np.array([[b0, b1, b2, b3]
                         for b0 in (0, 1) for b1 in (0, 1)
                         for b2 in (0, 1) for b3 in (0, 1)])
        symbols = qam16_modulate(bits)
        assert np.unique(symbols).size == 16
        np.testing.assert_allclose(np.mean(np.abs(symbols) ** 2), 1.0, atol=1e-12)
        np.testing.assert_array_equal(qam16_demodulate(symbols), bits)

    def test_gray_adjacency(self):
        # neighboring levels on one axis differ in exactly one bit
        levels = np.array([-3.0, -1.0, 1.0, 3.0]) / math.sqrt(10.0)
        bits = qam16_demodulate(levels + 1j * levels[0])
        for a, b in zip(bits[:-1, :2], bits[1:, :2]):
            assert int(np.sum(a != b)) == 1


class TestDenoisePipeline:
    CFG = ChannelConfig(antennas=128, users=8, paths_per_user=2)

    def test_perfect_csi_zero_mse(self):
        res = run_denoise_pipeline(self.CFG, "perfect_csi", 0.0, 20, RngStream(94))
        assert res["channel_mse"] == 0.0

    def test_ml_mse_matches_noise_power(self):
        trials = 300
        res = run_denoise_pipeline(self.CFG, "ml", 0.0, trials, RngStream(95))
        # |error|^2 per entry is exponential(n0): se of the mean follows
        se = 1.0 / math.sqrt(trials * self.CFG.users * self.CFG.antennas)
        assert abs(res["channel_mse"] - 1.0) <= 3 * se * 1.0 * 2

    def test_one_sparse_denoising_gain_at_zero_db(self):
        # exactly one strong beamspace bin: thresholding removes most of
        # the noise, landing far below the trivial estimate's n0
        d, n0 = 128, 1.0
        rng = np.random.default_rng(96)
        mses = []
        for _ in range(300):
            x = np.zeros(d, dtype=complex)
            x[rng.integers(d)] = math.sqrt(d)
            w = math.sqrt(n0 / 2) * (rng.standard_normal(d) + 1j * rng.standard_normal(d))
            y = ComplexVector((x + w).real, (x + w).imag)
            found = search_threshold(y, n0)
            err = soft_threshold(y, found.tau_star).values - x
            mses.append(float((err.real ** 2 + err.imag ** 2).sum()) / d)
        assert np.mean(mses) < 0.5 * n0

    def test_blind_tracks_known_at_low_and_mid_snr(self):
        base = RngStream(97)
        for snr_db in (-10.0, 0.0):
            known = run_denoise_pipeline(self.CFG, "beaches_known_n0", snr_db, 300, base)
            blind = run_denoise_pipeline(self.CFG, "beaches_blind", snr_db, 300, base)
            rel = abs(blind["channel_mse"] - known["channel_mse"]) / known["channel_mse"]
            assert rel <= 0.10

    def test_em_variant_runs_and_is_reasonable(self):
        base = RngStream(98)
        em = run_denoise_pipeline(self.CFG, "beaches_em", 0.0, 100, base)
        ml = run_denoise_pipeline(self.CFG, "ml", 0.0, 100, base)
        assert 0.0 < em["channel_mse"] < ml["channel_mse"]

    def test_deterministic_given_stream(self):
        a = run_denoise_pipeline(self.CFG, "beaches_blind", 0.0, 30, RngStream(99))
        b = run_denoise_pipeline(self.CFG, "beaches_blind", 0.0, 30, RngStream(99))
        assert a == b


class TestBer:
    CFG = ChannelConfig(antennas=128, users=8, paths_per_user=2)

    def test_perfect_csi_high_snr(self):
        res = run_ber(self.CFG, "perfect_csi", 30.0, 1000, RngStream(100))
        assert res["ber"] < 1e-3

    def test_monotone_in_snr(self):
        base = RngStream(101)
        bers = [run_ber(self.CFG, "ml", snr, 400, base)["ber"]
                for snr in (0.0, 10.0, 20.0)]
        bits = 400 * 4 * self.CFG.users
        for lo_snr, hi_snr in zip(bers[1:], bers[:-1]):
            se = math.sqrt(max(hi_snr * (1 - hi_snr), 1e-12) / bits)
            assert lo_snr <= hi_snr + se

    def test_variant_ordering_at_ten_db(self):
        base = RngStream(102)
        out = {v: run_ber(self.CFG, v, 10.0, 400, base)["ber"]
               for v in ("perfect_csi", "beaches_blind", "ml")}
        assert out["perfect_csi"] <= out["beaches_blind"] <= out["ml"]

    def test_deterministic_given_stream(self):
        a = run_ber(self.CFG, "ml", 10.0, 50, RngStream(103))
        b = run_ber(self.CFG, "ml", 10.0, 50, RngStream(103))
        assert a == b
