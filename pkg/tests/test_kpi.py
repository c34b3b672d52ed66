"""KPI tests: Monte-Carlo error rates, peak power, ambiguity metrics, overheads."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from mcwave import channel as ch
from mcwave import detection as det
from mcwave import kpi
from mcwave import waveforms as wf


def awgn_bundle(m=64):
    geo = wf.FrameGeometry(m=m, n=1, delta_f_hz=15e3, prefix_len=0)
    return wf.build_waveform("scm", geo)


class TestRunBer:
    def test_noiseless_identity_channel_is_error_free(self):
        c = det.qam_constellation(4)
        cfg = ch.ChannelConfig(preset="AWGN")
        pts = kpi.run_ber(awgn_bundle(), cfg, "single-tap", [300.0], trials=3,
                          seed=1, constellation=c)
        assert pts[0].bit_errors == 0
        assert pts[0].ber == 0.0

    def test_matches_closed_form_on_pure_noise(self):
        c = det.qam_constellation(4)
        cfg = ch.ChannelConfig(preset="AWGN")
        pts = kpi.run_ber(awgn_bundle(m=256), cfg, "single-tap", [0.0, 4.0, 8.0],
                          trials=120, seed=11, constellation=c)
        for p in pts:
            ana = kpi.awgn_qpsk_ber(p.snr_db)
            stderr = np.sqrt(ana * (1 - ana) / p.bits)
            assert abs(p.ber - ana) <= 3 * stderr

    def test_shared_seed_streams_identical_across_waveforms(self):
        # Same (seed, trial) must give identical bits and channel draws no
        # matter which bundle consumes them.
        c = det.qam_constellation(4)
        bits_a = kpi.derive_rng(7, 3, 0).integers(0, 2, 512)
        bits_b = kpi.derive_rng(7, 3, 0).integers(0, 2, 512)
        assert np.array_equal(bits_a, bits_b)
        cfg = ch.ChannelConfig(preset="EVA", nu_max_hz=1e3, random_gains=True, jakes=True)
        r1 = cfg.realize(3.072e6, 0.0, kpi.derive_rng(7, 3, 1))
        r2 = cfg.realize(3.072e6, 0.0, kpi.derive_rng(7, 3, 1))
        assert r1.taps == r2.taps

    def test_worker_count_invariance(self):
        c = det.qam_constellation(4)
        cfg = ch.ChannelConfig(preset="EVA", nu_max_hz=500.0, random_gains=True,
                               jakes=True)
        geo = wf.FrameGeometry(m=32, n=1, delta_f_hz=96e3, prefix_len=8)
        b = wf.build_waveform("ofdm", geo)
        serial = kpi.run_ber(b, cfg, "mmse", [5.0, 10.0], trials=12, seed=5,
                             constellation=c, workers=1)
        parallel = kpi.run_ber(b, cfg, "mmse", [5.0, 10.0], trials=12, seed=5,
                               constellation=c, workers=2)
        assert [(p.bit_errors, p.bits) for p in serial] == \
               [(p.bit_errors, p.bits) for p in parallel]

    def test_bad_trials_rejected(self):
        c = det.qam_constellation(4)
        with pytest.raises(wf.ConfigurationError):
            kpi.run_ber(awgn_bundle(), ch.ChannelConfig(), "mmse", [0.0], trials=0,
                        seed=1, constellation=c)


class TestPapr:
    def test_constant_envelope_is_zero_db(self):
        assert kpi.papr(np.exp(1j * np.linspace(0, 6, 50))) == pytest.approx(0.0, abs=1e-12)

    def test_two_sample_example(self):
        assert kpi.papr(np.array([1.0, 0.0])) == pytest.approx(10 * np.log10(2), abs=1e-9)

    def test_invariant_under_phase_and_scale(self):
        rng = np.random.default_rng(0)
        s = rng.standard_normal(128) + 1j * rng.standard_normal(128)
        a = kpi.papr(s)
        assert kpi.papr(3.7 * np.exp(0.3j) * s) == pytest.approx(a, abs=1e-12)

    def test_zero_power_rejected(self):
        with pytest.raises(ValueError):
            kpi.papr(np.zeros(4))

    def test_ccdf_floor_and_monotonicity(self):
        samples = np.arange(100, dtype=float)
        pts = kpi.papr_ccdf(samples, min_tail=10)
        levels = [p[1] for p in pts]
        assert min(levels) >= 10 / 100
        assert levels == sorted(levels, reverse=True)

    def test_quantile_lookup(self):
        samples = np.linspace(0, 10, 1001)
        assert kpi.papr_at_ccdf(samples, 0.5) == pytest.approx(5.0, abs=0.02)


class TestAmbiguity:
    def test_origin_value_is_signal_energy(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        g = kpi.ambiguity_grid(a, a, np.array([0.0]), np.array([0.0]), 1e6)
        assert g.peak_raw == pytest.approx(np.sum(np.abs(a) ** 2))

    def test_matched_shift_peak_location(self):
        rng = np.random.default_rng(2)
        fs = 1e6
        a = rng.standard_normal(128) + 1j * rng.standard_normal(128)
        l0, nu0 = 5, 2e3
        n = np.arange(128)
        b = np.roll(a, l0) * 0  # aperiodic delayed copy with zero fill
        b[l0:] = a[:-l0]
        b = b * np.exp(2j * np.pi * nu0 * n / fs)
        tau = np.arange(-8, 9) / fs
        nu = np.linspace(-4e3, 4e3, 41)
        g = kpi.ambiguity_grid(b, a, tau, nu, fs)
        i, j = np.unravel_index(np.argmax(g.magnitudes), g.magnitudes.shape)
        assert tau[j] == pytest.approx(l0 / fs)
        assert nu[i] == pytest.approx(nu0, abs=nu[1] - nu[0])

    def test_two_path_superposition_identity(self):
        # The matched-filter surface of a two-path received signal equals the
        # shifted/scaled sum of the transmit self-ambiguity:
        # sum_i h_i e^{-2j pi (nu - nu_i) tau_i} A(tau - tau_i, nu - nu_i).
        rng = np.random.default_rng(3)
        fs = 1e6
        L = 96
        a = rng.standard_normal(L) + 1j * rng.standard_normal(L)
        taps = [(0.8 - 0.1j, 2, 1.5e3), (-0.3 + 0.4j, 7, -3e3)]
        n = np.arange(L + 7)
        r = np.zeros(L + 7, dtype=complex)
        for h, l, nu in taps:
            seg = np.zeros(L + 7, dtype=complex)
            seg[l : l + L] = a
            r += h * seg * np.exp(2j * np.pi * nu * n / fs)
        tau = np.arange(0, 12) / fs
        nu_grid = np.linspace(-5e3, 5e3, 21)
        caf = kpi.ambiguity_grid(r, np.concatenate([a, np.zeros(7)]), tau, nu_grid, fs)
        # oracle: direct evaluation of the superposition formula
        a_pad = np.concatenate([a, np.zeros(7)])
        direct = np.zeros((nu_grid.size, tau.size), dtype=complex)
        for h, l, nu_i in taps:
            for ii, nu_v in enumerate(nu_grid):
                for jj, t_v in enumerate(tau):
                    lag = int(round((t_v - l / fs) * fs))
                    shifted = np.zeros(L + 7, dtype=complex)
                    lo, hi = max(0, lag), min(L + 7, L + 7 + lag)
                    if lo < hi:
                        shifted[lo:hi] = a_pad[lo - lag : hi - lag]
                    term = np.sum(a_pad * np.conj(shifted)
                                  * np.exp(-2j * np.pi * (nu_v - nu_i) * np.arange(L + 7) / fs))
                    direct[ii, jj] += (h * np.exp(-2j * np.pi * (nu_v - nu_i) * l / fs)
                                       * term)
        assert np.max(np.abs(np.abs(direct) / np.max(np.abs(direct))
                             - caf.magnitudes)) <= 1e-10

    def test_magnitudes_invariant_under_global_phase(self):
        rng = np.random.default_rng(4)
        a = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        tau = np.arange(-5, 6) / 1e6
        nu = np.linspace(-2e3, 2e3, 11)
        g1 = kpi.ambiguity_grid(a, a, tau, nu, 1e6)
        g2 = kpi.ambiguity_grid(a * np.exp(0.7j), a * np.exp(0.7j), tau, nu, 1e6)
        assert np.max(np.abs(g1.magnitudes - g2.magnitudes)) <= 1e-12

    def test_self_ambiguity_peaks_at_origin(self):
        rng = np.random.default_rng(5)
        a = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        tau = np.arange(-16, 17) / 1e6
        nu = np.linspace(-3e3, 3e3, 31)
        g = kpi.ambiguity_grid(a, a, tau, nu, 1e6)
        i, j = np.unravel_index(np.argmax(g.magnitudes), g.magnitudes.shape)
        assert tau[j] == 0.0 and nu[i] == pytest.approx(0.0)

    def test_cyclic_wraps(self):
        a = np.array([1.0, 2.0, 3.0, 4.0], dtype=complex)
        tau = np.array([1.0 / 1e6])
        g = kpi.ambiguity_grid(a, a, tau, np.array([0.0]), 1e6, convention="cyclic")
        # cyclic lag-1 correlation of (1,2,3,4)
        expected = abs(np.sum(a * np.conj(np.roll(a, 1))))
        assert g.peak_raw * g.magnitudes[0, 0] == pytest.approx(expected)

    def test_misaligned_grid_rejected(self):
        a = np.ones(8, dtype=complex)
        with pytest.raises(ValueError):
            kpi.ambiguity_grid(a, a, np.array([0.4 / 1e6]), np.array([0.0]), 1e6)


class TestAfCutMetrics:
    def test_impulse_sentinel(self):
        cut = np.zeros(65)
        cut[32] = 1.0
        m = kpi.af_cut_metrics(cut, np.linspace(-1, 1, 65))
        assert m.pslr_db <= -300
        assert m.islr_db <= -300
        assert not m.no_null

    def test_triangle_flagged_no_null(self):
        axis = np.linspace(-1, 1, 101)
        cut = 1.0 - np.abs(axis)
        m = kpi.af_cut_metrics(cut, axis)
        assert m.no_null
        assert m.pslr_db == 0.0
        # 3 dB width of the triangle: 2 (1 - 1/sqrt(2))
        assert m.width_3db == pytest.approx(2 * (1 - 2 ** -0.5), abs=1e-3)

    def test_flat_cut_flagged(self):
        m = kpi.af_cut_metrics(np.ones(33), np.linspace(-1, 1, 33))
        assert m.no_null and m.pslr_db == 0.0

    def test_synthetic_two_lobe_values(self):
        # Mainlobe height 1, one sidelobe of height 0.25 and one of 0.1:
        # PSLR = 20 log10(0.25) and ISLR from the exact energies.
        axis = np.arange(11, dtype=float)
        cut = np.array([0.0, 0.1, 0.0, 0.25, 0.0, 0.5, 1.0, 0.5, 0.0, 0.05, 0.0])
        m = kpi.af_cut_metrics(cut, axis)
        assert m.pslr_db == pytest.approx(20 * np.log10(0.25), abs=1e-9)
        side = 0.1**2 + 0.25**2 + 0.05**2
        main = 0.5**2 + 1.0 + 0.5**2
        assert m.islr_db == pytest.approx(10 * np.log10(side / main), abs=1e-9)
        assert not m.no_null

    def test_ratios_invariant_under_rescaling(self):
        axis = np.arange(11, dtype=float)
        cut = np.array([0.0, 0.1, 0.0, 0.25, 0.0, 0.5, 1.0, 0.5, 0.0, 0.05, 0.0])
        m1 = kpi.af_cut_metrics(cut, axis)
        m2 = kpi.af_cut_metrics(cut * 7.3, axis)
        assert m1.pslr_db == pytest.approx(m2.pslr_db)
        assert m1.islr_db == pytest.approx(m2.islr_db)

    def test_flat_zero_cut_rejected(self):
        with pytest.raises(ValueError):
            kpi.af_cut_metrics(np.zeros(8), np.arange(8.0))


class TestOverheadFormulas:
    def test_cp_overhead_values(self):
        assert kpi.cp_overhead(0.0, 1.0) == 0.0
        assert kpi.cp_overhead(0.25, 1.0) == pytest.approx(0.2)
        assert kpi.cp_overhead(1.0, 1.0) == pytest.approx(0.5)
        with pytest.raises(ValueError):
            kpi.cp_overhead(-1.0, 1.0)

    def test_spectral_efficiency_values(self):
        # K subcarriers over bandwidth B with T_sym = K/B
        assert kpi.spectral_efficiency(0.0, 4, 64, 64e-6, 0.0, 1e6) == pytest.approx(2.0)
        assert kpi.spectral_efficiency(0.0, 4, 64, 64e-6, 16e-6, 1e6) == pytest.approx(1.6)
        assert kpi.spectral_efficiency(0.1, 4, 64, 64e-6, 16e-6, 1e6) == pytest.approx(1.44)

    def test_pilot_overhead_reference_values(self):
        count_a, frac_a = kpi.pilot_overhead("afdm", 8, 4, 0, 1024)
        count_o, frac_o = kpi.pilot_overhead("otfs", 8, 4, 0, 1024)
        assert count_a == 161 and count_o == 289
        assert frac_a == pytest.approx(161 / 1024)
        assert frac_o == pytest.approx(289 / 1024)

    def test_pilot_overhead_degenerate(self):
        assert kpi.pilot_overhead("afdm", 0, 0, 0, 8)[0] == 1
        assert kpi.pilot_overhead("otfs", 0, 0, 0, 8)[0] == 1

    def test_pilot_overhead_guard_factor(self):
        base = kpi.pilot_overhead("afdm", 8, 4, 0, 1024)[0]
        guarded = kpi.pilot_overhead("afdm", 8, 4, 1, 1024)[0]
        assert guarded > base

    def test_unknown_scheme_rejected(self):
        with pytest.raises(ValueError):
            kpi.pilot_overhead("ofdm", 1, 1, 0, 64)
