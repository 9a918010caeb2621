import math

import mpmath
import numpy as np
import pytest

from diffrelay.fading import (ChannelParams, autocorr, cascaded_alpha,
                              cascaded_covariance, empirical_autocorr,
                              gen_ar1, gen_jakes)

mpmath.mp.dps = 30


def j0_oracle(x):
    return float(mpmath.besselj(0, mpmath.mpf(x)))


@pytest.fixture
def params():
    return ChannelParams(sigma2_1=1.0, sigma2_2=1.0, f1=0.01, f2=0.001)


class TestChannelParams:
    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            ChannelParams(0.0, 1.0, 0.01, 0.01)
        with pytest.raises(ValueError):
            ChannelParams(1.0, 1.0, 0.5, 0.01)
        with pytest.raises(ValueError):
            ChannelParams(1.0, 1.0, -0.01, 0.01)


class TestAutocorr:
    def test_lag_zero_is_variance(self, params):
        assert autocorr(params, 1, 0) == 1.0
        big = ChannelParams(10.0, 1.0, 0.3, 0.0)
        assert autocorr(big, 1, 0) == 10.0

    def test_small_doppler(self):
        p = ChannelParams(1.0, 1.0, 0.001, 0.001)
        assert autocorr(p, 1, 1) == pytest.approx(j0_oracle(2 * math.pi * 0.001),
                                                  abs=1e-14)

    def test_scaled_variance(self):
        p = ChannelParams(10.0, 1.0, 0.01, 0.001)
        assert autocorr(p, 1, 1) == pytest.approx(10 * j0_oracle(2 * math.pi * 0.01),
                                                  abs=1e-12)

    def test_negative_lag_rejected(self, params):
        with pytest.raises(ValueError):
            autocorr(params, 1, -1)


class TestCascadedAlpha:
    def test_static_channel(self):
        assert cascaded_alpha(ChannelParams(1, 1, 0.0, 0.0)) == 1.0

    def test_case_ii(self):
        ch = ChannelParams(1, 1, 0.01, 0.001)
        oracle = j0_oracle(2 * math.pi * 0.01) * j0_oracle(2 * math.pi * 0.001)
        assert cascaded_alpha(ch, 1) == pytest.approx(oracle, abs=1e-14)
        assert cascaded_alpha(ch, 1) == pytest.approx(0.99900, abs=2e-5)

    def test_case_iii(self):
        ch = ChannelParams(1, 1, 0.02, 0.01)
        oracle = j0_oracle(2 * math.pi * 0.02) * j0_oracle(2 * math.pi * 0.01)
        assert cascaded_alpha(ch, 1) == pytest.approx(oracle, abs=1e-14)
        assert cascaded_alpha(ch, 1) == pytest.approx(0.99507, abs=2e-5)

    def test_monotone_in_each_doppler(self):
        grid = np.linspace(0.0, 0.1, 21)
        vals_f1 = [cascaded_alpha(ChannelParams(1, 1, f, 0.01)) for f in grid]
        vals_f2 = [cascaded_alpha(ChannelParams(1, 1, 0.01, f)) for f in grid]
        assert np.all(np.diff(vals_f1) < 0)
        assert np.all(np.diff(vals_f2) < 0)

    def test_covariance_entries(self, params):
        S = cascaded_covariance(params, 4)
        for i in range(4):
            for j in range(4):
                n = abs(i - j)
                expect = autocorr(params, 1, n) * autocorr(params, 2, n)
                assert S[i, j] == pytest.approx(expect, abs=1e-14)


class TestJakesGenerator:
    def test_zero_doppler_is_constant(self):
        ch = ChannelParams(1.0, 1.0, 0.0, 0.01)
        h = gen_jakes(ch, 1, 1000, seed=3).samples
        assert np.all(h == h[0])

    def test_deterministic_per_seed(self, params):
        a = gen_jakes(params, 1, 5000, seed=42).samples
        b = gen_jakes(params, 1, 5000, seed=42).samples
        c = gen_jakes(params, 1, 5000, seed=43).samples
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_hops_decorrelated(self, params):
        h1 = gen_jakes(params, 1, 100_000, seed=5).samples
        p2 = ChannelParams(1.0, 1.0, 0.01, 0.01)
        h2 = gen_jakes(p2, 2, 100_000, seed=5).samples
        corr = np.mean(h1 * h2.conj())
        assert abs(corr) < 0.02

    def test_lag_one_autocorrelation(self):
        ch = ChannelParams(1.0, 1.0, 0.01, 0.001)
        h = gen_jakes(ch, 1, 100_000, seed=7).samples
        emp = float(np.mean(h[:-1].conj() * h[1:]).real)
        assert emp == pytest.approx(j0_oracle(2 * math.pi * 0.01), abs=0.02)

    @pytest.mark.parametrize("f,seed", [(0.001, 11), (0.01, 12), (0.02, 13),
                                        (0.05, 14)])
    def test_autocorr_rms_within_two_percent(self, f, seed):
        ch = ChannelParams(1.0, 1.0, f, f)
        h = gen_jakes(ch, 1, 100_000, seed=seed).samples
        emp = empirical_autocorr(h, 100)
        theory = np.array([j0_oracle(2 * math.pi * f * n) for n in range(101)])
        rms = np.sqrt(np.mean(np.abs(emp - theory) ** 2))
        assert rms <= 0.02

    def test_mean_power(self):
        for f, seed in ((0.001, 2), (0.01, 2), (0.05, 2)):
            ch = ChannelParams(2.0, 1.0, f, f)
            h = gen_jakes(ch, 1, 100_000, seed=seed).samples
            assert np.mean(np.abs(h) ** 2) == pytest.approx(2.0, rel=0.02)

    @pytest.mark.parametrize("f,seed", [(0.005, 4), (0.01, 5), (0.02, 6),
                                        (0.05, 8)])
    def test_quadrature_balance(self, f, seed):
        ch = ChannelParams(1.0, 1.0, f, f)
        h = gen_jakes(ch, 1, 100_000, seed=seed).samples
        assert np.mean(h.real ** 2) == pytest.approx(0.5, rel=0.03)
        assert np.mean(h.imag ** 2) == pytest.approx(0.5, rel=0.03)
        corr = np.mean(h.real * h.imag) / (np.std(h.real) * np.std(h.imag))
        assert abs(corr) < 0.02

    def test_cascaded_variance(self):
        ch = ChannelParams(1.0, 10.0, 0.02, 0.01)
        h1 = gen_jakes(ch, 1, 100_000, seed=9).samples
        h2 = gen_jakes(ch, 2, 100_000, seed=9).samples
        assert np.mean(np.abs(h1 * h2) ** 2) == pytest.approx(10.0, rel=0.05)

    def test_rejects_bad_length(self, params):
        with pytest.raises(ValueError):
            gen_jakes(params, 1, 0, seed=1)

    def test_csv_export(self, params, tmp_path):
        proc = gen_jakes(params, 1, 50, seed=1)
        path = tmp_path / "fade.csv"
        proc.to_csv(path)
        rows = path.read_text().strip().split("\n")
        assert rows[0] == "k,re,im"
        assert len(rows) == 51
        k, re, im = rows[3].split(",")
        assert int(k) == 2
        assert complex(float(re), float(im)) == proc.samples[2]


class TestAr1Generator:
    def test_alpha_one_is_constant(self):
        ch = ChannelParams(1.0, 1.0, 0.0, 0.01)
        h = gen_ar1(ch, 1, 500, seed=3).samples
        assert np.allclose(h, h[0])

    def test_stationary_variance(self):
        # fast rate: the record then holds enough decorrelation times for
        # the 2% single-record check to be statistically meaningful
        ch = ChannelParams(3.0, 1.0, 0.2, 0.01)
        h = gen_ar1(ch, 1, 100_000, seed=21).samples
        assert np.mean(np.abs(h) ** 2) == pytest.approx(3.0, rel=0.02)

    def test_lag_one_autocorrelation(self):
        ch = ChannelParams(1.0, 1.0, 0.02, 0.01)
        h = gen_ar1(ch, 1, 100_000, seed=22).samples
        a = j0_oracle(2 * math.pi * 0.02)
        emp = float(np.mean(h[:-1].conj() * h[1:]).real)
        assert emp == pytest.approx(a, abs=0.02)

    def test_lag_one_autocorrelation_fast_rate(self):
        ch = ChannelParams(1.0, 1.0, 0.2, 0.01)
        h = gen_ar1(ch, 1, 100_000, seed=24).samples
        emp = float(np.mean(h[:-1].conj() * h[1:]).real)
        assert emp == pytest.approx(j0_oracle(2 * math.pi * 0.2), abs=0.02)

    def test_quadrature_balance(self):
        ch = ChannelParams(1.0, 1.0, 0.2, 0.01)
        h = gen_ar1(ch, 1, 100_000, seed=23).samples
        assert np.mean(h.real ** 2) == pytest.approx(0.5, rel=0.03)
        assert np.mean(h.imag ** 2) == pytest.approx(0.5, rel=0.03)
        corr = np.mean(h.real * h.imag) / (np.std(h.real) * np.std(h.imag))
        assert abs(corr) < 0.02

    def test_deterministic_and_hop_streams(self):
        ch = ChannelParams(1.0, 1.0, 0.01, 0.01)
        a = gen_ar1(ch, 1, 1000, seed=1).samples
        b = gen_ar1(ch, 1, 1000, seed=1).samples
        c = gen_ar1(ch, 2, 1000, seed=1).samples
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)
