import numpy as np
import pytest

from diffrelay.fading import ChannelParams, gen_jakes
from diffrelay.link import Frame, LinkConfig, amp_factor, transmit
from diffrelay.modem import Constellation, diff_encode


class TestAmpFactor:
    def test_unit_inputs(self):
        assert amp_factor(1, 1, 1, 1) == pytest.approx(np.sqrt(0.5), abs=1e-12)

    def test_direct_substitution(self):
        assert amp_factor(2, 1, 10, 1) == pytest.approx(np.sqrt(1 / 21), abs=1e-12)

    def test_monotone_decreasing_in_p0(self):
        vals = [amp_factor(p0, 1, 1, 1) for p0 in (1, 10, 100, 1000)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            amp_factor(0, 1, 1, 1)
        with pytest.raises(ValueError):
            amp_factor(1, 1, 1, -2)


class TestLinkConfig:
    def test_from_total_power_identity(self):
        cfg = LinkConfig.from_total_power(10.0, 0.3, sigma2_1=2.0, N0=1.0, M=2)
        assert cfg.P0 == pytest.approx(3.0)
        assert cfg.P1 == pytest.approx(7.0)
        assert cfg.A == pytest.approx(amp_factor(3.0, 7.0, 2.0, 1.0), abs=0.0)

    def test_snr_db_constructor(self):
        cfg = LinkConfig.from_snr_db(10.0, 0.5, 1.0)
        assert cfg.P0 + cfg.P1 == pytest.approx(10.0)

    def test_rejects_bad_rho(self):
        with pytest.raises(ValueError):
            LinkConfig.from_total_power(1.0, 1.0, 1.0)


@pytest.fixture
def setup():
    ch = ChannelParams(1.0, 1.0, 0.01, 0.001)
    cfg = LinkConfig.from_total_power(20.0, 0.3, ch.sigma2_1, M=4)
    c = Constellation(4)
    rng = np.random.default_rng(1)
    v = c.points[rng.integers(0, 4, 999)]
    s = diff_encode(v)
    h1 = gen_jakes(ch, 1, len(s), seed=11)
    h2 = gen_jakes(ch, 2, len(s), seed=11)
    return ch, cfg, s, h1, h2


class TestTransmit:
    def test_noiseless_identity(self, setup):
        ch, cfg, s, h1, h2 = setup
        fr = transmit(s, h1, h2, cfg, noise_seed=5, noiseless=True)
        expect = cfg.A * np.sqrt(cfg.P0) * h1.samples * h2.samples * s
        assert np.allclose(fr.y, expect, atol=1e-12)

    def test_deterministic_noise(self, setup):
        ch, cfg, s, h1, h2 = setup
        a = transmit(s, h1, h2, cfg, noise_seed=5)
        b = transmit(s, h1, h2, cfg, noise_seed=5)
        c2 = transmit(s, h1, h2, cfg, noise_seed=6)
        assert np.array_equal(a.y, b.y)
        assert not np.array_equal(a.y, c2.y)

    def test_frame_decomposition(self, setup):
        ch, cfg, s, h1, h2 = setup
        fr = transmit(s, h1, h2, cfg, noise_seed=5)
        assert np.allclose(fr.x, np.sqrt(cfg.P0) * fr.h1 * fr.s + fr.w1, atol=1e-12)
        assert np.allclose(fr.y, cfg.A * fr.h2 * fr.x + fr.w2, atol=1e-12)

    def test_phase_rotation_linearity(self, setup):
        ch, cfg, s, h1, h2 = setup
        fr = transmit(s, h1, h2, cfg, noise_seed=0, noiseless=True)
        rot = transmit(1j * s, h1, h2, cfg, noise_seed=0, noiseless=True)
        assert np.allclose(rot.y, 1j * fr.y, atol=1e-12)

    def test_equivalent_noise_variance(self):
        # Var(w | h2) = N0 (1 + A^2 |h2|^2) via a 1e5-trial sample variance
        ch = ChannelParams(1.0, 1.0, 0.0, 0.0)
        cfg = LinkConfig.from_total_power(8.0, 0.25, 1.0, N0=2.0)
        n = 100_000
        h2_fix = 1.3 - 0.7j
        s = np.ones(n, dtype=complex)
        h1 = np.ones(n, dtype=complex)
        h2 = np.full(n, h2_fix)
        fr = transmit(s, h1, h2, cfg, noise_seed=77)
        w = fr.y - cfg.A * np.sqrt(cfg.P0) * h1 * h2 * s
        expect = cfg.N0 * (1.0 + cfg.A**2 * abs(h2_fix) ** 2)
        assert np.mean(np.abs(w) ** 2) == pytest.approx(expect, rel=0.02)
        assert abs(np.mean(w)) < 3.5 * np.sqrt(expect / n)

    def test_relay_power_normalization(self):
        # E|A x|^2 ~ P1 when A follows the gain rule
        ch = ChannelParams(1.0, 1.0, 0.05, 0.05)
        cfg = LinkConfig.from_total_power(10.0, 0.4, 1.0)
        n = 100_000
        rng = np.random.default_rng(3)
        s = 1.0 - 2.0 * rng.integers(0, 2, n).astype(float)
        h1 = gen_jakes(ch, 1, n, seed=4)
        h2 = gen_jakes(ch, 2, n, seed=4)
        fr = transmit(s, h1, h2, cfg, noise_seed=9)
        assert np.mean(np.abs(cfg.A * fr.x) ** 2) == pytest.approx(cfg.P1, rel=0.02)

    def test_normalized_residual_gaussianity(self):
        # at fixed h2 the scaled residual has unit variance and near-zero mean
        cfg = LinkConfig.from_total_power(4.0, 0.5, 1.0, N0=1.0)
        n = 100_000
        h2_fix = 0.4 + 1.1j
        s = np.ones(n, dtype=complex)
        rng = np.random.default_rng(12)
        h1 = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
        h2 = np.full(n, h2_fix)
        fr = transmit(s, h1, h2, cfg, noise_seed=13)
        resid = (fr.y - cfg.A * np.sqrt(cfg.P0) * h1 * h2 * s) / np.sqrt(
            cfg.N0 * (1.0 + cfg.A**2 * abs(h2_fix) ** 2))
        assert abs(np.mean(resid)) < 0.01
        assert np.mean(np.abs(resid) ** 2) == pytest.approx(1.0, rel=0.02)

    def test_length_mismatch(self, setup):
        ch, cfg, s, h1, h2 = setup
        with pytest.raises(ValueError):
            transmit(s[:-1], h1, h2, cfg, noise_seed=0)

    def test_frame_invariant(self):
        with pytest.raises(ValueError):
            Frame(s=np.ones(3), h1=np.ones(3), h2=np.ones(3), x=np.ones(3),
                  y=np.ones(2), w1=np.ones(3), w2=np.ones(3))
