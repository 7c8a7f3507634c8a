import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sint
from scipy import stats

from selrelay.chanmodel import (
    ChannelDraw,
    NetworkConfig,
    OutageSpec,
    Scheme,
    cdf_gamma1,
    db_to_linear,
    effective_snr,
    is_singular_term,
    linear_to_db,
    pdf_beta,
    pdf_gamma1,
    pdf_gamma1_expanded,
    rng_stream,
    sample_channel,
    sample_channels,
    select_best_relay,
)
from selrelay.specfun import DomainError, binom


class TestConfig:
    def test_from_db(self):
        cfg = NetworkConfig.from_db(2, 10.0, 20.0)
        assert cfg.gbar1 == pytest.approx(10.0)
        assert cfg.gbar0 == pytest.approx(100.0)

    @pytest.mark.parametrize("kw", [dict(n_relays=0, gbar1=1.0), dict(n_relays=1, gbar1=0.0),
                                    dict(n_relays=1, gbar1=1.0, gbar0=-1.0), dict(n_relays=1.5, gbar1=1.0)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            NetworkConfig(**kw)

    def test_require_direct(self):
        with pytest.raises(ValueError):
            NetworkConfig(1, 10.0).require_direct(Scheme.SCR)
        assert NetworkConfig(1, 10.0, 3.0).require_direct(Scheme.SCR) == 3.0

    def test_scheme_direct_path(self):
        assert not Scheme.SR.uses_direct_path
        assert Scheme.SCR.uses_direct_path and Scheme.ASR.uses_direct_path

    @given(st.floats(-100, 100))
    def test_db_round_trip(self, db):
        assert linear_to_db(db_to_linear(db)) == pytest.approx(db, abs=1e-12)
        assert db_to_linear(db) == pytest.approx(10 ** (db / 10), rel=1e-12)


class TestOutageSpec:
    def test_threshold(self):
        assert OutageSpec(0.5).threshold == pytest.approx(1.0, rel=1e-15)
        assert OutageSpec(1.0).threshold == pytest.approx(3.0, rel=1e-15)

    def test_zero_rate(self):
        assert OutageSpec(0.0).threshold == 0.0

    @pytest.mark.parametrize("r", [-0.1, math.nan, math.inf])
    def test_invalid(self, r):
        with pytest.raises(ValueError):
            OutageSpec(r)


class TestDensities:
    def test_pdf_zero_multi_relay(self):
        assert pdf_gamma1(0.0, NetworkConfig(2, 10.0)) == 0.0

    def test_pdf_single_relay(self):
        g = np.linspace(0, 30, 31)
        assert np.allclose(pdf_gamma1(g, NetworkConfig(1, 10.0)), 0.2 * np.exp(-0.2 * g), rtol=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 4])
    def test_pdf_normalized(self, n):
        v, _ = sint.quad(lambda g: pdf_gamma1(g, NetworkConfig(n, 10.0)), 0, np.inf, epsabs=0, epsrel=1e-12)
        assert v == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_expanded_matches_product(self, n):
        cfg = NetworkConfig(n, 10.0)
        for g in np.linspace(0, 80, 200):
            p = pdf_gamma1(g, cfg)
            assert abs(pdf_gamma1_expanded(g, cfg) - p) <= 1e-10 * max(p, 1e-300) + 1e-300

    def test_expanded_limits(self):
        assert pdf_gamma1_expanded(0.0, NetworkConfig(1, 10.0)) == pytest.approx(0.2)
        assert pdf_gamma1_expanded(1e4, NetworkConfig(3, 10.0)) == pytest.approx(0.0, abs=1e-300)

    def test_cdf(self):
        cfg = NetworkConfig(1, 10.0)
        assert cdf_gamma1(0.0, cfg) == 0.0
        assert cdf_gamma1(math.inf, NetworkConfig(3, 10.0)) == 1.0
        assert cdf_gamma1(1.0, cfg) == pytest.approx(1 - math.exp(-0.2), rel=1e-14)

    @pytest.mark.parametrize("n", range(1, 11))
    def test_cdf_binomial_identity(self, n):
        cfg = NetworkConfig(n, 10.0)
        for a in (0.1, 1.0, 3.0, 20.0):
            s = math.fsum((-1) ** (i - 1) * binom(n, i) * (1 - math.exp(-2 * i * a / 10.0)) for i in range(1, n + 1))
            assert s == pytest.approx(cdf_gamma1(a, cfg), abs=1e-12)

    @given(st.integers(1, 6), st.floats(0, 100), st.floats(0, 100))
    def test_cdf_monotone(self, n, a, b):
        cfg = NetworkConfig(n, 5.0)
        lo, hi = sorted((a, b))
        assert 0.0 <= cdf_gamma1(lo, cfg) <= cdf_gamma1(hi, cfg) <= 1.0

    def test_negative_argument(self):
        cfg = NetworkConfig(2, 10.0, 10.0)
        for fn in (pdf_gamma1, cdf_gamma1, pdf_gamma1_expanded, pdf_beta):
            with pytest.raises(DomainError):
                fn(-1.0, cfg)

    def test_beta_at_zero(self):
        assert pdf_beta(0.0, NetworkConfig(3, 10.0, 10.0)) == 0.0

    @pytest.mark.parametrize("n", [1, 2, 4])
    def test_beta_normalized(self, n):
        cfg = NetworkConfig(n, 10.0, 10.0)
        v, _ = sint.quad(lambda b: pdf_beta(b, cfg), 0, np.inf, epsabs=0, epsrel=1e-12, limit=200)
        assert v == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("n", [1, 3])
    def test_beta_matches_convolution(self, n):
        cfg = NetworkConfig(n, 10.0, 4.0)
        for b in (0.5, 2.0, 7.5, 20.0):
            conv, _ = sint.quad(lambda g: pdf_gamma1_expanded(g, cfg) * math.exp(-(b - g) / 4.0) / 4.0, 0, b,
                                epsabs=0, epsrel=1e-12)
            assert pdf_beta(b, cfg) == pytest.approx(conv, rel=1e-6)

    def test_beta_singular_term(self):
        # 2 * gbar0 == gbar1 makes the i = 1 term 0/0
        assert is_singular_term(1, 5.0, 10.0)
        assert not is_singular_term(2, 5.0, 10.0)
        cfg = NetworkConfig(1, 10.0, 5.0)
        for b in (0.5, 3.0, 12.0):
            # sum of two i.i.d. Exp(mean 5) is Gamma(2, 5)
            assert pdf_beta(b, cfg) == pytest.approx(b / 25 * math.exp(-b / 5), rel=1e-12)
        near = NetworkConfig(1, 10.0, 5.0 * (1 + 1e-7))
        assert pdf_beta(3.0, near) == pytest.approx(pdf_beta(3.0, cfg), rel=1e-6)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 12), st.floats(-5, 30), st.floats(-5, 30), st.floats(0, 200))
    def test_beta_nonnegative(self, n, db0, db1, b):
        assert pdf_beta(b, NetworkConfig.from_db(n, db1, db0)) >= 0.0


class TestSelection:
    def test_examples(self):
        assert select_best_relay([(3, 5), (4, 2), (6, 6)]) == (2, 6)
        assert select_best_relay([(5, 5)]) == (0, 5)
        assert select_best_relay([(2, 7), (7, 2)]) == (0, 2)

    def test_empty(self):
        with pytest.raises(DomainError):
            select_best_relay([])

    @given(st.lists(st.tuples(st.floats(0, 1e3), st.floats(0, 1e3)), min_size=1, max_size=10))
    def test_max_min(self, hops):
        idx, val = select_best_relay(hops)
        mins = [min(h) for h in hops]
        assert val == max(mins)
        assert idx == mins.index(val)


class TestEffectiveSnr:
    def test_schemes(self):
        d = ChannelDraw(2.0, ((3.0, 4.0),), 0, 3.0)
        assert effective_snr(d, Scheme.SCR).value == 5.0
        assert effective_snr(d, Scheme.ASR).value == 3.0
        assert effective_snr(d, Scheme.SR).value == 3.0

    @given(st.floats(0, 1e4), st.floats(0, 1e4))
    def test_ordering(self, g0, g1):
        d = ChannelDraw(g0, ((g1, g1),), 0, g1)
        sr, asr, scr = (effective_snr(d, s).value for s in (Scheme.SR, Scheme.ASR, Scheme.SCR))
        assert sr <= asr <= scr


class TestSampling:
    def test_g0_mean(self):
        batch = sample_channels(rng_stream(7), NetworkConfig(1, 10.0, 10.0), 10**6)
        se = batch.g0.std(ddof=1) / math.sqrt(batch.g0.size)
        assert abs(batch.g0.mean() - 10.0) <= 3 * se

    def test_link_means(self):
        batch = sample_channels(rng_stream(8), NetworkConfig(3, 4.0, 1.0), 2 * 10**5)
        assert batch.sr.shape == batch.rd.shape == (2 * 10**5, 3)
        assert batch.sr.mean() == pytest.approx(4.0, rel=0.01)
        assert batch.rd.mean() == pytest.approx(4.0, rel=0.01)

    def test_g1_ks(self):
        cfg = NetworkConfig(3, 10.0)
        batch = sample_channels(rng_stream(11), cfg, 10**6)
        g1 = np.minimum(batch.sr, batch.rd).max(axis=1)
        d = stats.kstest(g1, lambda x: cdf_gamma1(x, cfg)).statistic
        assert d < 0.002

    def test_no_direct_path(self):
        batch = sample_channels(rng_stream(1), NetworkConfig(2, 10.0), 100)
        assert np.all(batch.g0 == 0.0)

    def test_deterministic(self):
        cfg = NetworkConfig(2, 10.0, 10.0)
        a = sample_channels(rng_stream(5, 2, 0), cfg, 1000)
        b = sample_channels(rng_stream(5, 2, 0), cfg, 1000)
        assert a.g0.tobytes() == b.g0.tobytes() and a.sr.tobytes() == b.sr.tobytes()
        c = sample_channels(rng_stream(5, 3, 0), cfg, 1000)
        assert a.g0.tobytes() != c.g0.tobytes()

    def test_single_draw_consistent(self):
        cfg = NetworkConfig(4, 10.0, 10.0)
        d = sample_channel(rng_stream(3), cfg)
        batch = sample_channels(rng_stream(3), cfg, 1)
        assert d.g0 == batch.g0[0]
        assert d.g1 == min(d.hops[d.best_relay])
        assert select_best_relay(d.hops) == (d.best_relay, d.g1)
