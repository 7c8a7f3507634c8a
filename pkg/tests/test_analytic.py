import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selrelay import analytic as an
from selrelay.chanmodel import NetworkConfig, OutageSpec, cdf_gamma1, db_to_linear
from selrelay.quadrature import Density, IntegralSpec, Kernel, integrate
from selrelay.specfun import DomainError

from conftest import equal_link

HALF, FULL = an.CapacityConvention.HALF, an.CapacityConvention.FULL


class TestBer:
    def test_sr_single_relay(self):
        assert an.ber_sr(NetworkConfig(1, 10.0)) == pytest.approx(0.5 * (1 - math.sqrt(10 / 12)), rel=1e-14)

    def test_sr_two_relays(self):
        assert an.ber_sr(NetworkConfig(2, 10.0)) == pytest.approx(9.706e-3, rel=1e-4)

    def test_scr_envelope_and_monotone(self):
        vals = [an.ber_scr(equal_link(1, db)) for db in range(0, 31, 3)]
        assert all(0 < v < 0.5 for v in vals)
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_scr_matches_quadrature(self, cfg10):
        q = integrate(IntegralSpec(Kernel.BER, Density.PDF_BETA), cfg10, 1e-11).value
        assert an.ber_scr(cfg10) == pytest.approx(q, rel=1e-8)

    def test_scr_collapses_to_sr(self):
        for n in (1, 2, 4):
            cfg = NetworkConfig(n, 10.0, 1e-6)
            assert abs(an.ber_scr(cfg) - an.ber_sr(cfg)) <= 1e-6

    def test_asr_collapses_to_sr(self):
        cfg = NetworkConfig(2, 10.0, 1e-6)
        assert abs(an.ber_asr_numeric(cfg) - an.ber_sr(cfg)) <= 1e-6

    def test_scr_singular_point(self):
        # i = 1 term is 0/0 when 2*gbar0 == gbar1; the limit must join the neighbours smoothly
        exact = an.ber_scr(NetworkConfig(2, 10.0, 5.0))
        for eps in (1e-6, -1e-6):
            assert an.ber_scr(NetworkConfig(2, 10.0, 5.0 * (1 + eps))) == pytest.approx(exact, rel=1e-5)
        q = integrate(IntegralSpec(Kernel.BER, Density.PDF_BETA), NetworkConfig(2, 10.0, 5.0), 1e-11).value
        assert exact == pytest.approx(q, rel=1e-8)

    def test_high_snr_precision(self):
        cfg = equal_link(4, 30.0)
        q = integrate(IntegralSpec(Kernel.BER, Density.PDF_BETA), cfg, 1e-11).value
        assert an.ber_scr(cfg) == pytest.approx(q, rel=1e-8)

    def test_ordering(self):
        for n in (1, 2, 3):
            for db in (0, 10, 20):
                cfg = equal_link(n, db)
                assert an.ber_scr(cfg) < an.ber_asr_numeric(cfg) < an.ber_sr(cfg)

    def test_relay_cap(self):
        with pytest.raises(an.StabilityError):
            an.ber_sr(NetworkConfig(31, 10.0))
        an.ber_sr(NetworkConfig(30, 10.0))

    def test_scr_needs_direct(self):
        with pytest.raises(ValueError):
            an.ber_scr(NetworkConfig(1, 10.0))


class TestOutage:
    def test_scr_example(self, cfg10):
        # hypoexponential CDF for one relay
        a, g0, g1 = 1.0, 10.0, 10.0
        exact = 1 - (g0 * math.exp(-a / g0) - g1 / 2 * math.exp(-2 * a / g1)) / (g0 - g1 / 2)
        assert an.outage_scr(cfg10, OutageSpec(0.5)) == pytest.approx(exact, rel=1e-12)
        assert exact == pytest.approx(0.009056, abs=1e-6)

    def test_scr_quadrature(self):
        cfg = NetworkConfig(2, 10.0, 10.0)
        q = integrate(IntegralSpec(Kernel.OUTAGE_INDICATOR, Density.PDF_BETA, upper=3.0), cfg, 1e-11).value
        assert an.outage_scr(cfg, OutageSpec(1.0)) == pytest.approx(q, rel=1e-8)

    def test_sr_examples(self):
        assert an.outage_sr(NetworkConfig(1, 10.0), OutageSpec(0.5)) == pytest.approx(1 - math.exp(-0.2), rel=1e-14)
        assert an.outage_sr(NetworkConfig(4, 10.0), OutageSpec(0.5)) == pytest.approx((1 - math.exp(-0.2)) ** 4,
                                                                                     rel=1e-12)

    @pytest.mark.parametrize("n", range(1, 11))
    def test_sr_equals_cdf(self, n):
        for r in (0.1, 0.5, 1.0, 2.0):
            cfg = NetworkConfig(n, 7.0)
            spec = OutageSpec(r)
            assert an.outage_sr(cfg, spec) == pytest.approx(cdf_gamma1(spec.threshold, cfg), rel=1e-12, abs=1e-300)

    def test_zero_rate(self, cfg10):
        assert an.outage_scr(cfg10, OutageSpec(0.0)) == 0.0
        assert an.outage_sr(cfg10, OutageSpec(0.0)) == 0.0
        assert an.outage_scr(cfg10, OutageSpec(1e-9)) < 1e-15

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 4), st.floats(0.05, 3.0), st.floats(0.05, 3.0), st.floats(-5.0, 25.0))
    def test_scr_monotone_in_rate(self, n, r1, r2, db):
        cfg = equal_link(n, db)
        lo, hi = sorted((r1, r2))
        a, b = an.outage_scr(cfg, OutageSpec(lo)), an.outage_scr(cfg, OutageSpec(hi))
        assert 0.0 <= a <= b * (1 + 1e-12) <= 1.0 + 1e-12


class TestCapacity:
    def test_sr_values(self):
        cfg = NetworkConfig(1, 10.0)
        ref = 0.5 / math.log(2) * math.exp(0.2) * float(mpmath.e1(0.2))
        assert an.capacity_sr(cfg, HALF) == pytest.approx(ref, rel=1e-14)
        assert an.capacity_sr(cfg, HALF) == pytest.approx(1.0772, abs=1e-4)
        assert an.capacity_sr(cfg, FULL) == pytest.approx(2.1545, abs=1e-4)

    @pytest.mark.parametrize("fn", [an.capacity_sr, an.capacity_scr])
    def test_full_is_twice_half(self, fn):
        for n in (1, 3):
            cfg = equal_link(n, 7.0)
            assert fn(cfg, FULL) == 2 * fn(cfg, HALF)

    def test_scr_quadrature_half(self, cfg10):
        q = integrate(IntegralSpec(Kernel.CAPACITY, Density.PDF_BETA, prelog=0.5), cfg10, 1e-11).value
        assert an.capacity_scr(cfg10, HALF) == pytest.approx(q, rel=1e-8)

    def test_sr_quadrature_half(self):
        cfg = NetworkConfig(3, 20.0)
        q = integrate(IntegralSpec(Kernel.CAPACITY, Density.PDF_GAMMA1, prelog=0.5), cfg, 1e-11).value
        assert an.capacity_sr(cfg, HALF) == pytest.approx(q, rel=1e-8)

    def test_vanishing_snr(self):
        v = an.capacity_scr(NetworkConfig(1, 1e-9, 1e-9))
        assert 0.0 < v < 1e-8

    @pytest.mark.parametrize("fn", [an.capacity_sr, an.capacity_scr])
    def test_saturation(self, fn):
        caps = [fn(equal_link(n, 10.0)) for n in range(1, 6)]
        inc = np.diff(caps)
        assert np.all(inc > 0) and np.all(np.diff(inc) < 0)

    def test_scr_above_sr(self):
        for n in (1, 2, 5):
            for db in (0, 10, 20):
                cfg = equal_link(n, db)
                assert an.capacity_scr(cfg) > an.capacity_sr(cfg)

    def test_singular_point(self):
        exact = an.capacity_scr(NetworkConfig(1, 10.0, 5.0))
        assert an.capacity_scr(NetworkConfig(1, 10.0, 5.0 * (1 + 1e-7))) == pytest.approx(exact, rel=1e-6)


class TestMonotoneInSnr:
    @pytest.mark.parametrize("n", [1, 3])
    def test_all_metrics(self, n):
        dbs = np.linspace(-5, 30, 20)
        spec = OutageSpec(0.5)
        ber = [an.ber_scr(equal_link(n, d)) for d in dbs]
        sr = [an.ber_sr(equal_link(n, d, direct=False)) for d in dbs]
        out = [an.outage_scr(equal_link(n, d), spec) for d in dbs]
        cap = [an.capacity_scr(equal_link(n, d)) for d in dbs]
        assert np.all(np.diff(ber) < 0) and np.all(np.diff(sr) < 0) and np.all(np.diff(out) < 0)
        assert np.all(np.diff(cap) > 0)

    def test_gbar0_alone(self):
        vals = [an.ber_scr(NetworkConfig(2, 10.0, db_to_linear(d))) for d in np.linspace(-10, 30, 20)]
        assert np.all(np.diff(vals) < 0)


class TestDiversityOrder:
    def test_power_law(self):
        curve = [(db, 3.0 * db_to_linear(db) ** -2) for db in range(0, 31, 2)]
        assert an.diversity_order_estimate(curve) == pytest.approx(2.0, abs=1e-9)

    def test_flat(self):
        assert an.diversity_order_estimate([(x, 0.1) for x in range(10)]) == pytest.approx(0.0, abs=1e-9)

    def test_scr_and_sr(self):
        dbs = range(20, 31, 2)
        assert an.diversity_order_estimate([(d, an.ber_scr(equal_link(2, d))) for d in dbs]) == pytest.approx(3, abs=0.5)
        assert an.diversity_order_estimate([(d, an.ber_sr(equal_link(3, d))) for d in dbs]) == pytest.approx(3, abs=0.5)

    def test_errors(self):
        with pytest.raises(DomainError):
            an.diversity_order_estimate([(0, 1.0)])
        with pytest.raises(DomainError):
            an.diversity_order_estimate([(0, 1.0), (1, 0.0)])
        with pytest.raises(DomainError):
            an.diversity_order_estimate([(1, 1.0), (0, 0.5)])

    @given(st.floats(0.5, 6.0), st.floats(1e-3, 1e3))
    def test_recovers_exponent(self, d, k):
        curve = [(db, k * 10 ** (-d * db / 10)) for db in range(0, 21, 2)]
        assert an.diversity_order_estimate(curve) == pytest.approx(d, rel=1e-9)
