import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from ircoop.errors import AssumptionViolated, DomainError, TooManyHelpers
from ircoop.outage import (
    EstimateKind, FerEstimate, fer_bound, outage_given_set, outage_m1, outage_m2_cooperative,
    wilson_half_width,
)
from ircoop.protocol import CoopConfig, Geometry
from ircoop.puncturing import punctured_threshold

C = 0.17

# 10^7 draws of (x, y) uniform on (0,1]^2 at c=0.17, tau=(0.5, 0.5), SNRs 10, 10 (tests/oracles.py)
M2_MC_VALUE = 0.0005888
M2_MC_SIGMA = 7.671071076192686e-06


def joint_sigma(*sigmas):
    return math.sqrt(sum(s * s for s in sigmas))


class TestEstimate:
    def test_validation(self):
        with pytest.raises(ValueError):
            FerEstimate(1.5, EstimateKind.CLOSED_FORM)
        with pytest.raises(ValueError):
            FerEstimate(0.5, EstimateKind.CLOSED_FORM, half_width=-1.0)
        FerEstimate(5.0, EstimateKind.ASYMPTOTIC)

    def test_wilson_nonzero_at_zero_count(self):
        assert wilson_half_width(0, 10_000) > 0.0


class TestDirect:
    def test_values(self):
        assert outage_m1(C, 17.0).value == pytest.approx(-math.expm1(-0.01), rel=1e-15)
        assert outage_m1(C, 17.0).value == pytest.approx(0.00995, abs=1e-5)
        assert outage_m1(C, 0.17).value == pytest.approx(1 - math.exp(-1), rel=1e-15)
        assert outage_m1(C, math.inf).value == 0.0

    def test_domain(self):
        with pytest.raises(DomainError):
            outage_m1(C, 0.0)


class TestTwoNodeQuadrature:
    def test_infinite_snr(self):
        assert outage_m2_cooperative(C, 0.5, 0.5, math.inf, math.inf).value == 0.0

    def test_against_mc_oracle(self):
        val = outage_m2_cooperative(C, 0.5, 0.5, 10.0, 10.0).value
        assert abs(val - M2_MC_VALUE) <= 3 * M2_MC_SIGMA

    def test_useless_helper_link(self):
        omega = math.exp(-punctured_threshold(C, 0.5) / 10.0)
        val = outage_m2_cooperative(C, 0.5, 0.5, 10.0, 1e-9).value
        assert val == pytest.approx(1 - omega, rel=1e-6)

    @pytest.mark.parametrize("tau0,s02,s12", [(0.5, 10.0, 10.0), (0.6, 3.0, 5.0), (0.45, 40.0, 2.0), (0.7, 1.0, 1.0)])
    def test_matches_untransformed_integral(self, tau0, s02, s12):
        tau1 = 1 - tau0
        e = math.exp(-C)
        omega = math.exp(-punctured_threshold(C, tau0) / s02)
        inner, _ = integrate.quad(lambda x: min(1.0, max(0.0, (e - tau0 * x ** s02) / tau1)) ** (1 / s12),
                                  omega, 1.0, epsabs=1e-14, limit=500)
        assert outage_m2_cooperative(C, tau0, tau1, s02, s12).value == pytest.approx(1 - omega - inner, abs=1e-10)

    @pytest.mark.parametrize("taus", [(0.9, 0.1), (0.1, 0.9), (0.5, 0.4)])
    def test_assumption_enforced(self, taus):
        with pytest.raises(AssumptionViolated):
            outage_m2_cooperative(C, *taus, 10.0, 10.0)

    @settings(max_examples=30)
    @given(st.floats(0.16, 0.84), st.floats(0.1, 100.0), st.floats(0.1, 100.0), st.floats(1.01, 4.0))
    def test_monotone_in_snr(self, tau0, s02, s12, k):
        tau1 = 1 - tau0
        if tau0 > math.exp(-C) or tau1 > math.exp(-C):
            return
        base = outage_m2_cooperative(C, tau0, tau1, s02, s12).value
        assert outage_m2_cooperative(C, tau0, tau1, s02 * k, s12).value <= base + 1e-12
        assert outage_m2_cooperative(C, tau0, tau1, s02, s12 * k).value <= base + 1e-12
        assert outage_m2_cooperative(C * 0.8, tau0, tau1, s02, s12).value <= base + 1e-12


class TestMonteCarlo:
    def test_empty_set_matches_direct(self):
        cfg = CoopConfig.uniform(4)
        snrs = [8.0, 3.0, 3.0, 3.0]
        est = outage_given_set(cfg, set(), snrs, C, 200_000, seed=11)
        exact = outage_m1(C, 8.0).value
        assert abs(est.value - exact) <= 3 * est.sigma
        assert est.kind is EstimateKind.MC_INTEGRAL and est.samples == 200_000

    def test_two_nodes_match_quadrature(self):
        cfg = CoopConfig.uniform(2)
        est = outage_given_set(cfg, {1}, [3.0, 4.0], C, 400_000, seed=5)
        quad = outage_m2_cooperative(C, 0.5, 0.5, 3.0, 4.0).value
        assert abs(est.value - quad) <= 3 * est.sigma

    def test_importance_matches_quadrature_deep(self):
        cfg = CoopConfig.uniform(2)
        quad = outage_m2_cooperative(C, 0.5, 0.5, 1e3, 1e3).value
        est = outage_given_set(cfg, {1}, [1e3, 1e3], C, 200_000, seed=5, importance=True)
        assert quad < 1e-6
        assert abs(est.value - quad) <= 3 * est.sigma
        assert est.half_width < 0.05 * quad

    def test_scaling_snr_decreases_with_common_numbers(self):
        cfg = CoopConfig.uniform(4)
        snrs = np.array([2.0, 1.0, 1.5, 0.5])
        a = outage_given_set(cfg, {1, 3}, snrs, C, 100_000, seed=3)
        b = outage_given_set(cfg, {1, 3}, snrs * 10, C, 100_000, seed=3)
        assert b.value < a.value

    def test_deterministic_and_worker_independent(self):
        cfg = CoopConfig.uniform(3)
        a = outage_given_set(cfg, {1, 2}, [1.0, 2.0, 3.0], C, 150_000, seed=9)
        b = outage_given_set(cfg, {1, 2}, [1.0, 2.0, 3.0], C, 150_000, seed=9, workers=4)
        assert a == b

    def test_minimum_samples(self):
        with pytest.raises(DomainError):
            outage_given_set(CoopConfig.uniform(2), {1}, [1.0, 1.0], C, 9_999, seed=0)

    def test_vanishes_at_high_snr(self):
        cfg = CoopConfig.uniform(5)
        for f in ({1}, {2, 4}, {1, 2, 3, 4}):
            est = outage_given_set(cfg, f, [1e6] * 5, C, 20_000, seed=1)
            assert est.value < 1e-3


class TestBound:
    def test_single_node(self):
        g = Geometry.from_snrs(1, 1.0, 5.0, 5.0)
        est = fer_bound(CoopConfig.uniform(1), g, C)
        assert est.value == pytest.approx(outage_m1(C, 5.0).value, rel=1e-14)
        assert est.kind is EstimateKind.CLOSED_FORM

    def test_two_node_composition(self):
        rho, lam, eta = 4.0, 10.0, 6.0
        g = Geometry.from_snrs(2, rho, lam, eta)
        p = math.exp(-punctured_threshold(C, 0.5) / rho)
        expected = (1 - p) * outage_m1(C, eta).value + p * outage_m2_cooperative(C, 0.5, 0.5, eta, lam).value
        est = fer_bound(CoopConfig.uniform(2), g, C)
        assert est.value == pytest.approx(expected, rel=1e-14)
        assert est.kind is EstimateKind.QUADRATURE

    def test_two_node_falls_back_to_mc(self):
        g = Geometry.from_snrs(2, 4.0, 10.0, 6.0)
        est = fer_bound(CoopConfig(2, (0.9, 0.1)), g, C, n_samples=20_000, seed=1)
        assert est.kind is EstimateKind.MC_INTEGRAL

    def test_not_self_decodable_broadcast(self):
        g = Geometry.from_snrs(3, 4.0, 10.0, 6.0)
        est = fer_bound(CoopConfig(3, (0.1, 0.45, 0.45)), g, C)
        assert est.value == outage_m1(C, 6.0).value

    def test_cap(self):
        g = Geometry.from_snrs(21, 1.0, 1.0, 1.0)
        with pytest.raises(TooManyHelpers):
            fer_bound(CoopConfig.uniform(21), g, C)

    def test_monotone_in_lambda_with_common_numbers(self):
        cfg = CoopConfig.uniform(4)
        vals = [fer_bound(cfg, Geometry.from_snrs(4, 2.0, lam, lam), C, 50_000, seed=4).value
                for lam in (1.0, 3.0, 10.0, 30.0)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_half_width_is_weighted_sum(self):
        cfg = CoopConfig.uniform(3)
        g = Geometry.from_snrs(3, 2.0, 4.0, 4.0)
        est = fer_bound(cfg, g, C, 50_000, seed=2)
        chi0 = punctured_threshold(C, 1 / 3)
        p = math.exp(-chi0 / 2.0)
        parts = [((1 - p) * p, {1}), (p * (1 - p), {2}), (p * p, {1, 2})]
        hw = sum(w * outage_given_set(cfg, f, [4.0] * 3, C, 50_000, seed=2).half_width for w, f in parts)
        assert est.half_width == pytest.approx(hw, rel=1e-12)
