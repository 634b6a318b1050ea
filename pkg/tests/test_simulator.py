import math

import numpy as np
import pytest

from ircoop._rng import stream
from ircoop.errors import DomainError
from ircoop.outage import EstimateKind, broadcast_threshold, fer_bound, outage_m1
from ircoop.protocol import CoopConfig, Geometry, Scenario, broadcast_snrs, reliable_set_prob
from ircoop.simulator import (
    FLAG_IMPORTANCE, FLAG_WEAK, SimConfig, direct_scenario, simulate_direct, simulate_fer,
    simulate_firf_threshold, simulate_frame, simulate_point,
)

C = 0.17


def snr_scenario(m, rho, lam, eta, c=C, seed=None):
    return Scenario(Geometry.from_snrs(m, rho, lam, eta), CoopConfig.uniform(m), c, seed=seed)


def db(x):
    return 10.0 ** (x / 10.0)


class TestBasics:
    def test_single_node_matches_closed_form(self):
        res = simulate_fer(SimConfig(snr_scenario(1, 1.0, 1.0, 4.0), 200_000, seed=1))
        exact = outage_m1(C, 4.0).value
        assert abs(res.fer.value - exact) <= res.fer.half_width
        assert res.reliable_set_histogram == {frozenset(): 200_000}

    def test_zero_threshold_makes_every_helper_reliable(self):
        res = simulate_fer(SimConfig(snr_scenario(4, 1.0, 1.0, 1.0, c=0.0), 10_000, seed=2))
        assert res.reliable_set_histogram == {frozenset({1, 2, 3}): 10_000}
        assert res.errors == 0

    def test_histogram_sums_to_frames(self):
        res = simulate_fer(SimConfig(snr_scenario(4, 2.0, 3.0, 3.0), 70_001, seed=3))
        assert sum(res.reliable_set_histogram.values()) == 70_001
        assert res.fer.samples == 70_001 and res.fer.kind is EstimateKind.SIMULATION

    def test_weak_flag(self):
        res = simulate_fer(SimConfig(snr_scenario(3, 1e3, 1e3, 1e3), 10_000, seed=4))
        assert res.errors < 50 and FLAG_WEAK in res.fer.flags
        busy = simulate_fer(SimConfig(snr_scenario(3, 1.0, 1.0, 1.0), 10_000, seed=4))
        assert FLAG_WEAK not in busy.fer.flags

    def test_mean_bhattacharyya_in_range(self):
        res = simulate_fer(SimConfig(snr_scenario(3, 2.0, 2.0, 2.0), 20_000, seed=5))
        assert 0.0 < res.mean_avg_bhattacharyya < 1.0

    def test_config_validation(self):
        scen = snr_scenario(2, 1.0, 1.0, 1.0)
        for bad in (dict(n_frames=9_999, seed=0), dict(n_frames=10_000, seed=-1),
                    dict(n_frames=10_000, seed=True), dict(n_frames=10_000, seed=2**64)):
            with pytest.raises(DomainError):
                SimConfig(scen, **bad)
        with pytest.raises(DomainError):
            simulate_point(scen, 10_000)
        assert simulate_point(scen.replace(seed=7), 10_000) == simulate_point(scen, 10_000, seed=7)


class TestReproducibility:
    def test_worker_count_does_not_matter(self):
        scen = snr_scenario(4, 2.0, 5.0, 5.0)
        a = simulate_fer(SimConfig(scen, 200_000, seed=11, workers=1))
        b = simulate_fer(SimConfig(scen, 200_000, seed=11, workers=4))
        assert a == b

    def test_seed_changes_result(self):
        scen = snr_scenario(4, 2.0, 5.0, 5.0)
        a = simulate_fer(SimConfig(scen, 50_000, seed=1))
        b = simulate_fer(SimConfig(scen, 50_000, seed=2))
        assert a.errors != b.errors

    def test_antithetic_is_unbiased(self):
        scen = snr_scenario(3, 2.0, 3.0, 3.0)
        res = simulate_fer(SimConfig(scen, 200_000, seed=6, antithetic=True))
        bound = fer_bound(scen.coop, scen.geometry, C, 400_000, seed=6)
        assert abs(res.fer.value - bound.value) <= res.fer.half_width + bound.half_width

    def test_single_frame_path_agrees(self):
        scen = snr_scenario(3, 1.0, 2.0, 2.0)
        rng = stream(0, 0)
        n = 20_000
        errs = sum(simulate_frame(rng, scen)[0] for _ in range(n))
        bound = fer_bound(scen.coop, scen.geometry, C, 400_000, seed=1)
        sigma = math.sqrt(bound.value * (1 - bound.value) / n)
        assert abs(errs / n - bound.value) <= 3 * sigma + bound.half_width


class TestAgainstAnalysis:
    @pytest.mark.parametrize("rho", [0.3, 1.0, 10.0])
    def test_reliable_set_histogram(self, rho):
        scen = snr_scenario(4, rho, 3.0, 3.0)
        n = 200_000
        res = simulate_fer(SimConfig(scen, n, seed=8))
        chi0 = broadcast_threshold(scen.coop, C)
        probs = reliable_set_prob(scen.coop, broadcast_snrs(scen.geometry), chi0)
        for f, p in probs.items():
            count = res.reliable_set_histogram.get(f, 0)
            assert abs(count - n * p) <= 3 * math.sqrt(n * p * (1 - p)) + 1

    def test_threshold_decoding_sits_on_the_bound(self):
        scen = snr_scenario(5, 1.0, db(6.0), db(6.0))
        res = simulate_fer(SimConfig(scen, 300_000, seed=9))
        bound = fer_bound(scen.coop, scen.geometry, C, 200_000, seed=9)
        joint = math.hypot(res.fer.sigma, bound.sigma)
        assert res.fer.value <= bound.value + 3 * joint
        assert abs(res.fer.value - bound.value) <= 4 * joint

    def test_importance_sampling_reaches_low_fer(self):
        scen = snr_scenario(3, 1e2, 1e2, 1e2)
        res = simulate_fer(SimConfig(scen, 200_000, seed=10, importance=True))
        bound = fer_bound(scen.coop, scen.geometry, C, 200_000, seed=10, importance=True)
        assert FLAG_IMPORTANCE in res.fer.flags
        assert bound.value < 1e-4
        assert abs(res.fer.value - bound.value) <= 3 * math.hypot(res.fer.sigma, bound.sigma)
        assert res.fer.half_width < 0.2 * res.fer.value


class TestBaselines:
    def test_direct_scenario_shape(self):
        scen = snr_scenario(4, 2.0, 5.0, 7.0)
        d = direct_scenario(scen)
        assert d.m == 1 and d.c_star == C
        assert d.geometry.distances[0, 1] == scen.geometry.distances[0, 4]

    def test_cooperation_beats_direct(self):
        cfg = SimConfig(snr_scenario(3, 10.0, 10.0, 10.0), 100_000, seed=12)
        coop = simulate_fer(cfg)
        direct = simulate_direct(cfg)
        assert coop.fer.value + coop.fer.half_width < direct.fer.value - direct.fer.half_width

    @pytest.mark.parametrize("eta,expected", [(0.0, False), (0.18, False), (0.19, True), (10.0, True)])
    def test_firf_threshold(self, eta, expected):
        assert simulate_firf_threshold(C, eta) is expected

    def test_firf_domain(self):
        with pytest.raises(DomainError):
            simulate_firf_threshold(C, -1.0)
