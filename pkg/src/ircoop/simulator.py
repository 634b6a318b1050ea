"""Frame-level Monte Carlo of the cooperation protocol under threshold decoding.

A frame is lost exactly when the slot-averaged Bhattacharyya parameter
toward the destination reaches exp(-c_star); finite-length decoding losses
are not modelled. Frames are drawn in blocks of independent counter-based
streams, so results depend only on the seed and not on the worker count.

Within a block, uniforms are drawn one column per link in a fixed order:
the sender-to-destination link first, then helper-to-destination links,
then sender-to-helper links. A direct-transmission run with the same seed
therefore sees the same sender-to-destination fading as the cooperative
run (common random numbers).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _rng
from .errors import DomainError
from .outage import EstimateKind, FerEstimate, Z99, broadcast_threshold, wilson_half_width
from .protocol import (
    CoopConfig, Geometry, Scenario, broadcast_snrs, destination_snrs, mask_to_set,
)

MIN_FRAMES = 10_000
WEAK_ERROR_COUNT = 50
MIN_SCALE = 1e-300
FLAG_WEAK = "statistically_weak"
FLAG_IMPORTANCE = "importance_sampled"


@dataclass(frozen=True)
class SimConfig:
    """Simulation request.

    ``importance`` draws each fading power from an even mixture of Exp(1)
    and an exponential shrunk to the link's outage scale, and reweights by
    the likelihood ratio. The mixture keeps the weights bounded by 2, so
    the estimator stays unbiased with finite variance; it is what makes
    FERs far below 1/n_frames measurable.
    """

    scenario: Scenario
    n_frames: int
    seed: int
    antithetic: bool = False
    importance: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.n_frames < MIN_FRAMES:
            raise DomainError(f"need at least {MIN_FRAMES} frames, got {self.n_frames}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) \
                or not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")


@dataclass(frozen=True)
class SimResult:
    """FER estimate, reliable-set counts and the mean slot-averaged Bhattacharyya parameter.

    Histogram counts always sum to the number of frames. Under importance
    sampling they count proposal draws, not the nominal distribution.
    """

    fer: FerEstimate
    reliable_set_histogram: dict = field(repr=False)
    mean_avg_bhattacharyya: float
    errors: int


class _Model:
    """Per-scenario constants shared by every block."""

    def __init__(self, scenario: Scenario, importance: bool):
        cfg = scenario.coop
        self.m = cfg.m
        self.taus = np.asarray(cfg.taus)
        self.dest = destination_snrs(scenario.geometry)
        self.bcast = broadcast_snrs(scenario.geometry)
        self.chi0 = broadcast_threshold(cfg, scenario.c_star) if self.m > 1 else math.inf
        self.threshold = math.exp(-scenario.c_star)
        self.importance = importance
        if importance:
            # outage-relevant scale of each link: the fading power below which it stops helping
            dest_scale = scenario.c_star / np.concatenate([[1.0], self.taus[1:]])
            self.mu_dest = np.clip(dest_scale / self.dest, MIN_SCALE, 1.0)
            bc_scale = self.chi0 if self.chi0 < math.inf else 1.0
            self.mu_bcast = np.clip(bc_scale / self.bcast, MIN_SCALE, 1.0)


def _block(model: _Model, rng: np.random.Generator, size: int, antithetic: bool):
    m = model.m
    n_links = 2 * m - 1
    nu = _rng.exponentials(_rng.uniforms(rng, size, n_links, antithetic))
    nu_dest, nu_bc = nu[:, :m], nu[:, m:]
    log_w = np.zeros(size)
    if model.importance:
        sel = _rng.uniforms(rng, size, n_links)
        nu_dest, lw1 = _rng.defensive_mixture(nu_dest, sel[:, :m], model.mu_dest)
        nu_bc, lw2 = _rng.defensive_mixture(nu_bc, sel[:, m:], model.mu_bcast)
        log_w = lw1 + lw2

    reliable = nu_bc * model.bcast > model.chi0
    masks = reliable @ (1 << np.arange(m - 1)) if m > 1 else np.zeros(size, dtype=np.int64)

    gains = np.exp(-nu_dest * model.dest)
    helper_taus = model.taus[1:]
    own = reliable * helper_taus
    gbar = gains[:, 0] * (1.0 - own.sum(axis=1)) + (own * gains[:, 1:]).sum(axis=1)
    err = gbar >= model.threshold

    w = np.exp(log_w)
    we = w * err
    counts = np.bincount(masks, minlength=1 << (m - 1))
    return (int(err.sum()), float(we.sum()), float((we * we).sum()), counts, float((w * gbar).sum()))


def simulate_frame(rng: np.random.Generator, scenario: Scenario) -> tuple[bool, frozenset]:
    """One frame: (frame error, reliable set)."""
    model = _Model(scenario, importance=False)
    m = model.m
    u = np.array([[rng.random() for _ in range(2 * m - 1)]])
    nu = _rng.exponentials(u)[0]
    nu_dest, nu_bc = nu[:m], nu[m:]
    f = frozenset(j + 1 for j in range(m - 1) if nu_bc[j] * model.bcast[j] > model.chi0)
    gbar = math.exp(-nu_dest[0] * model.dest[0]) * (1.0 - sum(model.taus[j] for j in f))
    gbar += sum(model.taus[j] * math.exp(-nu_dest[j] * model.dest[j]) for j in f)
    return gbar >= model.threshold, f


def simulate_fer(cfg: SimConfig) -> SimResult:
    """Estimate the FER of a scenario with ``cfg.n_frames`` frames.

    Plain sampling reports the 99% Wilson half-width; importance sampling
    reports 99% of the normal-approximation half-width of the weighted
    mean. Fewer than 50 observed errors adds a weak-statistics flag.
    """
    model = _Model(cfg.scenario, cfg.importance)
    tag = _rng.make_tag(_rng.SIMULATION, 0)

    def work(b, size):
        return _block(model, _rng.stream(cfg.seed, b, tag), size, cfg.antithetic)

    parts = _rng.run_blocks(work, _rng.block_sizes(cfg.n_frames), cfg.workers)
    n = cfg.n_frames
    errors = sum(p[0] for p in parts)
    wsum = math.fsum(p[1] for p in parts)
    wsq = math.fsum(p[2] for p in parts)
    counts = np.sum([p[3] for p in parts], axis=0)
    gsum = math.fsum(p[4] for p in parts)

    flags = []
    if cfg.importance:
        fer = wsum / n
        var = max(wsq / n - fer * fer, 0.0)
        hw = Z99 * math.sqrt(var / n)
        flags.append(FLAG_IMPORTANCE)
        fer = min(fer, 1.0)
    else:
        fer = errors / n
        hw = wilson_half_width(errors, n)
    if errors < WEAK_ERROR_COUNT:
        flags.append(FLAG_WEAK)
    histogram = {mask_to_set(k): int(c) for k, c in enumerate(counts) if c}
    return SimResult(
        FerEstimate(fer, EstimateKind.SIMULATION, hw, n, tuple(flags)),
        histogram, gsum / n, errors,
    )


def direct_scenario(scenario: Scenario) -> Scenario:
    """The same sender, destination and energy without any helpers."""
    g = scenario.geometry
    m = g.m
    geom = Geometry.from_profile(1, math.nan, math.nan, float(g.distances[0, m]),
                                 g.path_loss, g.symbol_energy)
    return scenario.replace(geometry=geom, coop=CoopConfig.uniform(1))


def simulate_direct(cfg: SimConfig) -> SimResult:
    """Direct-transmission baseline, sharing the sender-to-destination fading of ``cfg``."""
    return simulate_fer(SimConfig(direct_scenario(cfg.scenario), cfg.n_frames, cfg.seed,
                                  cfg.antithetic, cfg.importance, cfg.workers))


def simulate_firf_threshold(c_star: float, eta: float) -> bool:
    """Whether a fully interleaved Rayleigh channel at SNR ``eta`` is below the code threshold."""
    if not eta >= 0.0:
        raise DomainError(f"SNR must be nonnegative, got {eta}")
    return eta > math.expm1(c_star)


def simulate_point(scenario: Scenario, n_frames: int, seed: Optional[int] = None, **kwargs) -> SimResult:
    """Convenience wrapper taking the seed from the scenario when not given."""
    seed = scenario.seed if seed is None else seed
    if seed is None:
        raise DomainError("simulation needs an explicit seed")
    return simulate_fer(SimConfig(scenario, n_frames, seed, **kwargs))
