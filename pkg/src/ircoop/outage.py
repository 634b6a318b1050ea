"""Code-outage probabilities and the average FER upper bound.

Under the threshold abstraction a frame is lost exactly when the slot-averaged
Bhattacharyya parameter reaches exp(-c_star). Given the reliable set F this
is the code outage probability G(M, F, SNR); averaging over the reliable-set
distribution gives the FER bound. G has closed forms for F empty (and hence
M = 1) and a one-dimensional integral for M = 2; otherwise it is estimated by
Monte Carlo with antithetic exponential fading powers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy import integrate
from scipy.stats import norm

from . import _rng
from .errors import AssumptionViolated, DomainError
from .protocol import (
    CoopConfig, Geometry, _check_size, broadcast_snrs, check_reliable_set,
    destination_snrs, mask_to_set, reliable_probabilities, reliable_set_table, set_to_mask,
)
from .puncturing import is_self_decodable, punctured_threshold

Z99 = float(norm.ppf(0.995))
MIN_OUTAGE_SAMPLES = 10_000


class EstimateKind(enum.Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"
    MC_INTEGRAL = "mc_integral"
    SIMULATION = "simulation"
    ASYMPTOTIC = "asymptotic"


@dataclass(frozen=True)
class FerEstimate:
    """A FER number with its provenance.

    ``half_width`` is a 99% confidence half-interval (zero for
    deterministic kinds) and ``samples`` the Monte Carlo sample count.
    Asymptotic bounds are closed-form expressions and may exceed one.
    """

    value: float
    kind: EstimateKind
    half_width: float = 0.0
    samples: int = 0
    flags: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "half_width", float(self.half_width))
        object.__setattr__(self, "samples", int(self.samples))
        object.__setattr__(self, "flags", tuple(self.flags))
        if not self.half_width >= 0.0:
            raise ValueError(f"half width must be nonnegative, got {self.half_width}")
        if self.kind is not EstimateKind.ASYMPTOTIC and not 0.0 <= self.value <= 1.0:
            raise ValueError(f"FER must lie in [0, 1], got {self.value}")

    @property
    def sigma(self) -> float:
        """Standard error implied by the 99% half-width."""
        return self.half_width / Z99


def wilson_half_width(successes: float, n: int, z: float = Z99) -> float:
    """Half the length of the Wilson score interval for a binomial proportion."""
    p = successes / n
    denom = 1.0 + z * z / n
    return z / denom * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n))


def outage_m1(c_star: float, snr: float) -> FerEstimate:
    """Direct transmission: P(nu * SNR <= c_star) = 1 - exp(-c_star / SNR)."""
    if not snr > 0.0:
        raise DomainError(f"SNR must be positive, got {snr}")
    return FerEstimate(-math.expm1(-c_star / snr), EstimateKind.CLOSED_FORM)


def outage_m2_cooperative(c_star: float, tau0: float, tau1: float,
                          snr02: float, snr12: float) -> FerEstimate:
    """G(2, {1}, SNR) for one reliable helper, by adaptive quadrature.

    With x = exp(-nu_02) uniform on (0, 1], the outage probability is

        1 - omega - int_omega^1 [(exp(-c) - tau0 x^SNR02) / tau1]^(1/SNR12) dx,

    omega = exp(-chi(tau0) / SNR02). Substituting x = exp(-t / SNR02) folds
    1 - omega into the same integral,

        G = SNR02^-1 int_0^chi(tau0) (1 - b(t)^(1/SNR12)) exp(-t / SNR02) dt,
        b(t) = (exp(-c) - tau0 exp(-t)) / tau1,

    which avoids cancellation at high SNR. b is clamped to [0, 1].

    Raises:
        AssumptionViolated: unless tau0 + tau1 = 1 and tau0, tau1 <= exp(-c_star).
    """
    if abs(tau0 + tau1 - 1.0) > 1e-12 or tau0 <= 0.0 or tau1 <= 0.0:
        raise AssumptionViolated(f"tau0 + tau1 must equal 1, got {tau0} + {tau1}")
    e = math.exp(-c_star)
    if tau0 > e or tau1 > e:
        raise AssumptionViolated(
            f"closed form needs tau0, tau1 <= exp(-c_star) = {e:.6g}; got {tau0:.6g}, {tau1:.6g}"
        )
    if not (snr02 > 0.0 and snr12 > 0.0):
        raise DomainError("SNRs must be positive")
    if snr02 == math.inf or snr12 == math.inf:
        return FerEstimate(0.0, EstimateKind.QUADRATURE)
    if not is_self_decodable(c_star, tau0):
        # tau1 == exp(-c): the helper block alone reaches the threshold only with a perfect channel
        chi0 = math.inf
    else:
        chi0 = punctured_threshold(c_star, tau0)

    def integrand(t):
        b = (e - tau0 * math.exp(-t)) / tau1
        b = min(1.0, max(0.0, b))
        miss = 1.0 if b == 0.0 else -math.expm1(math.log(b) / snr12)
        return miss * math.exp(-t / snr02)

    upper = chi0 if chi0 < math.inf else 50.0 * snr02 + 50.0
    val, _ = integrate.quad(integrand, 0.0, upper, epsabs=1e-12, epsrel=1e-11, limit=400)
    return FerEstimate(min(1.0, max(0.0, val / snr02)), EstimateKind.QUADRATURE)


def _outage_block(rng, size, members, weights, snrs, threshold, antithetic, mu):
    # one column per transmitting node so that common random numbers line up across calls
    nu = _rng.exponentials(_rng.uniforms(rng, size, len(members), antithetic))
    log_w = np.zeros(size)
    if mu is not None:
        nu, log_w = _rng.defensive_mixture(nu, _rng.uniforms(rng, size, len(members)), mu)
    gbar = np.exp(-nu * snrs[members]) @ weights
    w = np.exp(log_w) * (gbar >= threshold)
    return int(np.count_nonzero(gbar >= threshold)), float(w.sum()), float((w * w).sum())


def outage_given_set(cfg: CoopConfig, f: Iterable[int], snrs, c_star: float,
                     n_samples: int, seed: int, antithetic: bool = True,
                     workers: int = 1, importance: bool = False) -> FerEstimate:
    """Monte Carlo estimate of G(M, F, SNR) = P(avg Bhattacharyya >= exp(-c_star)).

    Fading powers are i.i.d. Exp(1); with ``antithetic`` the second half of
    each block reuses the uniforms of the first half mirrored (u -> 1 - u).
    The estimate is deterministic in ``seed``, and the same seed across an
    SNR sweep gives common random numbers. The reported half-width is the
    99% Wilson interval of a binomial proportion, which is conservative
    under antithetic pairing.

    ``importance`` draws each fading power from an even mixture of Exp(1)
    and an exponential at the link's outage scale, reweighting by the
    likelihood ratio; the half-width is then the normal approximation of
    the weighted mean. Needed only for probabilities far below 1/n_samples.
    """
    if n_samples < MIN_OUTAGE_SAMPLES:
        raise DomainError(f"need at least {MIN_OUTAGE_SAMPLES} samples, got {n_samples}")
    f = check_reliable_set(f, cfg.m)
    snrs = np.asarray(snrs, dtype=float)
    members = [0] + sorted(f)
    taus = np.asarray(cfg.taus)
    weights = np.array([1.0 - taus[members[1:]].sum()] + [taus[i] for i in members[1:]])
    threshold = math.exp(-c_star)
    tag = _rng.make_tag(_rng.OUTAGE, set_to_mask(f))
    mu = None
    if importance:
        mu = np.clip(c_star / (weights * snrs[members]), 1e-300, 1.0)

    def work(b, size):
        return _outage_block(_rng.stream(seed, b, tag), size, members, weights, snrs,
                             threshold, antithetic, mu)

    parts = _rng.run_blocks(work, _rng.block_sizes(n_samples), workers)
    hits = sum(p[0] for p in parts)
    if not importance:
        return FerEstimate(hits / n_samples, EstimateKind.MC_INTEGRAL,
                           wilson_half_width(hits, n_samples), n_samples)
    mean = math.fsum(p[1] for p in parts) / n_samples
    var = max(math.fsum(p[2] for p in parts) / n_samples - mean * mean, 0.0)
    return FerEstimate(min(mean, 1.0), EstimateKind.MC_INTEGRAL,
                       Z99 * math.sqrt(var / n_samples), n_samples, ("importance_sampled",))


def broadcast_threshold(cfg: CoopConfig, c_star: float) -> float:
    """chi(tau_0), or infinity when the broadcast block is not self-decodable
    (no helper can then ever decode from slot 0 alone)."""
    if is_self_decodable(c_star, cfg.taus[0]):
        return punctured_threshold(c_star, cfg.taus[0])
    return math.inf


def fer_bound(cfg: CoopConfig, geom: Geometry, c_star: float,
              n_samples: int = 100_000, seed: Optional[int] = 0,
              workers: int = 1, importance: bool = False) -> FerEstimate:
    """FER upper bound: sum over reliable sets of P(F) * G(M, F, SNR).

    G is closed form for F empty and uses the quadrature of
    :func:`outage_m2_cooperative` for M = 2 when its assumption holds;
    other terms are Monte Carlo estimates with ``n_samples`` each. Half-widths
    are combined as sum P(F) * hw(F).
    """
    m = cfg.m
    _check_size(m)
    if geom.m != m:
        raise ValueError(f"geometry has M={geom.m}, config has M={m}")
    dest = destination_snrs(geom)
    if m == 1:
        return outage_m1(c_star, dest[0])

    chi0 = broadcast_threshold(cfg, c_star)
    table = reliable_set_table(reliable_probabilities(broadcast_snrs(geom), chi0))
    e = math.exp(-c_star)
    use_quad = m == 2 and cfg.taus[0] <= e and cfg.taus[1] <= e

    value = 0.0
    hw = 0.0
    kinds = set()
    for mask, p in enumerate(table):
        if p == 0.0:
            continue
        if mask == 0:
            g = outage_m1(c_star, dest[0])
        elif use_quad:
            g = outage_m2_cooperative(c_star, cfg.taus[0], cfg.taus[1], dest[0], dest[1])
        else:
            g = outage_given_set(cfg, mask_to_set(mask), dest, c_star, n_samples, seed,
                                 workers=workers, importance=importance)
        kinds.add(g.kind)
        value += p * g.value
        hw += p * g.half_width

    if EstimateKind.MC_INTEGRAL in kinds:
        kind, samples = EstimateKind.MC_INTEGRAL, n_samples
    elif EstimateKind.QUADRATURE in kinds:
        kind, samples = EstimateKind.QUADRATURE, 0
    else:
        kind, samples = EstimateKind.CLOSED_FORM, 0
    flags = ("importance_sampled",) if importance and kind is EstimateKind.MC_INTEGRAL else ()
    return FerEstimate(min(1.0, max(0.0, value)), kind, hw, samples, flags)
