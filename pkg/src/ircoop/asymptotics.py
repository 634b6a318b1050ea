"""High-SNR behaviour of the FER bound: closed-form asymptotes for the
three cluster geometries, diversity-order estimation and the cooperative
coding gain.

Each asymptote is a sum over reliable sets F. In the high-energy limit a
helper is unreliable with probability about chi(tau_0) r_j^L / E, and the
code outage given F decays like a product of per-slot thresholds divided by
(|F| + 1)! (the volume of a simplex). Subsets are enumerated as bitmask rows,
so M is capped like the exact bound.
"""

from __future__ import annotations

import enum
import math
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import HypothesisViolated, InsufficientRange, InvalidGeometry
from .outage import EstimateKind, FerEstimate
from .protocol import CoopConfig, Geometry, _check_size
from .puncturing import is_self_decodable, punctured_threshold

# asymptotes above this are outside the regime where they mean anything
ASYMPTOTIC_FLAG_LEVEL = 0.1
FLAG_NOT_ASYMPTOTIC = "bound_above_0.1"


class ScenarioKind(enum.Enum):
    TRANSMITTER_CLUSTERING = "transmitter_clustering"
    RECEIVER_CLUSTERING = "receiver_clustering"
    CLUSTER_HOPPING = "cluster_hopping"


def tail_product_bound(taus: Sequence[float], c: float) -> float:
    """(1/Q!) prod_m ln(tau_m / (c - (1 - tau_m))).

    Upper bound on the high-SNR limit of prod_m lambda_m * P(sum_m tau_m exp(-nu_m lambda_m) > c)
    for i.i.d. Exp(1) variables nu_m.

    Raises:
        HypothesisViolated: unless the weights sum to one, c lies in (0, 1)
            and every tau_m > 1 - c.
    """
    taus = [float(t) for t in taus]
    if not taus:
        raise HypothesisViolated("need at least one weight")
    if not 0.0 < c < 1.0:
        raise HypothesisViolated(f"c must lie in (0, 1), got {c}")
    if abs(math.fsum(taus) - 1.0) > 1e-12:
        raise HypothesisViolated(f"weights must sum to 1, got {math.fsum(taus)!r}")
    for t in taus:
        if not t > 1.0 - c:
            raise HypothesisViolated(f"weight {t:.6g} is not above 1 - c = {1.0 - c:.6g}")
    logs = [math.log(t / (c - (1.0 - t))) for t in taus]
    return math.prod(logs) / math.factorial(len(taus))


def _subset_bits(n: int) -> np.ndarray:
    masks = np.arange(1 << n)
    return ((masks[:, None] >> np.arange(n)) & 1).astype(bool)


def _require_self_decodable(cfg: CoopConfig, c_star: float) -> None:
    for i, t in enumerate(cfg.taus):
        if not is_self_decodable(c_star, t):
            raise HypothesisViolated(
                f"tau_{i}={t:.6g} is not self-decodable for c_star={c_star:.6g}"
            )


def _hopping_sum(cfg: CoopConfig, r_l: np.ndarray, d_l: np.ndarray,
                 slot_factor: Callable[[np.ndarray], np.ndarray]) -> float:
    """sum_F g(tau_0)^(M-|F|-1) g(1 - tau_F) prod_{i in F} g(tau_i) / (|F|+1)!
    * prod_{j not in F} r_j^L prod_{j in F} d_j^L, with g = ``slot_factor``."""
    m = cfg.m
    _check_size(m)
    taus = np.asarray(cfg.taus)
    helpers = taus[1:]
    bits = _subset_bits(m - 1)
    size = bits.sum(axis=1)
    tau_f = bits @ helpers
    log_g = np.log(slot_factor(helpers)) if m > 1 else np.zeros(0)
    log_term = (
        (m - 1 - size) * math.log(slot_factor(np.array([taus[0]]))[0])
        + np.log(slot_factor(np.maximum(1.0 - tau_f, taus[0])))
        + bits @ log_g
        - gammaln(size + 2.0)
    )
    with np.errstate(divide="ignore"):
        log_geo = (~bits) @ np.log(r_l) + bits @ np.log(d_l)
    return float(np.exp(log_term + log_geo).sum())


def _hop_distances(geom: Geometry) -> tuple[np.ndarray, np.ndarray, float]:
    m = geom.m
    big_l = geom.path_loss
    r = geom.distances[0, 1:m]
    d = geom.distances[1:m, m]
    return r ** big_l, d ** big_l, float(geom.distances[0, m]) ** big_l


def _estimate(value: float) -> FerEstimate:
    flags = (FLAG_NOT_ASYMPTOTIC,) if value > ASYMPTOTIC_FLAG_LEVEL else ()
    return FerEstimate(value, EstimateKind.ASYMPTOTIC, flags=flags)


def fer_asym(kind: ScenarioKind, cfg: CoopConfig, geom: Geometry, c_star: float) -> FerEstimate:
    """High-energy FER asymptote for one of the three cluster geometries.

    Transmitter clustering (helpers at the sender) and receiver clustering
    (helpers at the destination) use only the sender-to-destination
    distance D. Cluster hopping uses every sender-to-helper and
    helper-to-destination distance. Values above 0.1 are returned as
    computed and flagged.

    Raises:
        HypothesisViolated: if some tau_i is not self-decodable.
        InvalidGeometry: if the geometry and configuration disagree on M.
    """
    if geom.m != cfg.m:
        raise InvalidGeometry(f"geometry has M={geom.m}, config has M={cfg.m}")
    _check_size(cfg.m)
    _require_self_decodable(cfg, c_star)
    m = cfg.m
    energy = geom.symbol_energy
    big_dl = float(geom.distances[0, m]) ** geom.path_loss

    if kind is ScenarioKind.TRANSMITTER_CLUSTERING:
        chis = math.prod(punctured_threshold(c_star, t) for t in cfg.taus)
        value = chis / math.factorial(m) * (big_dl / energy) ** m
    elif kind is ScenarioKind.RECEIVER_CLUSTERING:
        chi0 = punctured_threshold(c_star, cfg.taus[0])
        value = chi0 ** (m - 1) * c_star * (big_dl / energy) ** m
    elif kind is ScenarioKind.CLUSTER_HOPPING:
        r_l, d_l, big_dl = _hop_distances(geom)
        chi = np.vectorize(lambda t: punctured_threshold(c_star, float(t)), otypes=[float])
        value = _hopping_sum(cfg, r_l, d_l, chi) * big_dl / energy ** m
    else:
        raise ValueError(f"unknown scenario kind {kind!r}")
    return _estimate(value)


def fer_asym_small_cstar(cfg: CoopConfig, geom: Geometry, c_star: float) -> FerEstimate:
    """Cluster-hopping asymptote with every chi(tau) replaced by c_star / tau.

    Valid for large energy and small c_star; the replacement is a lower
    approximation of chi, so this is not an upper bound for larger c_star.
    """
    if geom.m != cfg.m:
        raise InvalidGeometry(f"geometry has M={geom.m}, config has M={cfg.m}")
    _check_size(cfg.m)
    _require_self_decodable(cfg, c_star)
    r_l, d_l, big_dl = _hop_distances(geom)
    value = _hopping_sum(cfg, r_l, d_l, lambda t: c_star / t) * big_dl / geom.symbol_energy ** cfg.m
    return _estimate(value)


def coding_gain_bound(cfg: CoopConfig, geom: Geometry, c_star: float) -> float:
    """Lower bound on c_star times the cooperative coding gain.

    The small-c_star hopping sum with distances normalized by D, raised to
    the power -1/M. It depends on c_star only through the self-decodability
    check.
    """
    if geom.m != cfg.m:
        raise InvalidGeometry(f"geometry has M={geom.m}, config has M={cfg.m}")
    _check_size(cfg.m)
    _require_self_decodable(cfg, c_star)
    r_l, d_l, big_dl = _hop_distances(geom)
    s = _hopping_sum(cfg, r_l / big_dl, d_l / big_dl, lambda t: 1.0 / t)
    return s ** (-1.0 / cfg.m)


def diversity_estimate(curve: Iterable[tuple[float, float]]) -> float:
    """Slope of -log FER against log SNR over the highest SNR decade.

    Args:
        curve: (linear SNR, FER) pairs, at least 4 of them spanning at least
            two decades of SNR, all FER positive.

    Raises:
        InsufficientRange: on too few points, too narrow a span, a
            nonpositive value, or fewer than two points in the top decade.
    """
    pts = sorted((float(s), float(f)) for s, f in curve)
    if len(pts) < 4:
        raise InsufficientRange(f"need at least 4 points, got {len(pts)}")
    snr = np.array([p[0] for p in pts])
    fer = np.array([p[1] for p in pts])
    if np.any(snr <= 0.0) or np.any(fer <= 0.0):
        raise InsufficientRange("SNR and FER values must be positive")
    if snr[-1] < 100.0 * snr[0] * (1.0 - 1e-12):
        raise InsufficientRange("points must span at least two decades of SNR")
    top = snr >= snr[-1] / 10.0 * (1.0 - 1e-12)
    if np.count_nonzero(top) < 2:
        raise InsufficientRange("need at least two points in the highest decade")
    slope = np.polyfit(np.log(snr[top]), np.log(fer[top]), 1)[0]
    return float(-slope)
