"""Symbol energy needed to meet a target FER, and the resulting savings.

Energies come from setting a high-SNR FER asymptote equal to the target
epsilon and solving for E. Savings are ratios of the direct-transmission
energy to the cooperative one; they do not depend on the code threshold or
the link distance, because both energies scale with c_star * D^L.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize
from scipy.special import comb, gammaln

from .errors import DomainError, HypothesisViolated, InfeasibleTauRange
from .puncturing import is_self_decodable, self_decodable_floor

TAU_GUARDBAND = 1e-9
TAU_GRID_POINTS = 201


class EnergyMode(enum.Enum):
    DIRECT = "direct"
    TRANSMITTER_CLUSTERING = "transmitter_clustering"
    FIRF = "firf"
    KAPPA_HOPPING = "kappa_hopping"


@dataclass(frozen=True)
class EnergyQuery:
    """Target FER ``epsilon`` for an M-node cluster over distance D.

    ``kappa`` is the sender-to-cluster distance as a fraction of D, used
    only by the hopping geometry (helpers on the line at kappa * D).
    """

    epsilon: float
    m: int
    c_star: float
    path_loss: float = 3.0
    distance: float = 1.0
    kappa: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"M must be a positive integer, got {self.m}")
        if self.kappa is not None and not 0.0 < self.kappa < 1.0:
            raise DomainError(f"kappa must lie in (0, 1), got {self.kappa}")
        if not self.c_star > 0.0:
            raise DomainError(f"c_star must be positive, got {self.c_star}")
        if not (self.path_loss > 0.0 and self.distance > 0.0):
            raise DomainError("path loss and distance must be positive")

    def with_(self, **changes) -> "EnergyQuery":
        return EnergyQuery(**{**self.__dict__, **changes})


def _helper_tau(m: int, tau0: float) -> float:
    return (1.0 - tau0) / (m - 1)


def _kappa_sum(q: EnergyQuery, tau0: float) -> float:
    """sum_k C(M-1,k) kappa^{L(M-k-1)} (1-kappa)^{Lk} / [tau0^{M-k-1} tau^k (1-k tau) (k+1)!]."""
    m, big_l, kappa = q.m, q.path_loss, q.kappa
    if m == 1:
        return 1.0
    tau = _helper_tau(m, tau0)
    k = np.arange(m)
    log_terms = (
        np.log(comb(m - 1, k))
        + big_l * (m - k - 1) * math.log(kappa)
        + big_l * k * math.log1p(-kappa)
        - (m - k - 1) * math.log(tau0)
        - k * math.log(tau)
        - np.log(1.0 - k * tau)
        - gammaln(k + 2.0)
    )
    return float(np.exp(log_terms).sum())


def _check_kappa_taus(q: EnergyQuery, tau0: float) -> None:
    if q.m == 1:
        return
    if not 0.0 < tau0 < 1.0:
        raise HypothesisViolated(f"tau0 must lie in (0, 1), got {tau0}")
    tau = _helper_tau(q.m, tau0)
    if not (is_self_decodable(q.c_star, tau0) and is_self_decodable(q.c_star, tau)):
        raise HypothesisViolated(
            f"tau0={tau0:.6g} and helper share {tau:.6g} must both exceed "
            f"1-exp(-c_star)={self_decodable_floor(q.c_star):.6g}"
        )


def achievable_energy(q: EnergyQuery, mode: EnergyMode, tau0: Optional[float] = None,
                      exact: bool = False) -> float:
    """Symbol energy at which the relevant asymptote equals epsilon.

    DIRECT gives c_star D^L / epsilon. TRANSMITTER_CLUSTERING uses the
    Stirling form c_star e D^L / (epsilon sqrt(2 pi M))^(1/M), or with
    ``exact`` the solution of (M c_star D^L / E)^M / M! = epsilon. FIRF is
    the reliability threshold (e^c_star - 1) D^L of the fully interleaved
    channel and ignores epsilon. KAPPA_HOPPING needs ``tau0`` and ``q.kappa``.
    """
    scale = q.c_star * q.distance ** q.path_loss
    m, eps = q.m, q.epsilon
    if mode is EnergyMode.DIRECT:
        return scale / eps
    if mode is EnergyMode.TRANSMITTER_CLUSTERING:
        if exact:
            if m <= 170:
                return m * scale / (math.factorial(m) * eps) ** (1.0 / m)
            return m * scale / math.exp((math.lgamma(m + 1) + math.log(eps)) / m)
        return scale * math.e / (eps * math.sqrt(2.0 * math.pi * m)) ** (1.0 / m)
    if mode is EnergyMode.FIRF:
        return math.expm1(q.c_star) * q.distance ** q.path_loss
    if mode is EnergyMode.KAPPA_HOPPING:
        if q.kappa is None:
            raise HypothesisViolated("hopping energy needs kappa")
        if tau0 is None:
            raise HypothesisViolated("hopping energy needs tau0")
        _check_kappa_taus(q, tau0)
        return scale * (_kappa_sum(q, tau0) / eps) ** (1.0 / m)
    raise ValueError(f"unknown energy mode {mode!r}")


def energy_saving(q: EnergyQuery, exact: bool = False) -> float:
    """Linear saving of transmitter clustering over direct transmission.

    Stirling form (2 pi M)^(1/2M) / (e epsilon^(1-1/M)) by default,
    (M!)^(1/M) / (M epsilon^(1-1/M)) with ``exact``.
    """
    m, eps = q.m, q.epsilon
    if m < 2:
        raise DomainError("energy saving needs M >= 2")
    tail = eps ** (1.0 - 1.0 / m)
    if exact:
        return math.exp(math.lgamma(m + 1) / m) / (m * tail)
    return (2.0 * math.pi * m) ** (1.0 / (2 * m)) / (math.e * tail)


def energy_saving_firf(q: EnergyQuery) -> float:
    """Saving of the fully interleaved channel over direct transmission, always below 1/epsilon."""
    return q.c_star / (math.expm1(q.c_star) * q.epsilon)


def energy_saving_kappa(q: EnergyQuery, tau0: float, strict: bool = True) -> float:
    """Saving of the hopping cluster with helpers at kappa * D.

    Computed as (epsilon^(M-1) S)^(-1/M) with S the binomial sum over the
    number of reliable helpers; neither c_star nor D enters. With
    ``strict`` the broadcast share and the helper share (1 - tau0)/(M - 1)
    must be self-decodable; ``strict=False`` evaluates the formula anyway.
    """
    if q.kappa is None:
        raise HypothesisViolated("kappa is required")
    if strict:
        _check_kappa_taus(q, tau0)
    elif q.m > 1 and not 0.0 < tau0 < 1.0:
        raise HypothesisViolated(f"tau0 must lie in (0, 1), got {tau0}")
    m = q.m
    return (q.epsilon ** (m - 1) * _kappa_sum(q, tau0)) ** (-1.0 / m)


def feasible_tau0_range(q: EnergyQuery) -> tuple[float, float]:
    """Open interval of tau0 keeping both slot shares self-decodable, shrunk by the guardband."""
    floor = self_decodable_floor(q.c_star) + TAU_GUARDBAND
    lo = floor
    hi = 1.0 - (q.m - 1) * floor
    if not lo < hi:
        raise InfeasibleTauRange(
            f"no feasible tau0 for M={q.m}, c_star={q.c_star:.6g}: need {lo:.6g} < tau0 < {hi:.6g}"
        )
    return lo, hi


def optimize_tau0(q: EnergyQuery, kappa: Optional[float] = None) -> tuple[float, float]:
    """Broadcast share maximizing the hopping saving.

    A uniform grid over the feasible range locates the best cell, then a
    bounded Brent search refines it. Returns (tau0, saving).
    """
    if kappa is not None:
        q = q.with_(kappa=kappa)
    if q.kappa is None:
        raise HypothesisViolated("kappa is required")
    if q.m == 1:
        return 1.0, 1.0
    lo, hi = feasible_tau0_range(q)
    grid = np.linspace(lo, hi, TAU_GRID_POINTS)
    vals = np.array([energy_saving_kappa(q, t) for t in grid])
    k = int(np.argmax(vals))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = optimize.minimize_scalar(lambda t: -energy_saving_kappa(q, t), bounds=(a, b),
                                   method="bounded", options={"xatol": 1e-12})
    if -res.fun >= vals[k]:
        return float(res.x), float(-res.fun)
    return float(grid[k]), float(vals[k])


def to_db(x):
    return 10.0 * np.log10(x)
