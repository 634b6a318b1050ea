"""Thresholds of randomly punctured codes and decoding-delay mitigation.

A code that keeps each bit with probability ``tau`` sends the punctured
bits through a useless channel (Bhattacharyya parameter 1). The mother
code's simple threshold c_star then becomes an SNR threshold

    chi(tau) = ln(tau / (exp(-c_star) - (1 - tau)))

which exists only when tau > 1 - exp(-c_star) (the block is
self-decodable). All thresholds are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, MarginTooLarge, NotReliable, NotSelfDecodable


def self_decodable_floor(c_star: float) -> float:
    """Smallest survival fraction excluded from self-decodability, 1 - exp(-c_star)."""
    return -math.expm1(-c_star)


def is_self_decodable(c_star: float, tau: float) -> bool:
    if c_star < 0.0:
        raise DomainError(f"c_star must be nonnegative, got {c_star}")
    if not 0.0 < tau <= 1.0:
        raise DomainError(f"tau must lie in (0, 1], got {tau}")
    return tau > self_decodable_floor(c_star)


def punctured_threshold(c_star: float, tau: float) -> float:
    """SNR threshold chi(tau) of the randomly punctured code.

    Raises:
        NotSelfDecodable: when tau <= 1 - exp(-c_star).
    """
    if not is_self_decodable(c_star, tau):
        raise NotSelfDecodable(
            f"tau={tau:.6g} is not above 1-exp(-c_star)={self_decodable_floor(c_star):.6g}"
        )
    # exp(-c) - (1 - tau) written to keep precision when both terms are near 1
    denom = tau - self_decodable_floor(c_star)
    return math.log(tau / denom)


@dataclass(frozen=True)
class PunctureParams:
    c_star: float
    tau: float

    @property
    def self_decodable(self) -> bool:
        return is_self_decodable(self.c_star, self.tau)

    @property
    def threshold(self) -> float:
        return punctured_threshold(self.c_star, self.tau)


def effective_listen_fraction(c_star: float, theta: float, tau0: float, margin: float = 0.01) -> float:
    """Early-stopping listen fraction for a reliable helper.

    A helper whose instantaneous SNR ``theta`` exceeds chi(tau0) can stop
    listening after any fraction tau' with

        (1 - exp(-c_star)) / (1 - exp(-theta)) < tau' < tau0.

    The lower endpoint is returned, inflated by the factor ``1 + margin``
    (``margin = 0`` gives the infimum itself).

    Raises:
        NotReliable: if theta <= chi(tau0).
        MarginTooLarge: if the inflated value is not below tau0.
    """
    if margin < 0.0:
        raise DomainError(f"margin must be nonnegative, got {margin}")
    chi0 = punctured_threshold(c_star, tau0)
    if not theta > chi0:
        raise NotReliable(f"theta={theta:.6g} does not exceed chi(tau0)={chi0:.6g}")
    tau_min = self_decodable_floor(c_star) / -math.expm1(-theta)
    tau_eff = tau_min * (1.0 + margin)
    if tau_eff >= tau0:
        raise MarginTooLarge(f"listen fraction {tau_eff:.6g} is not below tau0={tau0:.6g}")
    return tau_eff


def adjusted_threshold(c_star: float, tau0: float, tau_d: float) -> float:
    """Reliability threshold chi(tau0 - tau_d) that reserves tau_d of slot 0 for decoding."""
    if tau_d < 0.0:
        raise DomainError(f"decoding-latency fraction must be nonnegative, got {tau_d}")
    tau = tau0 - tau_d
    if tau <= 0.0:
        raise NotSelfDecodable(f"tau0 - tau_d = {tau:.6g} leaves nothing to listen to")
    return punctured_threshold(c_star, tau)
