"""Weight spectra of good binary code ensembles and the code thresholds
derived from them.

A spectrum is the sampled asymptotic weight exponent r(delta) (nats) of an
ensemble of rate R. Between samples r is interpolated linearly; every
supremum is taken over the union of the sample points and a uniform
refinement grid of 10^5 points. Because r(delta)/delta and the exponent gap
to the random binary ensemble are evaluated on the same grid for every
weight partition, all derived quantities are exactly monotone in the
partition parameter.

Normalized weights below the first sample are ignored: vanishing-weight
codewords are assumed negligible for a good ensemble, which is a trust
assumption on the input and is not checked.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Union

import numpy as np
from scipy.special import entr

from .channels import LOG2E
from .errors import DomainError, InfeasibleSpectrum, RateBoundViolation, SpectrumFormatError

REFINE_POINTS = 100_000
MIN_SAMPLES = 16
COARSE_P_POINTS = 512
RATE_BOUND_SLACK = 1e-9


def binary_entropy(delta):
    """Binary entropy in nats, with H(0) = H(1) = 0."""
    delta = np.asarray(delta, dtype=float)
    return entr(delta) + entr(1.0 - delta)


def random_binary_exponent(rate: float, delta):
    """Weight exponent of the random binary ensemble, H(delta) - (1 - R) ln 2.

    Args:
        rate: code rate R in (0, 1).
        delta: normalized Hamming weight(s) in (0, 1].

    Returns:
        Exponent in nats; a float for scalar input, an array otherwise.
    """
    if not 0.0 < rate < 1.0:
        raise DomainError(f"rate must lie in (0, 1), got {rate}")
    d = np.asarray(delta, dtype=float)
    if np.any(~(d > 0.0)) or np.any(d > 1.0):
        raise DomainError("normalized weight must lie in (0, 1]")
    out = binary_entropy(d) - (1.0 - rate) * math.log(2.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class WeightSpectrum:
    """Sampled asymptotic weight exponent of a code ensemble.

    Attributes:
        rate: code rate R.
        deltas: strictly increasing normalized weights, first > 0, last == 1.
        exponents: r(delta_k) in nats.
        label: free-form description.
    """

    rate: float
    deltas: np.ndarray
    exponents: np.ndarray
    label: str = ""

    def __post_init__(self):
        d = np.array(self.deltas, dtype=float)
        r = np.array(self.exponents, dtype=float)
        if not 0.0 < float(self.rate) < 1.0:
            raise SpectrumFormatError(f"rate must lie in (0, 1), got {self.rate}")
        if d.ndim != 1 or d.shape != r.shape:
            raise SpectrumFormatError("deltas and exponents must be 1-D arrays of equal length")
        if d.size < MIN_SAMPLES:
            raise SpectrumFormatError(f"need at least {MIN_SAMPLES} samples, got {d.size}")
        if not np.all(np.isfinite(d)) or not np.all(np.isfinite(r)):
            raise SpectrumFormatError("samples must be finite")
        if d[0] <= 0.0:
            raise SpectrumFormatError("first normalized weight must be positive")
        if np.any(np.diff(d) <= 0.0):
            raise SpectrumFormatError("normalized weights must be strictly increasing")
        if d[-1] != 1.0:
            raise SpectrumFormatError("last normalized weight must be exactly 1")
        d.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "rate", float(self.rate))
        object.__setattr__(self, "deltas", d)
        object.__setattr__(self, "exponents", r)

    def exponent(self, delta):
        """Interpolated r(delta)."""
        return np.interp(delta, self.deltas, self.exponents)

    @cached_property
    def _grid(self):
        g = np.union1d(self.deltas, np.linspace(self.deltas[0], 1.0, REFINE_POINTS))
        r = self.exponent(g)
        ratio = r / g
        gap = (r - random_binary_exponent(self.rate, g)) * LOG2E
        # running maxima of r/delta from the left and from the right
        pre = np.maximum.accumulate(ratio)
        suf = np.maximum.accumulate(ratio[::-1])[::-1]
        return g, ratio, gap, pre, suf

    def _ratio_at(self, delta: float) -> float:
        return float(self.exponent(delta)) / delta

    def _gap_at(self, delta: float) -> float:
        return (float(self.exponent(delta)) - random_binary_exponent(self.rate, delta)) * LOG2E


def ub_threshold(spec: WeightSpectrum) -> float:
    """UB code threshold c0 = sup r(delta)/delta, in nats."""
    _, ratio, _, _, _ = spec._grid
    return float(ratio.max())


def sf_distance(spec: WeightSpectrum) -> float:
    """Shulman-Feder distance to the random binary ensemble, in bits."""
    _, _, gap, _, _ = spec._grid
    return float(gap.max())


def _check_partition(p: float) -> float:
    p = float(p)
    if not 0.0 <= p < 0.5:
        raise DomainError(f"partition parameter must lie in [0, 0.5), got {p}")
    return p


def restricted_quantities(spec: WeightSpectrum, p: float) -> tuple[float, float]:
    """Restricted UB threshold c_P (nats) and restricted SF distance xi_P (bits).

    c_P is the sup of r/delta over delta <= 0.5 - P or delta > 0.5 + P;
    xi_P is the sup of the exponent gap over 0.5 - P < delta <= 0.5 + P,
    and zero when P = 0. Suprema over half-open intervals are attained at
    the closure because the interpolant is continuous.
    """
    p = _check_partition(p)
    g, _, gap, pre, suf = spec._grid
    lo, hi = 0.5 - p, 0.5 + p
    d1 = g[0]

    candidates = []
    i_lo = np.searchsorted(g, lo, side="right")  # g[:i_lo] <= lo
    if i_lo > 0:
        candidates.append(pre[i_lo - 1])
    if lo >= d1:
        candidates.append(spec._ratio_at(lo))
    i_hi = np.searchsorted(g, hi, side="left")  # g[i_hi:] >= hi
    if i_hi < g.size:
        candidates.append(suf[i_hi])
    candidates.append(spec._ratio_at(hi))
    c_p = float(max(candidates))

    if p == 0.0:
        return c_p, 0.0
    a = max(lo, d1)
    inside = gap[np.searchsorted(g, a, side="left"):np.searchsorted(g, hi, side="right")]
    xs = [spec._gap_at(hi)]
    if lo >= d1:
        xs.append(spec._gap_at(lo))
    if inside.size:
        xs.append(float(inside.max()))
    return c_p, float(max(xs))


@dataclass(frozen=True)
class CodeThresholds:
    """UB threshold, simple threshold and the partition achieving the latter."""

    c0: float
    c_star: float
    p_star: float


def _slack(spec: WeightSpectrum, p: float) -> tuple[float, float]:
    c_p, xi_p = restricted_quantities(spec, p)
    arg = 1.0 - spec.rate - xi_p
    if arg <= 0.0:
        return c_p, -math.inf
    return c_p, c_p + math.log(arg)


def simple_threshold(spec: WeightSpectrum) -> CodeThresholds:
    """Simple code threshold: min of c_P over partitions with c_P >= -ln(1 - R - xi_P).

    c_P is non-increasing and xi_P non-decreasing in P, so the feasible
    partitions form an interval [0, P_max] and the minimum is c at P_max.
    P_max is bracketed on a 512-point grid and refined by bisection; among
    partitions attaining the minimum, the smallest is returned.

    Raises:
        InfeasibleSpectrum: if even P = 0 is infeasible, which the rate
            lower bound on c0 rules out for a genuine good ensemble.
    """
    c0 = ub_threshold(spec)
    if _slack(spec, 0.0)[1] < -RATE_BOUND_SLACK:
        raise InfeasibleSpectrum(
            f"P=0 violates the threshold constraint for '{spec.label}' (c0={c0:.6g}, R={spec.rate})"
        )

    grid = np.arange(COARSE_P_POINTS) * (0.5 / COARSE_P_POINTS)
    last = 0
    for k in range(1, COARSE_P_POINTS):
        if _slack(spec, grid[k])[1] >= 0.0:
            last = k
        else:
            break
    lo = grid[last]
    hi = grid[last + 1] if last + 1 < COARSE_P_POINTS else 0.5
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _slack(spec, mid)[1] >= 0.0:
            lo = mid
        else:
            hi = mid
    c_star = restricted_quantities(spec, lo)[0]

    # smallest partition that already reaches c_star
    a, b = 0.0, lo
    if restricted_quantities(spec, 0.0)[0] <= c_star:
        b = 0.0
    for _ in range(64):
        if b - a <= 0.0:
            break
        mid = 0.5 * (a + b)
        if mid in (a, b):
            break
        if restricted_quantities(spec, mid)[0] <= c_star:
            b = mid
        else:
            a = mid
    return CodeThresholds(c0=c0, c_star=float(c_star), p_star=float(b))


def check_rate_bound(spec: WeightSpectrum) -> None:
    """Reject spectra whose UB threshold is below -ln(1 - R)."""
    c0 = ub_threshold(spec)
    bound = -math.log(1.0 - spec.rate)
    if c0 < bound - RATE_BOUND_SLACK:
        raise RateBoundViolation(
            f"spectrum '{spec.label}': c0 = {c0:.9g} < -ln(1-R) = {bound:.9g}"
        )


def random_binary_spectrum(rate: float, n_samples: int = 4096) -> WeightSpectrum:
    """Random binary ensemble sampled at delta = k / n_samples, k = 1..n_samples."""
    d = np.arange(1, n_samples + 1) / n_samples
    d[-1] = 1.0
    return WeightSpectrum(rate, d, random_binary_exponent(rate, d), label=f"random binary, R={rate:.6g}")


def spectrum_to_dict(spec: WeightSpectrum) -> dict:
    return {
        "label": spec.label,
        "rate": spec.rate,
        "samples": [[float(a), float(b)] for a, b in zip(spec.deltas, spec.exponents)],
    }


def spectrum_from_dict(obj, validate: bool = True) -> WeightSpectrum:
    """Build a spectrum from its JSON object form.

    Raises:
        SpectrumFormatError: on any schema or type-invariant violation.
        RateBoundViolation: if ``validate`` and c0 < -ln(1 - R).
    """
    if not isinstance(obj, dict):
        raise SpectrumFormatError("spectrum must be a JSON object")
    unknown = set(obj) - {"label", "rate", "samples"}
    if unknown:
        raise SpectrumFormatError(f"unknown fields: {sorted(unknown)}")
    for key in ("rate", "samples"):
        if key not in obj:
            raise SpectrumFormatError(f"missing field '{key}'")
    label = obj.get("label", "")
    if not isinstance(label, str):
        raise SpectrumFormatError("label must be a string")
    rate = obj["rate"]
    if isinstance(rate, bool) or not isinstance(rate, (int, float)):
        raise SpectrumFormatError("rate must be a number")
    samples = obj["samples"]
    if not isinstance(samples, list) or not all(
        isinstance(s, list) and len(s) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in s)
        for s in samples
    ):
        raise SpectrumFormatError("samples must be a list of [delta, r] number pairs")
    arr = np.array(samples, dtype=float).reshape(-1, 2)
    spec = WeightSpectrum(float(rate), arr[:, 0], arr[:, 1], label=label)
    if validate:
        check_rate_bound(spec)
    return spec


def load_spectrum(path: Union[str, Path], validate: bool = True) -> WeightSpectrum:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SpectrumFormatError(f"{path}: invalid JSON ({exc})") from exc
    return spectrum_from_dict(obj, validate=validate)


def save_spectrum(spec: WeightSpectrum, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spectrum_to_dict(spec), fh, indent=1)
        fh.write("\n")
