"""Network geometry, link SNRs and the ACK-driven slot schedule.

Node 0 is the sender, nodes 1..M-1 are helpers and node M is the
destination. Slot 0 is always the sender's broadcast; helper j owns slot j
and transmits in it only if it decoded the broadcast (j belongs to the
reliable set), otherwise the sender fills the slot.

Reliable nodes are assumed to always decode correctly and the decoding
latency between slot 0 and slot 1 is taken as zero.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from .errors import InvalidGeometry, InvalidMember, ScenarioFormatError, TooManyHelpers
from .puncturing import self_decodable_floor

MAX_NODES = 20
TAU_SUM_TOL = 1e-12

ReliableSet = frozenset


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


@dataclass(frozen=True, eq=False)
class Geometry:
    """Distances d[i, j] between transmitting node i and receiving node j.

    ``distances`` is an (M+1) x (M+1) array; only entries with i < M,
    j >= 1 and i != j are used, everything else may be NaN. Helper-to-helper
    distances are never needed.
    """

    distances: np.ndarray
    path_loss: float
    symbol_energy: float

    def __post_init__(self):
        d = np.array(self.distances, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] < 2:
            raise InvalidGeometry("distance matrix must be square with at least 2 nodes")
        if not self.path_loss > 0.0:
            raise InvalidGeometry(f"path-loss exponent must be positive, got {self.path_loss}")
        if not self.symbol_energy > 0.0:
            raise InvalidGeometry(f"symbol energy must be positive, got {self.symbol_energy}")
        m = d.shape[0] - 1
        used = _used_links(m)
        vals = d[used]
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0.0):
            raise InvalidGeometry("all sender-helper, sender-destination and helper-destination distances must be positive")
        d.setflags(write=False)
        object.__setattr__(self, "distances", d)
        object.__setattr__(self, "path_loss", float(self.path_loss))
        object.__setattr__(self, "symbol_energy", float(self.symbol_energy))

    def warn_if_not_metric(self) -> None:
        """Warn about helpers whose three distances cannot form a triangle."""
        m = self.m
        d = self.distances
        big_d = d[0, m]
        for j in range(1, m):
            if not abs(big_d - d[0, j]) <= d[j, m] <= big_d + d[0, j]:
                warnings.warn(
                    f"distances to helper {j} violate the triangle inequality", stacklevel=3
                )

    @property
    def m(self) -> int:
        return self.distances.shape[0] - 1

    @classmethod
    def from_profile(cls, m: int, r: float, d: float, big_d: float,
                     path_loss: float = 3.0, symbol_energy: float = 1.0) -> "Geometry":
        """Symmetric cluster: every helper sits at r from the sender and d from the destination."""
        if m < 1:
            raise InvalidGeometry("need at least one transmitting node")
        geom = cls(_profile_matrix(m, r, d, big_d), path_loss, symbol_energy)
        geom.warn_if_not_metric()
        return geom

    @classmethod
    def from_snrs(cls, m: int, rho: float, lam: float, eta: float,
                  path_loss: float = 3.0) -> "Geometry":
        """Symmetric cluster with given linear SNRs: sender-to-cluster ``rho``,
        cluster-to-destination ``lam``, sender-to-destination ``eta``.
        The symbol energy is fixed to 1 and distances are SNR^(-1/L)."""
        for name, v in (("rho", rho), ("lam", lam), ("eta", eta)):
            if not v > 0.0:
                raise InvalidGeometry(f"{name} must be a positive linear SNR, got {v}")
        if m < 1:
            raise InvalidGeometry("need at least one transmitting node")
        inv = 1.0 / path_loss
        # distances here only encode SNRs and need not form a triangle
        return cls(_profile_matrix(m, rho ** -inv, lam ** -inv, eta ** -inv), path_loss, 1.0)

    def profile(self) -> tuple[float, float, float]:
        """(r, d, D): largest sender-to-helper, largest helper-to-destination and
        sender-to-destination distance. r and d are NaN when M = 1."""
        m = self.m
        big_d = float(self.distances[0, m])
        if m == 1:
            return math.nan, math.nan, big_d
        return (float(np.max(self.distances[0, 1:m])), float(np.max(self.distances[1:m, m])), big_d)

    def with_energy(self, symbol_energy: float) -> "Geometry":
        return Geometry(self.distances, self.path_loss, symbol_energy)


def _profile_matrix(m: int, r: float, d: float, big_d: float) -> np.ndarray:
    dist = np.full((m + 1, m + 1), np.nan)
    dist[0, m] = big_d
    dist[0, 1:m] = r
    dist[1:m, m] = d
    return dist


def _used_links(m: int) -> np.ndarray:
    mask = np.zeros((m + 1, m + 1), dtype=bool)
    mask[0, 1:] = True
    mask[1:m, m] = True
    return mask


def link_snrs(geom: Geometry) -> np.ndarray:
    """Average SNR matrix E * d^-L (linear); unused entries are NaN."""
    snr = np.full(geom.distances.shape, np.nan)
    used = _used_links(geom.m)
    snr[used] = geom.symbol_energy * geom.distances[used] ** (-geom.path_loss)
    return snr


def broadcast_snrs(geom: Geometry) -> np.ndarray:
    """SNR_{0,j} for helpers j = 1..M-1."""
    m = geom.m
    return geom.symbol_energy * geom.distances[0, 1:m] ** (-geom.path_loss)


def destination_snrs(geom: Geometry) -> np.ndarray:
    """SNR_{i,M} for transmitting nodes i = 0..M-1."""
    m = geom.m
    return geom.symbol_energy * geom.distances[:m, m] ** (-geom.path_loss)


@dataclass(frozen=True, eq=False)
class CoopConfig:
    """Slot count and assignment rates tau_0..tau_{M-1} (summing to one)."""

    m: int
    taus: tuple

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"slot count must be a positive integer, got {self.m}")
        taus = tuple(float(t) for t in self.taus)
        if len(taus) != self.m:
            raise ValueError(f"expected {self.m} assignment rates, got {len(taus)}")
        if any(not t > 0.0 for t in taus):
            raise ValueError("assignment rates must be positive")
        if abs(math.fsum(taus) - 1.0) > TAU_SUM_TOL:
            raise ValueError(f"assignment rates must sum to 1, got {math.fsum(taus)!r}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "taus", taus)

    @classmethod
    def uniform(cls, m: int) -> "CoopConfig":
        return cls(m, (1.0 / m,) * m)

    @classmethod
    def broadcast_weighted(cls, m: int, tau0: float) -> "CoopConfig":
        """tau0 for the broadcast slot, the rest split evenly over the helpers."""
        if m == 1:
            return cls(1, (1.0,))
        rest = (1.0 - tau0) / (m - 1)
        return cls(m, (tau0,) + (rest,) * (m - 1))

    def all_self_decodable(self, c_star: float) -> bool:
        floor = self_decodable_floor(c_star)
        return all(t > floor for t in self.taus)


def check_reliable_set(f: Iterable[int], m: int) -> frozenset:
    f = frozenset(int(j) for j in f)
    bad = sorted(j for j in f if not 1 <= j <= m - 1)
    if bad:
        raise InvalidMember(f"nodes {bad} are not helpers of an M={m} cluster")
    return f


def _check_size(m: int) -> None:
    if m > MAX_NODES:
        raise TooManyHelpers(f"M={m} exceeds the enumeration cap of {MAX_NODES}")


def reliable_probabilities(snrs, chi0: float) -> np.ndarray:
    """P(theta_{0,j} > chi0) = exp(-chi0 / SNR_{0,j}) for each helper."""
    snrs = np.asarray(snrs, dtype=float)
    if chi0 == math.inf:
        return np.zeros_like(snrs)
    return np.exp(-chi0 / snrs)


def reliable_set_table(p_reliable) -> np.ndarray:
    """Probabilities of all 2^(M-1) reliable sets, indexed by bitmask
    (bit j-1 set iff helper j is reliable)."""
    probs = np.ones(1)
    for p in np.asarray(p_reliable, dtype=float):
        probs = np.concatenate([probs * (1.0 - p), probs * p])
    return probs


def mask_to_set(mask: int) -> frozenset:
    return frozenset(j + 1 for j in range(mask.bit_length()) if mask >> j & 1)


def set_to_mask(f: Iterable[int]) -> int:
    return sum(1 << (j - 1) for j in f)


def reliable_set_prob(cfg: CoopConfig, snrs, chi0: float) -> dict:
    """Distribution of the reliable set over all subsets of helpers.

    Args:
        cfg: cooperation configuration (only ``m`` is used).
        snrs: sender-to-helper average SNRs, length M-1.
        chi0: punctured threshold of the broadcast block, chi(tau_0); pass
            ``math.inf`` when the broadcast block is not self-decodable.

    Returns:
        Mapping frozenset -> probability.
    """
    _check_size(cfg.m)
    snrs = np.asarray(snrs, dtype=float)
    if snrs.shape != (cfg.m - 1,):
        raise ValueError(f"expected {cfg.m - 1} sender-to-helper SNRs, got shape {snrs.shape}")
    table = reliable_set_table(reliable_probabilities(snrs, chi0))
    return {mask_to_set(k): float(p) for k, p in enumerate(table)}


@dataclass(frozen=True)
class Schedule:
    slot_tx: tuple


def schedule(f: Iterable[int], m: int) -> Schedule:
    """Transmitting node per slot: helper j in slot j if reliable, else the sender."""
    f = check_reliable_set(f, m)
    return Schedule(tuple(j if j in f else 0 for j in range(m)))


def avg_bhattacharyya(nu, f: Iterable[int], cfg: CoopConfig, snrs) -> np.ndarray:
    """Bhattacharyya parameter averaged over the M slots for fading powers ``nu``.

    The sender's gain nu[..., 0] serves slot 0 and every slot whose helper is
    unreliable; reliable helper i transmits over its own gain nu[..., i].

    Args:
        nu: fading powers toward the destination, shape (..., M), indexed by
            transmitting node.
        f: reliable set.
        cfg: cooperation configuration.
        snrs: node-to-destination average SNRs, length M.
    """
    f = check_reliable_set(f, cfg.m)
    nu = np.asarray(nu, dtype=float)
    snrs = np.asarray(snrs, dtype=float)
    taus = np.asarray(cfg.taus)
    members = sorted(f)
    w0 = 1.0 - taus[members].sum() if members else 1.0
    out = w0 * np.exp(-nu[..., 0] * snrs[0])
    for i in members:
        out = out + taus[i] * np.exp(-nu[..., i] * snrs[i])
    return out


@dataclass(frozen=True, eq=False)
class Scenario:
    """Everything needed to evaluate one operating point.

    ``eta_tracks_lambda`` marks SNR-specified scenarios whose
    sender-to-destination SNR follows the cluster-to-destination SNR
    during lambda sweeps.
    """

    geometry: Geometry
    coop: CoopConfig
    c_star: float
    seed: Optional[int] = None
    epsilon: Optional[float] = None
    tau0: Optional[float] = None
    eta_tracks_lambda: bool = False

    def __post_init__(self):
        if self.geometry.m != self.coop.m:
            raise ValueError(f"geometry has M={self.geometry.m} but coop config has M={self.coop.m}")
        if not self.c_star >= 0.0:
            raise ValueError(f"c_star must be nonnegative, got {self.c_star}")

    @property
    def m(self) -> int:
        return self.coop.m

    def replace(self, **changes) -> "Scenario":
        return replace(self, **changes)


SCHEMA_VERSION = 1


def _take(obj: dict, where: str, required: Iterable[str], optional: Iterable[str] = ()) -> dict:
    if not isinstance(obj, dict):
        raise ScenarioFormatError(f"{where} must be a JSON object")
    required, optional = set(required), set(optional)
    unknown = set(obj) - required - optional
    if unknown:
        raise ScenarioFormatError(f"{where}: unknown fields {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ScenarioFormatError(f"{where}: missing fields {sorted(missing)}")
    return obj


def _num(obj: dict, key: str, where: str) -> float:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioFormatError(f"{where}.{key} must be a number")
    return float(v)


def scenario_from_dict(obj) -> Scenario:
    """Parse the scenario JSON object. Unknown fields anywhere are rejected.

    Schema (version 1)::

        {"schema_version": 1,
         "geometry": {"mode": "profile", "r": .., "d": .., "D": .., "path_loss": .., "symbol_energy": ..}
                   | {"mode": "matrix", "distances": [[..]], "path_loss": .., "symbol_energy": ..}
                   | {"mode": "snr", "rho_db": .., "lambda_db": .., ["eta_db": ..], ["path_loss": ..]},
         "coop": {"m": int, ["taus": [..]]},
         "code": {"c_star": ..},
         ["seed": int],
         ["energy": {"epsilon": .., ["tau0": ..]}]}

    In ``snr`` mode an omitted ``eta_db`` means the sender-to-destination
    SNR equals the cluster-to-destination SNR, also during sweeps.
    Matrix entries that are never used may be ``null``.
    """
    top = _take(obj, "scenario", {"schema_version", "geometry", "coop", "code"}, {"seed", "energy"})
    if top["schema_version"] != SCHEMA_VERSION:
        raise ScenarioFormatError(f"unsupported schema_version {top['schema_version']!r}")

    coop = _take(top["coop"], "coop", {"m"}, {"taus"})
    m = coop["m"]
    if isinstance(m, bool) or not isinstance(m, int) or m < 1:
        raise ScenarioFormatError("coop.m must be a positive integer")
    try:
        if "taus" in coop:
            taus = coop["taus"]
            if not isinstance(taus, list) or not all(
                isinstance(t, (int, float)) and not isinstance(t, bool) for t in taus
            ):
                raise ScenarioFormatError("coop.taus must be a list of numbers")
            cfg = CoopConfig(m, tuple(taus))
        else:
            cfg = CoopConfig.uniform(m)
    except ValueError as exc:
        raise ScenarioFormatError(f"coop: {exc}") from exc

    code = _take(top["code"], "code", {"c_star"})
    c_star = _num(code, "c_star", "code")

    g = top["geometry"]
    if not isinstance(g, dict) or "mode" not in g:
        raise ScenarioFormatError("geometry must be an object with a 'mode'")
    mode = g["mode"]
    tracks = False
    try:
        if mode == "profile":
            _take(g, "geometry", {"mode", "D", "path_loss", "symbol_energy"}, {"r", "d"})
            if m > 1 and not {"r", "d"} <= set(g):
                raise ScenarioFormatError("geometry: profile mode needs r and d when M > 1")
            geom = Geometry.from_profile(
                m, _num(g, "r", "geometry") if "r" in g else math.nan,
                _num(g, "d", "geometry") if "d" in g else math.nan,
                _num(g, "D", "geometry"), _num(g, "path_loss", "geometry"),
                _num(g, "symbol_energy", "geometry"),
            )
        elif mode == "matrix":
            _take(g, "geometry", {"mode", "distances", "path_loss", "symbol_energy"})
            rows = g["distances"]
            if not isinstance(rows, list) or len(rows) != m + 1 or not all(
                isinstance(row, list) and len(row) == m + 1 for row in rows
            ):
                raise ScenarioFormatError(f"geometry.distances must be a {m + 1}x{m + 1} array")
            dist = np.array([[math.nan if v is None else v for v in row] for row in rows], dtype=float)
            geom = Geometry(dist, _num(g, "path_loss", "geometry"), _num(g, "symbol_energy", "geometry"))
            geom.warn_if_not_metric()
        elif mode == "snr":
            _take(g, "geometry", {"mode", "rho_db", "lambda_db"}, {"eta_db", "path_loss"})
            lam_db = _num(g, "lambda_db", "geometry")
            tracks = "eta_db" not in g
            eta_db = lam_db if tracks else _num(g, "eta_db", "geometry")
            geom = Geometry.from_snrs(
                m, db_to_linear(_num(g, "rho_db", "geometry")), db_to_linear(lam_db),
                db_to_linear(eta_db), _num(g, "path_loss", "geometry") if "path_loss" in g else 3.0,
            )
        else:
            raise ScenarioFormatError(f"unknown geometry mode {mode!r}")
    except InvalidGeometry as exc:
        raise ScenarioFormatError(f"geometry: {exc}") from exc

    seed = top.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64):
        raise ScenarioFormatError("seed must be an unsigned 64-bit integer")

    epsilon = tau0 = None
    if "energy" in top:
        e = _take(top["energy"], "energy", {"epsilon"}, {"tau0"})
        epsilon = _num(e, "epsilon", "energy")
        if not 0.0 < epsilon < 1.0:
            raise ScenarioFormatError("energy.epsilon must lie in (0, 1)")
        if "tau0" in e:
            tau0 = _num(e, "tau0", "energy")
    try:
        return Scenario(geom, cfg, c_star, seed, epsilon, tau0, tracks)
    except ValueError as exc:
        raise ScenarioFormatError(str(exc)) from exc


def load_scenario(path: Union[str, Path]) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"{path}: invalid JSON ({exc})") from exc
    return scenario_from_dict(obj)
