"""Command-line front end.

    ircoop threshold --spectrum FILE [--tau T ...]
    ircoop sweep --scenario FILE --var VAR --start A --stop B --steps N --outputs bound,simulation
    ircoop reproduce {table2,example2,m2_bound}
    ircoop genspectrum --rate R --out FILE

Exit codes: 0 success, 1 a reproduction check failed, 2 malformed input,
3 a spectrum below the rate lower bound on its UB threshold.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence, TextIO

import numpy as np

from . import __version__
from .asymptotics import ScenarioKind, fer_asym
from .energy import EnergyQuery, energy_saving, energy_saving_firf, energy_saving_kappa, optimize_tau0
from .errors import HypothesisViolated, InfeasibleTauRange, IrcoopError, RateBoundViolation
from .outage import fer_bound, outage_given_set, outage_m1, outage_m2_cooperative
from .protocol import (
    CoopConfig, Geometry, Scenario, broadcast_snrs, db_to_linear, destination_snrs,
    linear_to_db, load_scenario,
)
from .puncturing import is_self_decodable, punctured_threshold
from .simulator import SimConfig, simulate_fer
from .spectra import load_spectrum, random_binary_spectrum, save_spectrum, simple_threshold, sf_distance

EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_RATE_BOUND = 3

SWEEP_VARIABLES = ("snr_lambda_db", "snr_rho_db", "energy_db", "kappa", "m")
OUTPUT_KINDS = ("bound", "asymptotic", "simulation", "energy")
DEFAULT_TAUS = (1.0, 6 / 7, 5 / 7, 4 / 7, 3 / 7, 2 / 7, 1 / 7)
CSV_COLUMNS = ("point", "kind", "value", "half_width", "flags")


class InputError(IrcoopError):
    """Command-line arguments that cannot be acted on."""


def _fmt(x: float) -> str:
    # shortest round-trip representation, independent of locale
    return repr(float(x))


# ---------------------------------------------------------------- threshold

def cmd_threshold(args, out: TextIO) -> int:
    spec = load_spectrum(args.spectrum)
    th = simple_threshold(spec)
    db = not args.linear
    print(f"spectrum: {spec.label or args.spectrum}", file=out)
    print(f"rate R         = {spec.rate:.6g}", file=out)
    print(f"c0  (nats)     = {th.c0:.6g}", file=out)
    print(f"c*  (nats)     = {th.c_star:.6g}", file=out)
    print(f"P*             = {th.p_star:.6g}", file=out)
    print(f"SF distance    = {sf_distance(spec):.3g} bits", file=out)
    print("", file=out)
    unit = "dB" if db else "linear"
    print(f"{'tau':>10}  {'chi (nats)':>12}  {'chi (' + unit + ')':>14}", file=out)
    for tau in args.tau or DEFAULT_TAUS:
        if not is_self_decodable(th.c_star, tau):
            print(f"{tau:>10.6g}  {'not self-decodable':>28}", file=out)
            continue
        chi = punctured_threshold(th.c_star, tau)
        shown = float(linear_to_db(chi)) if db else chi
        print(f"{tau:>10.6g}  {chi:>12.6g}  {shown:>14.6g}", file=out)
    return 0


# -------------------------------------------------------------------- sweep

@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    steps: int
    outputs: tuple

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise InputError(f"unknown sweep variable {self.variable!r}")
        if self.steps < 2:
            raise InputError("a sweep needs at least 2 steps")
        if not self.start < self.stop:
            raise InputError("sweep range must be increasing")
        bad = [o for o in self.outputs if o not in OUTPUT_KINDS]
        if bad or not self.outputs:
            raise InputError(f"outputs must be a nonempty subset of {OUTPUT_KINDS}, got {bad}")

    def points(self) -> np.ndarray:
        pts = np.linspace(self.start, self.stop, self.steps)
        if self.variable == "m":
            if not np.allclose(pts, np.round(pts)):
                raise InputError("an M sweep must land on integers")
            pts = np.round(pts)
        return pts


def _symmetric_snrs(sc: Scenario) -> tuple[float, float, float]:
    """(rho, lambda, eta) of a symmetric cluster; rho and lambda are NaN when M = 1."""
    g = sc.geometry
    bc, dest = broadcast_snrs(g), destination_snrs(g)
    if sc.m == 1:
        return math.nan, math.nan, float(dest[0])
    if np.ptp(bc) > 1e-12 * bc.max() or np.ptp(dest[1:]) > 1e-12 * dest[1:].max():
        raise InputError("SNR sweeps need a symmetric cluster (equal helper distances)")
    return float(bc[0]), float(dest[1]), float(dest[0])


def _rebuild(sc: Scenario, m: int, rho: float, lam: float, eta: float) -> Scenario:
    g = sc.geometry
    if m == 1:
        geom = Geometry.from_profile(1, math.nan, math.nan, eta ** (-1.0 / g.path_loss),
                                     g.path_loss, 1.0)
    else:
        geom = Geometry.from_snrs(m, rho, lam, eta, g.path_loss)
    coop = sc.coop if m == sc.m else _coop_for(sc, m)
    return sc.replace(geometry=geom, coop=coop)


def _coop_for(sc: Scenario, m: int) -> CoopConfig:
    if sc.tau0 is not None:
        return CoopConfig.broadcast_weighted(m, sc.tau0)
    return CoopConfig.uniform(m)


def _scenario_at(sc: Scenario, var: str, x: float) -> Scenario:
    if var == "energy_db":
        return sc.replace(geometry=sc.geometry.with_energy(float(db_to_linear(x))))
    if var == "kappa":
        if not 0.0 < x < 1.0:
            raise InputError("kappa must lie in (0, 1)")
        g = sc.geometry
        big_d = float(g.distances[0, g.m])
        geom = Geometry.from_profile(sc.m, x * big_d, (1.0 - x) * big_d, big_d,
                                     g.path_loss, g.symbol_energy)
        return sc.replace(geometry=geom)
    rho, lam, eta = _symmetric_snrs(sc)
    e = sc.geometry.symbol_energy
    rho, lam, eta = rho / e, lam / e, eta / e
    if var == "snr_lambda_db":
        lam = float(db_to_linear(x))
        if sc.eta_tracks_lambda:
            eta = lam
        m = sc.m
    elif var == "snr_rho_db":
        rho = float(db_to_linear(x))
        m = sc.m
    else:
        m = int(x)
        if m > 1 and math.isnan(rho):
            raise InputError("growing an M=1 scenario needs a helper profile")
    out = _rebuild(sc, m, rho, lam, eta)
    return out.replace(geometry=out.geometry.with_energy(e))


def _energy_value(sc: Scenario, var: str, x: float) -> tuple[float, tuple]:
    if sc.epsilon is None:
        raise InputError("energy output needs an 'energy' section in the scenario")
    big_d = float(sc.geometry.distances[0, sc.m])
    q = EnergyQuery(sc.epsilon, sc.m, sc.c_star, sc.geometry.path_loss, big_d)
    if var == "kappa":
        q = q.with_(kappa=x)
        if sc.tau0 is not None:
            return energy_saving_kappa(q, sc.tau0), ()
        return optimize_tau0(q)[1], ("optimized_tau0",)
    if sc.m == 1:
        return 1.0, ()
    return energy_saving(q), ()


def cmd_sweep(args, out: TextIO) -> int:
    sc = load_scenario(args.scenario)
    outputs = tuple(o.strip() for o in args.outputs.split(",") if o.strip())
    spec = SweepSpec(args.var, args.start, args.stop, args.steps, outputs)
    seed = args.seed if args.seed is not None else sc.seed
    if "simulation" in outputs and seed is None:
        raise InputError("simulation output needs a seed (scenario 'seed' or --seed)")
    db_var = spec.variable.endswith("_db")

    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for x in spec.points():
        point = float(db_to_linear(x)) if db_var and args.linear else float(x)
        at = _scenario_at(sc, spec.variable, float(x))
        for kind in outputs:
            flags: tuple = ()
            hw = 0.0
            if kind == "bound":
                est = fer_bound(at.coop, at.geometry, at.c_star, args.samples,
                                0 if seed is None else seed, args.workers, args.importance)
                value, hw, flags = est.value, est.half_width, est.flags
            elif kind == "asymptotic":
                try:
                    est = fer_asym(ScenarioKind.CLUSTER_HOPPING, at.coop, at.geometry, at.c_star)
                    value, flags = est.value, est.flags
                except HypothesisViolated:
                    value, flags = math.nan, ("not_self_decodable",)
            elif kind == "simulation":
                res = simulate_fer(SimConfig(at, args.frames, seed, importance=args.importance,
                                             workers=args.workers))
                value, hw, flags = res.fer.value, res.fer.half_width, res.fer.flags
            else:
                try:
                    u, flags = _energy_value(at, spec.variable, float(x))
                    value = u if args.linear else float(linear_to_db(u))
                except (HypothesisViolated, InfeasibleTauRange):
                    value, flags = math.nan, ("infeasible_tau",)
            writer.writerow([_fmt(point), kind, _fmt(value), _fmt(hw), ";".join(flags)])
    return 0


# ---------------------------------------------------------------- reproduce

def _check(out: TextIO, label: str, value: float, lo: float, hi: float, target: str) -> bool:
    ok = lo <= value <= hi
    print(f"{'PASS' if ok else 'FAIL'}  {label:<28} computed {value:.6g}  "
          f"reference {target}  accepted [{lo:.6g}, {hi:.6g}]", file=out)
    return ok


def _reproduce_table2(out: TextIO) -> bool:
    ok = True
    for m, ref in ((2, 8.4), (3, 11.1), (4, 12.4), (5, 13.2)):
        u = float(linear_to_db(energy_saving(EnergyQuery(0.01, m, 0.17))))
        ok &= _check(out, f"saving M={m} (dB)", u, ref - 0.1, ref + 0.1, f"{ref}")
    cs = np.linspace(0.01, 1.0, 100)
    firf = np.array([energy_saving_firf(EnergyQuery(0.01, 1, c)) for c in cs])
    worst = float(linear_to_db(firf.max()))
    ok &= _check(out, "FIRF saving, worst c* (dB)", worst, -math.inf, 20.0 - 1e-12, "< 20")
    return ok


def _reproduce_example2(out: TextIO) -> bool:
    c = 0.17
    ok = _check(out, "chi(5/7)", punctured_threshold(c, 5 / 7), 0.245, 0.250, "~0.25")
    ok &= _check(out, "chi(3/7)", punctured_threshold(c, 3 / 7), 0.450, 0.458, "~0.45")
    return ok


def _reproduce_m2_bound(out: TextIO, samples: int, seed: int) -> bool:
    ok = True
    cases = ((0.17, 0.5, 10.0, 10.0), (0.17, 0.6, 3.0, 5.0), (0.3, 0.55, 20.0, 8.0))
    for c, tau0, s02, s12 in cases:
        cfg = CoopConfig(2, (tau0, 1.0 - tau0))
        q = outage_m2_cooperative(c, tau0, 1.0 - tau0, s02, s12)
        mc = outage_given_set(cfg, {1}, [s02, s12], c, samples, seed)
        tol = 3.0 * mc.sigma
        ok &= _check(out, f"G(2,{{1}}) c*={c} tau0={tau0}", q.value,
                     mc.value - tol, mc.value + tol, f"MC {mc.value:.6g}")
    # two-node bound as the reliable-set mixture of the two outage terms
    c, rho, lam = 0.17, 10.0, 10.0
    cfg = CoopConfig.uniform(2)
    geom = Geometry.from_snrs(2, rho, lam, lam)
    p = math.exp(-punctured_threshold(c, 0.5) / rho)
    mix = (1 - p) * outage_m1(c, lam).value + p * outage_m2_cooperative(c, 0.5, 0.5, lam, lam).value
    bound = fer_bound(cfg, geom, c).value
    ok &= _check(out, "two-node bound composition", bound, mix * (1 - 1e-12), mix * (1 + 1e-12),
                 f"{mix:.6g}")
    return ok


def cmd_reproduce(args, out: TextIO) -> int:
    if args.recipe == "table2":
        ok = _reproduce_table2(out)
    elif args.recipe == "example2":
        ok = _reproduce_example2(out)
    else:
        ok = _reproduce_m2_bound(out, args.samples, 0 if args.seed is None else args.seed)
    return 0 if ok else EXIT_FAIL


# -------------------------------------------------------------- genspectrum

def cmd_genspectrum(args, out: TextIO) -> int:
    spec = random_binary_spectrum(args.rate, args.samples)
    save_spectrum(spec, args.out)
    print(f"wrote {args.out}: {spec.label}, {args.samples} samples", file=out)
    return 0


# --------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ircoop", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=None, help="unsigned 64-bit RNG seed")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--out", default=None, help="output path (default: stdout)")
        scale = sp.add_mutually_exclusive_group()
        scale.add_argument("--db", dest="linear", action="store_false", help="print dB (default)")
        scale.add_argument("--linear", dest="linear", action="store_true", help="print linear values")
        sp.set_defaults(linear=False)

    t = sub.add_parser("threshold", help="code thresholds of a weight spectrum")
    t.add_argument("--spectrum", required=True)
    t.add_argument("--tau", type=float, nargs="+", help="survival fractions to tabulate")
    common(t)

    s = sub.add_parser("sweep", help="CSV sweep over one scenario variable")
    s.add_argument("--scenario", required=True)
    s.add_argument("--var", required=True, choices=SWEEP_VARIABLES)
    s.add_argument("--start", type=float, required=True)
    s.add_argument("--stop", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--outputs", default="bound", help=f"comma list from {','.join(OUTPUT_KINDS)}")
    s.add_argument("--frames", type=int, default=100_000, help="frames per simulated point")
    s.add_argument("--samples", type=int, default=100_000, help="MC samples per outage term")
    s.add_argument("--importance", action="store_true", help="importance-sample fading powers")
    common(s)

    r = sub.add_parser("reproduce", help="canned reference checks")
    r.add_argument("recipe", choices=("table2", "example2", "m2_bound"))
    r.add_argument("--samples", type=int, default=1_000_000)
    common(r)

    g = sub.add_parser("genspectrum", help="write a random binary ensemble spectrum")
    g.add_argument("--rate", type=float, required=True)
    g.add_argument("--samples", type=int, default=4096)
    g.add_argument("--out", required=True)
    return p


COMMANDS = {
    "threshold": cmd_threshold,
    "sweep": cmd_sweep,
    "reproduce": cmd_reproduce,
    "genspectrum": cmd_genspectrum,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else 0
    seed = getattr(args, "seed", None)
    if seed is not None and not 0 <= seed < 2**64:
        print("error: seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_INPUT
    to_file = args.command != "genspectrum" and args.out is not None
    try:
        if to_file:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                return COMMANDS[args.command](args, fh)
        return COMMANDS[args.command](args, sys.stdout)
    except RateBoundViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RATE_BOUND
    except (IrcoopError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
