"""
FER bound against the frame simulator
=====================================

A five-node cluster (sender plus four helpers) with equal slot shares.
The threshold-decoding simulator should land on the outage bound, and the
closed-form asymptote should only become meaningful at high SNR.
"""

# %%
import numpy as np

import ircoop
from ircoop.simulator import SimConfig, simulate_fer

c_star = 0.17
cfg = ircoop.CoopConfig.uniform(5)
rho_db = 0.0

print(f"{'lambda dB':>9}  {'simulated':>11}  {'bound':>11}  {'asymptote':>11}")
for lam_db in np.arange(0.0, 21.0, 4.0):
    lam = 10 ** (lam_db / 10)
    geom = ircoop.Geometry.from_snrs(5, 10 ** (rho_db / 10), lam, lam)
    sim = simulate_fer(SimConfig(ircoop.Scenario(geom, cfg, c_star), 200_000, seed=1))
    bound = ircoop.fer_bound(cfg, geom, c_star, 50_000, seed=1, importance=True)
    asym = ircoop.fer_asym(ircoop.ScenarioKind.CLUSTER_HOPPING, cfg, geom, c_star)
    print(f"{lam_db:>9.1f}  {sim.fer.value:>11.3e}  {bound.value:>11.3e}  {asym.value:>11.3e}")

# %%
# Diversity: push every link up together and fit the slope of the bound.
for m in (1, 2, 3):
    curve = []
    for snr_db in (20, 25, 30, 35, 40):
        s = 10 ** (snr_db / 10)
        geom = ircoop.Geometry.from_snrs(m, s, s, s)
        curve.append((s, ircoop.fer_bound(ircoop.CoopConfig.uniform(m), geom, c_star,
                                          50_000, seed=2, importance=True).value))
    print(f"M={m}: diversity {ircoop.diversity_estimate(curve):.2f}")
