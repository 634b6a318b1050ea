"""
Energy savings of a cooperating cluster
=======================================

How much less symbol energy a cluster needs to hit a 1% FER than a lone
sender, as the cluster grows and as it moves between sender and destination.
"""

# %%
import numpy as np

import ircoop
from ircoop.energy import EnergyQuery, to_db

eps = 0.01
for m in range(2, 9):
    q = EnergyQuery(eps, m, c_star=0.17)
    print(f"M={m}: {to_db(ircoop.energy_saving(q)):6.2f} dB "
          f"(exact factorial solve {to_db(ircoop.energy_saving(q, exact=True)):6.2f} dB)")
print(f"fully interleaved channel: {to_db(ircoop.energy_saving_firf(EnergyQuery(eps, 1, 0.17))):.2f} dB")

# %%
# Helpers on the line at kappa * D. With equal slots the saving peaks in the
# middle; re-optimizing the broadcast share helps most when the helpers sit
# far from the sender.
m = 5
print(f"\n{'kappa':>6}  {'equal slots':>11}  {'best tau0':>9}  {'best saving':>11}")
for kappa in np.linspace(0.1, 0.9, 9):
    q = EnergyQuery(eps, m, c_star=0.17, kappa=float(kappa))
    equal = ircoop.energy_saving_kappa(q, 1 / m)
    tau0, best = ircoop.optimize_tau0(q)
    print(f"{kappa:>6.2f}  {to_db(equal):>9.2f}dB  {tau0:>9.4f}  {to_db(best):>9.2f}dB")
