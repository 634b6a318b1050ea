"""
Code thresholds from a weight spectrum
======================================

Load the shipped random-binary spectra, compute their union-bound and
simple thresholds, then see how much of a codeword a receiver can miss
before the punctured block stops being decodable on its own.
"""

# %%
from importlib import resources

import numpy as np

import ircoop

for name in ("random_binary_r1_2.json", "random_binary_r1_3.json", "random_binary_r1_7.json"):
    path = resources.files("ircoop").joinpath("data", name)
    spec = ircoop.load_spectrum(path)
    th = ircoop.simple_threshold(spec)
    floor = -np.log1p(-spec.rate)
    print(f"R={spec.rate:.4f}  c0={th.c0:.4f}  c*={th.c_star:.4f}  "
          f"P*={th.p_star:.4f}  rate floor={floor:.4f}")

# %%
# Puncturing: keep a fraction tau of the codeword. The threshold grows as
# tau shrinks and diverges at 1 - exp(-c*).
c_star = 0.17
print(f"\nc* = {c_star}, self-decodable above tau = {1 - np.exp(-c_star):.4f}")
for tau in (1.0, 5 / 7, 3 / 7, 1 / 7):
    if ircoop.is_self_decodable(c_star, tau):
        print(f"  tau={tau:.4f}  chi={ircoop.punctured_threshold(c_star, tau):.4f} nats")
    else:
        print(f"  tau={tau:.4f}  not self-decodable")

# %%
# The same numbers on channel measures: a BI-AWGN link is above the code
# threshold when its Bhattacharyya parameter is below exp(-c*).
for snr_db in (-10, -7.5, -5, 0):
    ch = ircoop.ChannelSpec.bi_awgn(10 ** (snr_db / 10))
    m = ircoop.measures(ch)
    ok = m.bhattacharyya < np.exp(-c_star)
    print(f"SNR {snr_db:>5} dB  C={m.capacity:.4f}  B={m.bhattacharyya_rate:.4f}  "
          f"R0={m.cutoff_rate:.4f}  decodable={ok}")
