"""Radial correction profiles and their far-field D constants.

The first profile has the closed form omega^1; its far-field log slope and
its moment integral give the same D^1 = 4 log 8 - 8 - 8 log mu.
"""
import math

from bubblekit import radial_profiles as rp
from bubblekit import special_integrals as si

p, mu = 1.5, 1.0
for j in (1, 2, 3):
    prof = rp.correction_profile(j, p, mu)
    print(f"j={j}: D (moment) {prof.d_moment:+.10f}   "
          f"D (slope) {prof.d_slope:+.10f}")

print(f"D1 closed form     {si.d1_closed(mu):+.10f}")
print(f"D2 closed form     {si.d2_closed(mu, p):+.10f}")

d = rp.d_constants(p, mu)
print(f"d_constants: D1={d.d1:.8f}  D2={d.d2:.8f}  D3={d.d3:.8f}")

# sample the rescaled first profile against its closed form
prof = rp.correction_profile(1, p, mu)
for t in (0.5, 5.0, 50.0):
    print(f"omega^1({t:5.1f}) = {prof.rescaled(t):+.8f}   "
          f"closed {si.omega1_tilde(mu, t):+.8f}")
