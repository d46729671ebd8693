"""Schrodinger operator with white-noise potential.

The Riccati SDE dz = -(E + z^2) dx + sigma dB is integrated with reinjection
at -infinity; the crossing rate is the integrated density of states, to be
compared with the Airy-function formula and its Lifshitz tail.
"""
import math

from disorder_rmt import oracles
from disorder_rmt.riccati import RiccatiOrbitConfig, sde_white_noise_run

sigma = 1.0
print("   E     N_sde        N_airy")
for E in (-1.0, 0.0, 1.0, 2.0):
    res = sde_white_noise_run(E, sigma, 2e4, None, RiccatiOrbitConfig(), 7)
    print(f"{E:5.1f}  {res.N.value:.5f}+-{res.N.stderr:.1e}  {oracles.halperin_N(E, sigma):.5f}")

print("Lifshitz tail: E   ln N   asymptote")
for E in (-2.0, -4.0, -8.0):
    print(f"  {E:5.1f}  {math.log(oracles.halperin_N(E, sigma)):9.3f}  {oracles.lifshitz_tail(E, sigma):9.3f}")
