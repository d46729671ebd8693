"""Integrated density of states and Lyapunov exponent of random delta chains.

Node counting against sqrt(lam)/pi for the free chain, and the complex
Lyapunov exponent Omega = gamma - i pi N against its closed form for
exponentially distributed spacings and couplings below the spectrum.
"""
import math

from disorder_rmt import oracles
from disorder_rmt.ensembles import Dist, FrischLloyd
from disorder_rmt.spectral import complex_lyapunov, ids_node_counting

free = FrischLloyd(coupling=Dist.constant(0.0))
print("free chain: lam   N_nodes   sqrt(lam)/pi")
for lam in (0.25, 1.0, 4.0):
    est = ids_node_counting(free, lam, L=1e5, replicas=4, rng=0)
    print(f"  {lam:5.2f}   {est.value:.5f}   {math.sqrt(lam) / math.pi:.5f}")

chain = FrischLloyd(coupling=Dist.exponential(1.0), spacing=Dist.exponential(1.0))
print("exponential chain below the spectrum: lam   Re Omega (MC)   closed form")
for lam in (-4.0, -1.0, -0.25):
    est = complex_lyapunov(chain, lam, L=1e5, replicas=4, rng=1)
    ref = oracles.nieuwenhuizen_omega_negative(lam, 1.0, 1.0)
    print(f"  {lam:6.2f}   {est.value.real:.5f} +- {est.gamma.stderr:.1e}   {ref:.5f}")
