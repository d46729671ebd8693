"""Lyapunov exponents, densities of states and Riccati measures for
one-dimensional disordered systems and products of random 2x2 matrices."""

__version__ = "0.1.0"
