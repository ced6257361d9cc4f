"""Cubic points on Atkin-Lehner quotients of X_0(N) for square-free N."""

__version__ = "0.1.0"
