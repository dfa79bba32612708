"""Exact finite measures, couplings and stochastic domination."""

__version__ = "0.1.0"
