"""
Stochastic Lifts
Exact monotone couplings for lifted measures, with percolation and BK experiments.
"""

__version__ = "0.1.0"
