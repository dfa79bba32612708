"""Finite graphs, fibrations and percolation estimates."""

__version__ = "0.1.0"
