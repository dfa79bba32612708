"""Cell decompositions and augmented percolation."""

__version__ = "0.1.0"
