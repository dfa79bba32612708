"""Fibre maps, lifted measures and the constructive coupling theorems."""

__version__ = "0.1.0"
