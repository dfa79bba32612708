"""Experiment configuration, execution and reporting."""

__version__ = "0.1.0"
