"""Golden fixtures and the counterexample search harness."""

__version__ = "0.1.0"
