"""Events on {0,1}^C and exact BK inequality checks."""

__version__ = "0.1.0"
