"""Test package for the stochastic_lifts tools."""
