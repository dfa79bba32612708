"""Shared pytest fixtures for the stochastic lifts tests."""

import os
from fractions import Fraction

import pytest
from dotenv import load_dotenv

from stochastic_lifts.config import get_settings
from stochastic_lifts.core.measure import FiniteMeasure, Space


@pytest.fixture(autouse=True)
def load_env():
    """Load environment variables and rebuild the cached settings around each test."""
    load_dotenv()
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def base_dir():
    """Get the base directory of the project."""
    return os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


@pytest.fixture
def half():
    return Fraction(1, 2)


@pytest.fixture
def binary_pair_space():
    """{0,1}^2."""
    return Space(2, 1)


@pytest.fixture
def lower_measure(binary_pair_space):
    """Mass 1/2 on 00 and 1/2 on 10."""
    return FiniteMeasure(binary_pair_space, {(0, 0): Fraction(1, 2), (1, 0): Fraction(1, 2)})


@pytest.fixture
def upper_measure(binary_pair_space):
    """Mass 1/2 on 10 and 1/2 on 11."""
    return FiniteMeasure(binary_pair_space, {(1, 0): Fraction(1, 2), (1, 1): Fraction(1, 2)})


def pytest_configure(config):
    """Register custom markers."""
    config.addinivalue_line(
        "markers",
        "slow: acceptance-scale sweep that takes seconds to minutes"
    )
    config.addinivalue_line(
        "markers",
        "property_based: hypothesis-driven randomized property"
    )
