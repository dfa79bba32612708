"""Tests for the column-by-column coupling and the greedy one-column coupling."""

from fractions import Fraction

import numpy as np
import pytest

from stochastic_lifts.core.coupling import is_monotone_coupling
from stochastic_lifts.core.measure import FiniteMeasure, Space, bernoulli_product, point_mass, uniform
from stochastic_lifts.errors import AssumptionError, InputError, PreconditionError
from stochastic_lifts.lift.assumptions import check_assumption_A, check_assumption_B
from stochastic_lifts.lift.fibre import FibreMap
from stochastic_lifts.lift.lifting import exchangeable_symmetrization, is_pi_lift
from stochastic_lifts.lift.main_coupling import build_main_coupling
from stochastic_lifts.lift.one_column import one_column_coupling, value_position_law
from stochastic_lifts.lift.random_instances import random_main_instance, random_one_column_instance


@pytest.fixture
def pair():
    return FibreMap.from_fibre_sizes((2,), (0,))


class TestBuildMainCoupling:
    """Test suite for the main coupling construction."""

    def test_bernoulli_target(self, pair):
        """Test the coupling of a lifted Bernoulli label with i.i.d. labels."""
        mu = uniform([(0, 0), (0, 1)])
        rho = bernoulli_product(Fraction(1, 2), 2)
        coupling = build_main_coupling(mu, rho, pair.with_section((1,)))
        assert is_monotone_coupling(coupling, mu, rho)

    def test_assumption_A_failure(self, pair):
        """Test that a target heavier on the distinguished site is refused."""
        with pytest.raises(AssumptionError) as exc_info:
            build_main_coupling(point_mass((0, 0)), point_mass((1, 0)), pair)
        assert exc_info.value.assumption == "A"
        assert "column 0" in exc_info.value.witness

    def test_assumption_B_failure(self, pair):
        """Test that a flattened measure above the target is refused."""
        with pytest.raises(AssumptionError) as exc_info:
            build_main_coupling(point_mass((1, 0)), point_mass((0, 0)), pair)
        assert exc_info.value.assumption == "B"
        assert "up-set" in exc_info.value.witness

    def test_requires_lift(self, pair):
        """Test that two labels in one column are refused."""
        with pytest.raises(PreconditionError):
            build_main_coupling(point_mass((1, 1)), point_mass((1, 1)), pair)

    def test_requires_section(self):
        """Test that the construction needs a distinguished section."""
        pm = FibreMap.from_fibre_sizes((2,))
        with pytest.raises(InputError):
            build_main_coupling(point_mass((0, 0)), point_mass((0, 0)), pm)

    def test_singleton_columns(self):
        """Test that singleton columns reduce to plain domination."""
        pm = FibreMap.from_fibre_sizes((1, 1), (0, 0))
        mu = point_mass((0, 1))
        rho = uniform([(0, 1), (1, 1)])
        assert is_monotone_coupling(build_main_coupling(mu, rho, pm), mu, rho)

    @pytest.mark.parametrize("seed", range(40))
    def test_random_instances(self, seed):
        """Test the construction on seeded random instances satisfying both assumptions."""
        instance = random_main_instance(np.random.default_rng(seed))
        assert is_pi_lift(instance.mu, instance.pm)
        assert check_assumption_A(instance.rho, instance.pm).holds
        assert check_assumption_B(instance.mu, instance.rho, instance.pm).holds
        coupling = build_main_coupling(instance.mu, instance.rho, instance.pm)
        assert is_monotone_coupling(coupling, instance.mu, instance.rho)

    def test_random_raw_targets(self):
        """Test the construction on raw random targets that pass the distinguished-site check."""
        rng = np.random.default_rng(7)
        asymmetric = 0
        for _ in range(60):
            instance = random_main_instance(rng, exchangeable=False)
            assert check_assumption_A(instance.rho, instance.pm).holds
            assert check_assumption_B(instance.mu, instance.rho, instance.pm).holds
            asymmetric += instance.rho != exchangeable_symmetrization(instance.rho, instance.pm)
            coupling = build_main_coupling(instance.mu, instance.rho, instance.pm)
            assert is_monotone_coupling(coupling, instance.mu, instance.rho)
        assert asymmetric > 0

    @pytest.mark.slow
    def test_random_instances_acceptance(self):
        """Test a thousand seeded random instances, half of them on raw targets."""
        rng = np.random.default_rng(20240611)
        for i in range(1000):
            instance = random_main_instance(rng, exchangeable=i % 2 == 0)
            coupling = build_main_coupling(instance.mu, instance.rho, instance.pm)
            assert is_monotone_coupling(coupling, instance.mu, instance.rho)


class TestOneColumnCoupling:
    """Test suite for the greedy single-column coupling."""

    def test_greedy_placement(self):
        """Test the coupling of a half-present label on site 0."""
        rho = uniform([(1, 0), (0, 1)])
        coupling = one_column_coupling({(1, 0): Fraction(1, 2), (0, 0): Fraction(1, 2)}, rho)
        assert coupling[((1, 0), (1, 0))] == Fraction(1, 2)
        assert coupling[((0, 0), (0, 1))] == Fraction(1, 2)
        assert coupling.second_marginal() == rho
        assert coupling.is_supported_on()

    def test_precondition_names_position(self):
        """Test that the failing position is reported."""
        with pytest.raises(PreconditionError) as exc_info:
            one_column_coupling({(1, 1): 1}, point_mass((1, 0)))
        assert exc_info.value.position == 1

    def test_law_must_sum_to_one(self):
        """Test that a defective (value, position) law is refused."""
        with pytest.raises(InputError):
            one_column_coupling({(1, 0): Fraction(1, 2)}, point_mass((1, 0)))

    def test_measure_input(self):
        """Test the two-site measure form of the (value, position) law."""
        law = FiniteMeasure(Space(2, 1), {(1, 1): Fraction(1, 3), (0, 0): Fraction(2, 3)})
        rho = bernoulli_product(Fraction(1, 2), 2)
        coupling = one_column_coupling(law, rho)
        assert coupling.is_supported_on()
        assert coupling.first_marginal() == FiniteMeasure(Space(2, 1), {(0, 1): Fraction(1, 3), (0, 0): Fraction(2, 3)})

    def test_value_position_law(self):
        """Test the reading of a one-column lift."""
        law = value_position_law(uniform([(0, 0), (0, 1)]))
        assert law == {(0, 0): Fraction(1, 2), (1, 1): Fraction(1, 2)}
        with pytest.raises(PreconditionError):
            value_position_law(point_mass((1, 1)))

    @pytest.mark.parametrize("seed", range(5))
    def test_random_columns(self, seed):
        """Test seeded random columns of every small width and label bound."""
        rng = np.random.default_rng(seed)
        for width in (1, 2, 3):
            for label_bound in (1, 2, 3):
                for _ in range(20):
                    law, rho = random_one_column_instance(rng, width, label_bound)
                    coupling = one_column_coupling(law, rho)
                    assert coupling.second_marginal() == rho
                    assert coupling.is_supported_on()
