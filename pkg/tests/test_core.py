"""Tests for measures, couplings and the domination decision."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochastic_lifts.core.coupling import (
    Coupling,
    compose_couplings,
    diagonal_coupling,
    extend_coupling,
    integrate_couplings,
    is_monotone_coupling,
    product_coupling,
)
from stochastic_lifts.core.domination import (
    dominates,
    domination_by_up_sets,
    enumerate_up_sets,
    measure_of_up_set,
    up_closure,
)
from stochastic_lifts.core.measure import (
    FiniteMeasure,
    Space,
    as_fraction,
    bernoulli_product,
    conditional,
    format_fraction,
    mixture,
    point_mass,
    product_measure,
    pushforward,
    uniform,
)
from stochastic_lifts.core.serialization import (
    coupling_from_dict,
    coupling_to_dict,
    load_measure,
    measure_from_dict,
    measure_to_dict,
    save_measure,
)
from stochastic_lifts.errors import ConditioningError, InputError, SizeLimitError


@st.composite
def measures(draw, space: Space):
    configurations = list(space.configurations())
    weights = draw(st.lists(st.integers(0, 4), min_size=len(configurations), max_size=len(configurations)))
    if not any(weights):
        weights[draw(st.integers(0, len(configurations) - 1))] = 1
    return FiniteMeasure.from_weights(space, dict(zip(configurations, weights)), normalize=True)


class TestFiniteMeasure:
    """Test suite for exact measures."""

    def test_rejects_bad_total(self):
        """Test that weights must sum to one."""
        with pytest.raises(InputError) as exc_info:
            FiniteMeasure(Space(1, 1), {(0,): Fraction(1, 2)})
        assert "sum to 1/2" in str(exc_info.value)

    def test_rejects_out_of_range_label(self):
        """Test that configurations outside the space are refused."""
        with pytest.raises(InputError):
            FiniteMeasure(Space(1, 1), {(2,): 1})

    def test_from_weights_normalizes_and_drops_zeros(self):
        """Test normalization of raw weights."""
        mu = FiniteMeasure.from_weights(Space(1, 2), {(0,): 1, (1,): 0, (2,): 3}, normalize=True)
        assert mu.support == ((0,), (2,))
        assert mu[(2,)] == Fraction(3, 4)
        assert mu[(1,)] == 0

    def test_as_fraction_inputs(self):
        """Test the accepted rational spellings."""
        assert as_fraction("3/8") == Fraction(3, 8)
        assert as_fraction(0.3) == Fraction(3, 10)
        assert as_fraction(2) == Fraction(2)
        with pytest.raises(InputError):
            as_fraction("abc")
        with pytest.raises(InputError):
            as_fraction(True)
        assert format_fraction(Fraction(2)) == "2/1"

    def test_bernoulli_product(self):
        """Test the i.i.d. Bernoulli law."""
        mu = bernoulli_product(Fraction(1, 3), 2)
        assert mu[(1, 1)] == Fraction(1, 9)
        assert mu[(0, 0)] == Fraction(4, 9)
        assert len(bernoulli_product(0, 3)) == 1

    def test_pushforward_and_marginal(self, lower_measure):
        """Test image measures under relabellings and maps."""
        assert lower_measure.marginal([0]) == uniform([(0,), (1,)])
        image = pushforward(lower_measure, lambda x: (x[0] + x[1],))
        assert image[(1,)] == Fraction(1, 2)
        with pytest.raises(InputError):
            pushforward(lower_measure, [3])

    def test_conditional(self, lower_measure):
        """Test conditioning, including on a null event."""
        assert conditional(lower_measure, lambda x: x[0] == 1) == point_mass((1, 0))
        with pytest.raises(ConditioningError):
            conditional(lower_measure, lambda x: x[1] == 1)

    def test_product_measure_blocks(self):
        """Test placing factors on interleaved blocks."""
        first = point_mass((1,))
        second = uniform([(0,), (1,)])
        mu = product_measure([first, second], [[1], [0]])
        assert mu == uniform([(0, 1), (1, 1)])
        with pytest.raises(InputError):
            product_measure([first, second], [[0], [0]])

    def test_mixture(self, lower_measure, upper_measure):
        """Test convex combinations."""
        mu = mixture([(Fraction(1, 2), lower_measure), (Fraction(1, 2), upper_measure)])
        assert mu[(1, 0)] == Fraction(1, 2)
        with pytest.raises(InputError):
            mixture([(Fraction(1, 3), lower_measure)])


class TestCouplings:
    """Test suite for coupling constructions."""

    def test_diagonal_is_monotone(self, lower_measure):
        """Test that the diagonal coupling of a measure with itself is monotone."""
        c = diagonal_coupling(lower_measure)
        assert is_monotone_coupling(c, lower_measure, lower_measure)

    def test_product_coupling_marginals(self, lower_measure, upper_measure):
        """Test the marginals of the independent coupling."""
        c = product_coupling(lower_measure, upper_measure)
        assert c.first_marginal() == lower_measure
        assert c.second_marginal() == upper_measure
        assert c.is_supported_on()
        assert not product_coupling(upper_measure, lower_measure).is_supported_on()

    def test_extend_coupling_restores_marginals(self, lower_measure, upper_measure):
        """Test that extension through projections keeps both marginals."""
        first = lambda x: (x[0],)
        eta = Coupling(Space(1, 1), Space(1, 1), {((0,), (1,)): Fraction(1, 2), ((1,), (1,)): Fraction(1, 2)})
        c = extend_coupling(lower_measure, upper_measure, first, first, eta)
        assert c.first_marginal() == lower_measure
        assert c.second_marginal() == upper_measure
        assert c.pushforward(first, first, Space(1, 1), Space(1, 1)) == eta

    def test_extend_coupling_checks_marginals(self, lower_measure, upper_measure):
        """Test that a coupling of the wrong images is refused."""
        first = lambda x: (x[0],)
        eta = diagonal_coupling(point_mass((1,)))
        with pytest.raises(InputError):
            extend_coupling(lower_measure, upper_measure, first, first, eta)

    def test_integrate_couplings(self, lower_measure):
        """Test mixtures of couplings."""
        c = diagonal_coupling(lower_measure)
        assert integrate_couplings([(Fraction(1, 4), c), (Fraction(3, 4), c)]) == c
        with pytest.raises(InputError):
            integrate_couplings([(Fraction(1, 4), c)])

    def test_compose_is_transitive(self, lower_measure, upper_measure):
        """Test that gluing two monotone couplings gives a monotone coupling."""
        top = point_mass((1, 1))
        c12 = dominates(lower_measure, upper_measure).coupling
        c23 = dominates(upper_measure, top).coupling
        c13 = compose_couplings(c12, c23)
        assert is_monotone_coupling(c13, lower_measure, top)

    def test_coupling_json(self, lower_measure, upper_measure):
        """Test the pair-key JSON format."""
        c = dominates(lower_measure, upper_measure).coupling
        data = coupling_to_dict(c)
        assert all("|" in key for key in data["weights"])
        assert coupling_from_dict(data) == c


class TestDominates:
    """Test suite for the max-flow domination decision."""

    def test_positive_verdict_has_monotone_coupling(self, lower_measure, upper_measure):
        """Test the coupling certificate of a positive verdict."""
        verdict = dominates(lower_measure, upper_measure)
        assert verdict.holds
        assert verdict.flow_value == 1
        assert is_monotone_coupling(verdict.coupling, lower_measure, upper_measure)

    def test_negative_verdict_has_separating_up_set(self, lower_measure, upper_measure):
        """Test the up-set certificate of a negative verdict."""
        verdict = dominates(upper_measure, lower_measure)
        assert not verdict.holds
        assert verdict.mu_mass > verdict.rho_mass
        assert verdict.violator.measure(upper_measure) == verdict.mu_mass

    def test_mismatched_spaces(self, lower_measure):
        """Test that measures on different spaces are refused."""
        with pytest.raises(InputError) as exc_info:
            dominates(lower_measure, point_mass((0,)))
        assert "Mismatched spaces" in str(exc_info.value)

    def test_custom_order(self):
        """Test domination under a total order on two labels reversed."""
        reversed_leq = lambda x, y: x[0] >= y[0]
        mu, rho = point_mass((1,)), point_mass((0,))
        assert dominates(mu, rho, leq=reversed_leq).holds
        assert not dominates(mu, rho).holds

    def test_up_set_counts(self):
        """Test the up-set enumeration against the Dedekind numbers 3, 6, 20."""
        for n, expected in ((1, 3), (2, 6), (3, 20)):
            assert len(list(enumerate_up_sets(list(Space(n, 1).configurations())))) == expected

    def test_up_closure_minimal_elements(self):
        """Test that only minimal generators are kept."""
        u = up_closure([(1, 0), (1, 1), (0, 1)])
        assert u.generators == frozenset({(1, 0), (0, 1)})
        assert (1, 1) in u and (0, 0) not in u

    def test_measure_of_up_set(self):
        """Test the mass of the up-set generated by one open coordinate of two."""
        mass = measure_of_up_set(bernoulli_product(Fraction(1, 2), 2), [(1, 0), (0, 1), (1, 1)])
        assert mass == Fraction(3, 4)

    def test_oracle_cap(self):
        """Test that the up-set oracle refuses large spaces."""
        mu = point_mass((0, 0, 0, 0, 0))
        with pytest.raises(SizeLimitError) as exc_info:
            domination_by_up_sets(mu, mu)
        assert exc_info.value.cap == 16

    @pytest.mark.property_based
    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_agrees_with_up_set_oracle(self, data):
        """Test that max-flow and the exhaustive oracle agree on small spaces."""
        space = data.draw(st.sampled_from([Space(2, 1), Space(1, 3), Space(2, 2)]))
        mu = data.draw(measures(space))
        rho = data.draw(measures(space))
        assert dominates(mu, rho).holds == domination_by_up_sets(mu, rho)

    @pytest.mark.property_based
    @settings(max_examples=40, deadline=None)
    @given(measures(Space(2, 1)))
    def test_bernoulli_monotone_in_p(self, mu):
        """Test that Bernoulli products increase with p and that every measure sits between the extremes."""
        assert dominates(bernoulli_product(Fraction(1, 3), 2), bernoulli_product(Fraction(1, 2), 2)).holds
        assert dominates(point_mass((0, 0)), mu).holds
        assert dominates(mu, point_mass((1, 1))).holds


class TestSerialization:
    """Test suite for measure files."""

    def test_measure_file(self, tmp_path, lower_measure):
        """Test writing and reading a measure file."""
        path = save_measure(lower_measure, str(tmp_path / "mu.json"))
        assert load_measure(path) == lower_measure
        assert measure_to_dict(lower_measure)["weights"] == {"0,0": "1/2", "1,0": "1/2"}

    def test_malformed_measure(self):
        """Test that a measure without weights is refused."""
        with pytest.raises(InputError):
            measure_from_dict({"sites": 1, "label_bound": 1})
