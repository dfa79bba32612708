"""Tests for fibre maps, lifted measures, assumption checkers and the paired lift."""

from fractions import Fraction

import pytest

from stochastic_lifts.core.measure import bernoulli_product, point_mass, uniform
from stochastic_lifts.errors import InputError, PreconditionError, SizeLimitError
from stochastic_lifts.lift.assumptions import (
    all_transpositions,
    check_assumption_A,
    check_assumption_B,
    check_assumption_C,
    check_corollary_exchange,
    check_corollary_indep,
    check_sufficiently_symmetric,
)
from stochastic_lifts.lift.fibre import FibreMap
from stochastic_lifts.lift.lifting import (
    LiftEnvironment,
    exchangeable_symmetrization,
    flatten_column,
    horizontal_marginal,
    is_pi_lift,
    lift_distribution,
    pushdown,
    s_marginal,
)
from stochastic_lifts.lift.multilift import (
    MultiliftEnvironment,
    deterministic_pair_strategies,
    multilift_domination,
)
from stochastic_lifts.lift.random_instances import bernoulli_lift_verdicts


@pytest.fixture
def two_one():
    """Fibres {0, 1} and {2}, distinguished section (1, 2)."""
    return FibreMap.from_fibre_sizes((2, 1), (1, 0))


@pytest.fixture
def pair():
    """One column of two sites, distinguished site 0."""
    return FibreMap.from_fibre_sizes((2,), (0,))


@pytest.fixture
def half_lift(pair):
    """Bernoulli(1/2) label always placed on site 0."""
    return uniform([(0, 0), (1, 0)])


class TestFibreMap:
    """Test suite for surjections and their sections."""

    def test_consecutive_fibres(self, two_one):
        """Test the layout built from fibre sizes."""
        assert two_one.pi == (0, 0, 1)
        assert two_one.fibres == ((0, 1), (2,))
        assert two_one.section == (1, 2)
        assert two_one.section_count() == 2
        assert list(two_one.sections()) == [(0, 2), (1, 2)]

    def test_rejects_non_surjection(self):
        """Test that a column without sites is refused."""
        with pytest.raises(InputError) as exc_info:
            FibreMap(2, 2, (0, 0))
        assert "missing [1]" in str(exc_info.value)

    def test_rejects_bad_section(self):
        """Test that a section must pick one site per column."""
        with pytest.raises(InputError):
            FibreMap(3, 2, (0, 0, 1), (2, 1))

    def test_dict_form(self, two_one):
        """Test the JSON-ready form."""
        assert FibreMap.from_dict(two_one.to_dict()) == two_one
        with pytest.raises(InputError):
            FibreMap.from_dict({"A": 2})


class TestLifting:
    """Test suite for lifts, pushdowns and flattening."""

    def test_pushdown(self, two_one):
        """Test the per-fibre maximum of a lift."""
        mu = uniform([(1, 0, 0), (0, 1, 1)])
        assert is_pi_lift(mu, two_one)
        assert pushdown(mu, two_one) == uniform([(1, 0), (1, 1)])

    def test_pushdown_requires_lift(self, two_one):
        """Test that two labels in one fibre are refused."""
        with pytest.raises(PreconditionError):
            pushdown(point_mass((1, 1, 0)), two_one)

    def test_flatten_moves_to_section(self, two_one):
        """Test that flattening moves the column maximum onto the distinguished site."""
        assert flatten_column(point_mass((1, 0, 0)), two_one, 0) == point_mass((0, 1, 0))

    def test_s_marginals(self, two_one):
        """Test section marginals and the horizontal marginal."""
        rho = point_mass((1, 0, 0))
        assert s_marginal(rho, two_one, (0, 2)) == point_mass((1, 0))
        assert s_marginal(rho, two_one, (1, 2)) == point_mass((0, 0))
        with pytest.raises(InputError):
            horizontal_marginal(rho, two_one)
        assert horizontal_marginal(point_mass((1, 1, 0)), two_one) == point_mass((1, 0))

    def test_symmetrization(self, pair):
        """Test averaging over fibre permutations."""
        assert exchangeable_symmetrization(point_mass((1, 0)), pair) == uniform([(1, 0), (0, 1)])

    def test_lift_distribution(self, pair):
        """Test the law of the lifted labels under a deterministic strategy."""
        strategy = {(0,): (1,), (1,): (0,)}
        env = LiftEnvironment.from_independent(pair, bernoulli_product(Fraction(1, 2), 1), strategy)
        assert lift_distribution(env) == uniform([(0, 0), (1, 0)])
        assert env.x_marginal() == bernoulli_product(Fraction(1, 2), 1)

    def test_kernel_must_sum_to_one(self, pair):
        """Test that a defective section law is refused."""
        with pytest.raises(InputError):
            LiftEnvironment.from_kernel(pair, point_mass((1,)), lambda x: {(0,): Fraction(1, 2)})


class TestAssumptions:
    """Test suite for the hypothesis checkers."""

    def test_assumption_A_fails_on_heavy_section(self, pair):
        """Test that a larger label on the distinguished site breaks assumption A."""
        report = check_assumption_A(point_mass((1, 0)), pair)
        assert not report.holds
        assert "column 0, site 1" in report.witness

    def test_assumptions_hold_on_exchangeable_target(self, pair, half_lift):
        """Test A and B on a symmetric target."""
        rho = bernoulli_product(Fraction(1, 2), 2)
        assert check_assumption_A(rho, pair).holds
        assert check_assumption_B(half_lift, rho, pair).holds
        assert check_assumption_C(half_lift, rho, pair).holds

    def test_assumption_B_witness(self, pair, half_lift):
        """Test the up-set witness of a failing assumption B."""
        report = check_assumption_B(half_lift, point_mass((0, 0)), pair)
        assert not report.holds
        assert report.witness.startswith("flattened measure: up-set")

    def test_assumption_C_cap(self, pair, half_lift):
        """Test the section enumeration cap."""
        with pytest.raises(SizeLimitError):
            check_assumption_C(half_lift, half_lift, pair, cap=1)

    def test_symmetry(self, pair):
        """Test transitivity and invariance of the column symmetries."""
        generators = all_transpositions(pair)
        assert check_sufficiently_symmetric(bernoulli_product(Fraction(1, 3), 2), pair, generators)
        assert not check_sufficiently_symmetric(point_mass((1, 0)), pair, generators)
        assert not check_sufficiently_symmetric(bernoulli_product(Fraction(1, 3), 2), pair, {0: []})

    def test_corollaries(self, pair, half_lift):
        """Test both corollary checkers on the Bernoulli target."""
        rho = bernoulli_product(Fraction(1, 2), 2)
        exchange = check_corollary_exchange(half_lift, rho, pair, all_transpositions(pair))
        assert exchange.hypotheses_hold and exchange.conclusion_holds
        indep = check_corollary_indep(half_lift, pair, [rho], [bernoulli_product(Fraction(1, 2), 1)])
        assert indep.hypotheses_hold and indep.conclusion_holds

    def test_corollary_reports_failed_hypothesis(self, pair):
        """Test that a pushdown above the horizontal marginal is reported."""
        rho = bernoulli_product(Fraction(1, 4), 2)
        mu = point_mass((1, 0))
        report = check_corollary_exchange(mu, rho, pair, all_transpositions(pair))
        assert not report.hypotheses_hold
        assert "horizontal marginal" in report.failed_hypothesis
        assert not report.conclusion_holds


class TestBernoulliLifts:
    """Test suite for deterministic strategies against i.i.d. labels."""

    @pytest.mark.parametrize("p", [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)])
    def test_single_column(self, p):
        """Test that every strategy on one column of three sites is dominated."""
        pm = FibreMap.from_fibre_sizes((3,))
        verdicts = [holds for _, holds in bernoulli_lift_verdicts(pm, p)]
        assert len(verdicts) == 9
        assert all(verdicts)

    def test_two_columns(self):
        """Test every strategy on fibres of sizes 2 and 2 at p = 1/2."""
        pm = FibreMap.from_fibre_sizes((2, 2))
        verdicts = [holds for _, holds in bernoulli_lift_verdicts(pm, Fraction(1, 2))]
        assert len(verdicts) == 4 ** 4
        assert all(verdicts)

    @pytest.mark.slow
    @pytest.mark.parametrize("sizes", [(3, 2), (2, 3), (3, 3)])
    @pytest.mark.parametrize("p", [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)])
    def test_exhaustive(self, sizes, p):
        """Test every strategy on two columns of up to three sites."""
        pm = FibreMap.from_fibre_sizes(sizes)
        assert all(holds for _, holds in bernoulli_lift_verdicts(pm, p))


class TestMultilift:
    """Test suite for the paired lift."""

    @pytest.mark.parametrize("p", [Fraction(1, 4), Fraction(1, 2)])
    def test_adaptive_single_column(self, p):
        """Test the decoded conditions for every adaptive rule on a column of two sites."""
        pm = FibreMap.from_fibre_sizes((2,))
        for strategy in deterministic_pair_strategies(pm, adaptive=True):
            report = multilift_domination(MultiliftEnvironment.deterministic(pm, p, strategy), pm, p)
            assert report.holds, report.failures
            assert report.checks > 0

    @pytest.mark.parametrize("sizes", [(2, 2), (2, 3)])
    def test_constant_pairs_two_columns(self, sizes):
        """Test the decoded conditions for constant rules on two columns."""
        pm = FibreMap.from_fibre_sizes(sizes)
        p = Fraction(1, 2)
        for strategy in deterministic_pair_strategies(pm):
            assert multilift_domination(MultiliftEnvironment.deterministic(pm, p, strategy), pm, p).holds

    def test_equal_sections_refused(self):
        """Test that S = S† is a precondition failure."""
        pm = FibreMap.from_fibre_sizes((2,))
        env = MultiliftEnvironment.deterministic(pm, Fraction(1, 2), lambda x, xd: ((0,), (0,)))
        with pytest.raises(PreconditionError) as exc_info:
            multilift_domination(env, pm, Fraction(1, 2))
        assert "coincide" in str(exc_info.value)

    def test_strategy_cap(self):
        """Test the enumeration cap on adaptive rules."""
        pm = FibreMap.from_fibre_sizes((3, 3))
        with pytest.raises(SizeLimitError):
            next(deterministic_pair_strategies(pm, adaptive=True))

    def test_paired_target_marginal(self):
        """Test that the lifted pair labels are dominated when the sites differ."""
        pm = FibreMap.from_fibre_sizes((2,))
        env = MultiliftEnvironment.deterministic(pm, Fraction(1, 2), lambda x, xd: ((0,), (1,)))
        assert env.joint.sites == 4
        assert multilift_domination(env, pm, Fraction(1, 2)).holds