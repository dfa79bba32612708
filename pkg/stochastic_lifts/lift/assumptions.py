"""Checkers for the hypotheses of the coupling theorems and their corollaries."""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Union

from ..config import get_settings
from ..core.domination import DominationVerdict, dominates
from ..core.measure import Configuration, FiniteMeasure, format_fraction, product_measure, pushforward
from ..errors import InputError, SizeLimitError
from .fibre import FibreMap
from .lifting import flatten_columns, horizontal_marginal, is_pi_lift, permute, pushdown, s_marginal

logger = logging.getLogger(__name__)

Generators = Union[Mapping[int, Sequence[Mapping[int, int]]], Sequence[Sequence[Mapping[int, int]]]]


@dataclass(frozen=True)
class AssumptionReport:
    """Verdict of an assumption check; `witness` describes the first failure."""
    holds: bool
    witness: Optional[str] = None

    def __post_init__(self):
        if self.holds == (self.witness is not None):
            raise ValueError("A witness is required exactly when the assumption fails")

    def __bool__(self) -> bool:
        return self.holds


def describe_violator(verdict: DominationVerdict) -> str:
    generators = sorted(verdict.violator.generators)
    return (
        f"up-set generated by {generators} has mass "
        f"{format_fraction(verdict.mu_mass)} > {format_fraction(verdict.rho_mass)}"
    )


def _tail(law: Dict[int, Fraction], threshold: int) -> Fraction:
    return sum((w for label, w in law.items() if label >= threshold), Fraction(0))


def check_assumption_A(rho: FiniteMeasure, pm: FibreMap) -> AssumptionReport:
    """Conditionally on the outside of each column, the distinguished site is the smallest.

    For every column b, every site a above b and every atom H of the labels
    outside the column, the law of the label at section[b] given H must be
    dominated by the law of the label at a given H.
    """
    section = pm.require_section()
    if rho.sites != pm.a_count:
        raise InputError(f"Measure on {rho.sites} sites, but |A| = {pm.a_count}")
    for b in range(pm.b_count):
        column = pm.fibre(b)
        if len(column) == 1:
            continue
        outside = pm.outside(b)
        groups: Dict[Configuration, List] = {}
        for x, w in rho.items():
            groups.setdefault(tuple(x[a] for a in outside), []).append((x, w))
        for h, atoms in sorted(groups.items()):
            base: Dict[int, Fraction] = {}
            for x, w in atoms:
                base[x[section[b]]] = base.get(x[section[b]], Fraction(0)) + w
            for a in column:
                if a == section[b]:
                    continue
                other: Dict[int, Fraction] = {}
                for x, w in atoms:
                    other[x[a]] = other.get(x[a], Fraction(0)) + w
                for t in range(1, rho.label_bound + 1):
                    if _tail(base, t) > _tail(other, t):
                        return AssumptionReport(
                            False,
                            f"column {b}, site {a}, outside atom {h}: "
                            f"P(label at {section[b]} >= {t}) exceeds P(label at {a} >= {t})",
                        )
    return AssumptionReport(True)


def flattened_domination(mu: FiniteMeasure, rho: FiniteMeasure, pm: FibreMap) -> DominationVerdict:
    """Domination verdict of the fully flattened mu against rho."""
    pm.require_section()
    if not is_pi_lift(mu, pm):
        raise InputError("Assumption B is only defined for lifted measures")
    return dominates(flatten_columns(mu, pm), rho)


def check_assumption_B(mu: FiniteMeasure, rho: FiniteMeasure, pm: FibreMap) -> AssumptionReport:
    """mu moved onto the distinguished section is dominated by rho."""
    verdict = flattened_domination(mu, rho, pm)
    if verdict.holds:
        return AssumptionReport(True)
    return AssumptionReport(False, f"flattened measure: {describe_violator(verdict)}")


def check_assumption_C(
    mu: FiniteMeasure,
    rho: FiniteMeasure,
    pm: FibreMap,
    cap: Optional[int] = None
) -> AssumptionReport:
    """The pushdown of mu is dominated by every s-marginal of rho.

    Raises:
        SizeLimitError: If the number of sections exceeds the cap
    """
    cap = cap if cap is not None else get_settings().section_cap
    count = pm.section_count()
    if count > cap:
        raise SizeLimitError("section enumeration", count, cap)
    if mu.space != rho.space:
        raise InputError(f"Mismatched spaces: {mu.space} vs {rho.space}")
    down = pushdown(mu, pm)
    for section in pm.sections():
        verdict = dominates(down, s_marginal(rho, pm, section))
        if not verdict.holds:
            return AssumptionReport(False, f"section {section}: {describe_violator(verdict)}")
    logger.debug(f"Assumption C holds on all {count} sections")
    return AssumptionReport(True)


def _column_generators(generators: Generators, b: int) -> Sequence[Mapping[int, int]]:
    if isinstance(generators, Mapping):
        return generators.get(b, ())
    return generators[b] if b < len(generators) else ()


def check_sufficiently_symmetric(rho: FiniteMeasure, pm: FibreMap, generators: Generators) -> bool:
    """Each column carries a transitive group of symmetries of rho.

    Args:
        rho: Measure on A
        pm: Fibre map
        generators: Per column, permutations of that column given as
            {site: image}; all within-column transpositions test
            exchangeability

    Returns:
        True iff every generated group is transitive on its column and every
        generator preserves rho

    Raises:
        InputError: If a generator does not permute its own column
    """
    transitive = True
    for b in range(pm.b_count):
        column = set(pm.fibre(b))
        gens = [dict(g) for g in _column_generators(generators, b)]
        for g in gens:
            if set(g) != column or set(g.values()) != column:
                raise InputError(f"Generator {g} does not permute column {b}")
        start = min(column)
        orbit, frontier = {start}, [start]
        while frontier:
            a = frontier.pop()
            for g in gens:
                if g[a] not in orbit:
                    orbit.add(g[a])
                    frontier.append(g[a])
        if orbit != column:
            transitive = False
        for g in gens:
            image = pushforward(rho, lambda x, s=g: permute(x, s), label_bound=rho.label_bound)
            if image != rho:
                logger.debug(f"Generator {g} of column {b} does not preserve the measure")
                return False
    return transitive


def all_transpositions(pm: FibreMap) -> Dict[int, List[Dict[int, int]]]:
    """Every within-column transposition, as generator lists."""
    generators: Dict[int, List[Dict[int, int]]] = {}
    for b, column in enumerate(pm.fibres):
        swaps = []
        for i, a1 in enumerate(column):
            for a2 in column[i + 1:]:
                g = {a: a for a in column}
                g[a1], g[a2] = a2, a1
                swaps.append(g)
        generators[b] = swaps
    return generators


@dataclass(frozen=True)
class CorollaryReport:
    """Hypothesis verdict and independent domination verdict for a corollary."""
    hypotheses_hold: bool
    conclusion_holds: bool
    failed_hypothesis: Optional[str] = None


def check_corollary_indep(
    mu: FiniteMeasure,
    pm: FibreMap,
    factors: Sequence[FiniteMeasure],
    nus: Sequence[FiniteMeasure]
) -> CorollaryReport:
    """Product targets: every marginal of each column factor dominates nu_b.

    Args:
        mu: Lifted measure on A
        pm: Fibre map
        factors: One measure per column, on the column's sites in increasing order
        nus: One single-site measure per column

    Returns:
        The hypotheses verdict and whether mu is dominated by the product of factors
    """
    failed = None
    if not is_pi_lift(mu, pm):
        failed = "mu is not a lifted measure"
    for b, (factor, nu) in enumerate(zip(factors, nus)):
        for i in range(factor.sites):
            if failed is None and not dominates(nu, factor.marginal([i])).holds:
                failed = f"marginal {i} of column {b} does not dominate nu_{b}"
    target = product_measure(list(factors), [list(f) for f in pm.fibres])
    if failed is None and not dominates(pushdown(mu, pm), product_measure(list(nus))).holds:
        failed = "pushdown is not dominated by the product of the nu_b"
    return CorollaryReport(failed is None, dominates(mu, target).holds, failed)


def check_corollary_exchange(
    mu: FiniteMeasure,
    rho: FiniteMeasure,
    pm: FibreMap,
    generators: Generators
) -> CorollaryReport:
    """Symmetric targets: pushdown dominated by the horizontal marginal."""
    failed = None
    if not is_pi_lift(mu, pm):
        failed = "mu is not a lifted measure"
    elif not check_sufficiently_symmetric(rho, pm, generators):
        failed = "rho is not sufficiently symmetric for the given generators"
    elif not dominates(pushdown(mu, pm), horizontal_marginal(rho, pm)).holds:
        failed = "pushdown is not dominated by the horizontal marginal"
    return CorollaryReport(failed is None, dominates(mu, rho).holds, failed)
