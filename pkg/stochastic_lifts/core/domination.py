"""Stochastic domination: max-flow decision, up-set certificates and the up-set oracle."""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence

import networkx as nx
from networkx.algorithms.flow import edmonds_karp

from ..config import get_settings
from ..errors import InputError, InvariantViolation, SizeLimitError
from .coupling import Coupling, PartialOrder, product_leq
from .measure import Configuration, FiniteMeasure

logger = logging.getLogger(__name__)

SOURCE = "source"
SINK = "sink"


@dataclass(frozen=True)
class UpSet:
    """An upward-closed set, stored by its minimal elements."""
    generators: FrozenSet[Configuration]
    leq: PartialOrder = field(default=product_leq, compare=False)

    def __contains__(self, x: Configuration) -> bool:
        return any(self.leq(g, x) for g in self.generators)

    def measure(self, mu: FiniteMeasure) -> Fraction:
        return mu.probability(lambda x: x in self)

    def members(self, universe: Iterable[Configuration]) -> FrozenSet[Configuration]:
        return frozenset(x for x in universe if x in self)


def up_closure(elements: Iterable[Configuration], leq: Optional[PartialOrder] = None) -> UpSet:
    """Smallest up-set containing `elements`."""
    order = leq or product_leq
    elements = set(elements)
    minimal = frozenset(
        x for x in elements
        if not any(y != x and order(y, x) for y in elements)
    )
    return UpSet(minimal, order)


def enumerate_up_sets(
    universe: Sequence[Configuration],
    leq: Optional[PartialOrder] = None
) -> Iterator[FrozenSet[Configuration]]:
    """Yield every up-set of a finite poset exactly once.

    Elements are decided from the top down; an element may join only when
    everything strictly above it already has.
    """
    order = leq or product_leq
    elements = list(dict.fromkeys(universe))
    below = {x: sum(1 for y in elements if y != x and order(y, x)) for x in elements}
    elements.sort(key=lambda x: -below[x])
    above = {
        x: [y for y in elements if y != x and order(x, y)]
        for x in elements
    }

    def build(index: int, chosen: FrozenSet[Configuration]) -> Iterator[FrozenSet[Configuration]]:
        if index == len(elements):
            yield chosen
            return
        x = elements[index]
        yield from build(index + 1, chosen)
        if all(y in chosen for y in above[x]):
            yield from build(index + 1, chosen | {x})

    yield from build(0, frozenset())


@dataclass(frozen=True)
class DominationVerdict:
    """Outcome of a domination query with its certificate.

    A positive verdict carries a monotone coupling, a negative one an up-set
    U with mu(U) > rho(U).
    """
    holds: bool
    flow_value: Fraction
    coupling: Optional[Coupling] = None
    violator: Optional[UpSet] = None
    mu_mass: Optional[Fraction] = None
    rho_mass: Optional[Fraction] = None

    def __bool__(self) -> bool:
        return self.holds


def dominates(
    mu: FiniteMeasure,
    rho: FiniteMeasure,
    leq: Optional[PartialOrder] = None
) -> DominationVerdict:
    """Decide whether mu is stochastically dominated by rho.

    Solves a max-flow problem from the support of mu to the support of rho
    with an uncapacitated arc alpha -> beta whenever alpha <= beta. The flow
    value is exact; it equals 1 iff a monotone coupling exists.

    Args:
        mu: The smaller measure
        rho: The larger measure
        leq: Partial order on configurations (defaults to the product order)

    Returns:
        A verdict with a coupling witness or an up-set violator

    Raises:
        InputError: If the two measures live on different spaces
    """
    if mu.space != rho.space:
        raise InputError(f"Mismatched spaces: {mu.space} vs {rho.space}")
    order = leq or product_leq

    graph = nx.DiGraph()
    for alpha, w in mu.items():
        graph.add_edge(SOURCE, ("mu", alpha), capacity=w)
    for beta, w in rho.items():
        graph.add_edge(("rho", beta), SINK, capacity=w)
    for alpha in mu.support:
        for beta in rho.support:
            if order(alpha, beta):
                graph.add_edge(("mu", alpha), ("rho", beta))

    residual = edmonds_karp(graph, SOURCE, SINK)
    value = Fraction(residual.graph["flow_value"])
    logger.debug(f"Max-flow value {value} on {len(mu)}x{len(rho)} supports")

    if value == 1:
        weights: Dict = {}
        for alpha in mu.support:
            for node, attr in residual[("mu", alpha)].items():
                if node != SOURCE and node[0] == "rho" and attr["flow"] > 0:
                    weights[(alpha, node[1])] = Fraction(attr["flow"])
        coupling = Coupling(mu.space, rho.space, weights)
        return DominationVerdict(True, value, coupling=coupling)

    open_arcs = nx.DiGraph()
    open_arcs.add_node(SOURCE)
    open_arcs.add_edges_from(
        (u, v) for u, v, attr in residual.edges(data=True)
        if attr["capacity"] - attr["flow"] > 0
    )
    reachable = nx.descendants(open_arcs, SOURCE)
    cut_side = [node[1] for node in reachable if node != SINK and node[0] == "mu"]
    violator = up_closure(cut_side, order)
    mu_mass, rho_mass = violator.measure(mu), violator.measure(rho)
    if not mu_mass > rho_mass:
        raise InvariantViolation(
            f"Min-cut up-set does not separate the measures: {mu_mass} <= {rho_mass}"
        )
    return DominationVerdict(False, value, violator=violator, mu_mass=mu_mass, rho_mass=rho_mass)


def measure_of_up_set(mu: FiniteMeasure, up_set: Iterable[Configuration]) -> Fraction:
    """Total mass mu puts on the configurations of an up-set."""
    return sum((mu[x] for x in up_set), Fraction(0))


def domination_by_up_sets(
    mu: FiniteMeasure,
    rho: FiniteMeasure,
    leq: Optional[PartialOrder] = None,
    universe: Optional[Sequence[Configuration]] = None,
    cap: Optional[int] = None
) -> bool:
    """Independent oracle: mu(U) <= rho(U) for every up-set U of the space.

    Args:
        mu: The smaller measure
        rho: The larger measure
        leq: Partial order (defaults to the product order)
        universe: Elements of the poset; defaults to the whole product space
        cap: Maximal universe size (defaults to the UP_SET_ORACLE_CAP setting)

    Returns:
        Whether every up-set satisfies the inequality
    """
    if mu.space != rho.space:
        raise InputError(f"Mismatched spaces: {mu.space} vs {rho.space}")
    cap = cap if cap is not None else get_settings().up_set_oracle_cap
    elements: List[Configuration] = list(universe) if universe is not None else list(mu.space.configurations())
    if len(elements) > cap:
        raise SizeLimitError("up-set oracle universe", len(elements), cap)
    for up_set in enumerate_up_sets(elements, leq):
        if measure_of_up_set(mu, up_set) > measure_of_up_set(rho, up_set):
            return False
    return True
