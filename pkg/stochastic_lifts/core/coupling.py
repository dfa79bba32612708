"""Couplings of finite measures and the coupling-surgery operations."""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from ..errors import InputError
from .measure import (
    Configuration,
    ConfigurationMap,
    FiniteMeasure,
    RationalLike,
    Space,
    as_fraction,
    pushforward,
)

logger = logging.getLogger(__name__)

Pair = Tuple[Configuration, Configuration]
PartialOrder = Callable[[Configuration, Configuration], bool]


def product_leq(x: Configuration, y: Configuration) -> bool:
    """Coordinatewise order on label vectors."""
    return all(a <= b for a, b in zip(x, y))


@dataclass(frozen=True)
class Coupling:
    """A probability measure on pairs of configurations.

    `first` and `second` are the spaces of the two coordinates; the
    marginals are recovered by summation.
    """
    first: Space
    second: Space
    weights: Mapping[Pair, Fraction] = field(compare=False)

    def __post_init__(self):
        cleaned: Dict[Pair, Fraction] = {}
        for (x, y), w in self.weights.items():
            x, y = self.first.validate(x), self.second.validate(y)
            w = as_fraction(w)
            if w <= 0:
                raise InputError(f"Non-positive coupling weight {w} at {(x, y)}")
            cleaned[(x, y)] = cleaned.get((x, y), Fraction(0)) + w
        if not cleaned:
            raise InputError("Empty coupling")
        total = sum(cleaned.values(), Fraction(0))
        if total != 1:
            raise InputError(f"Coupling mass is {total}, not 1")
        object.__setattr__(self, "weights", MappingProxyType(dict(sorted(cleaned.items()))))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Coupling):
            return NotImplemented
        return (
            self.first == other.first
            and self.second == other.second
            and dict(self.weights) == dict(other.weights)
        )

    def __hash__(self) -> int:
        return hash((self.first, self.second, frozenset(self.weights.items())))

    def __reduce__(self):
        return (type(self), (self.first, self.second, dict(self.weights)))

    def __len__(self) -> int:
        return len(self.weights)

    def __getitem__(self, pair: Pair) -> Fraction:
        return self.weights.get(pair, Fraction(0))

    def items(self) -> Iterable[Tuple[Pair, Fraction]]:
        return self.weights.items()

    @property
    def support(self) -> Tuple[Pair, ...]:
        return tuple(self.weights)

    def first_marginal(self) -> FiniteMeasure:
        weights: Dict[Configuration, Fraction] = {}
        for (x, _), w in self.weights.items():
            weights[x] = weights.get(x, Fraction(0)) + w
        return FiniteMeasure(self.first, weights)

    def second_marginal(self) -> FiniteMeasure:
        weights: Dict[Configuration, Fraction] = {}
        for (_, y), w in self.weights.items():
            weights[y] = weights.get(y, Fraction(0)) + w
        return FiniteMeasure(self.second, weights)

    def is_supported_on(self, leq: Optional[PartialOrder] = None) -> bool:
        order = leq or product_leq
        return all(order(x, y) for x, y in self.weights)

    def pushforward(
        self,
        h1: ConfigurationMap,
        h2: ConfigurationMap,
        first: Space,
        second: Space
    ) -> "Coupling":
        """Image of the coupling under (h1, h2)."""
        weights: Dict[Pair, Fraction] = {}
        for (x, y), w in self.weights.items():
            pair = (tuple(h1(x)), tuple(h2(y)))
            weights[pair] = weights.get(pair, Fraction(0)) + w
        return Coupling(first, second, weights)


def diagonal_coupling(mu: FiniteMeasure) -> Coupling:
    """The coupling of `mu` with itself supported on the diagonal."""
    return Coupling(mu.space, mu.space, {(x, x): w for x, w in mu.items()})


def product_coupling(mu: FiniteMeasure, rho: FiniteMeasure) -> Coupling:
    """The independent coupling mu ⊗ rho."""
    return Coupling(
        mu.space,
        rho.space,
        {(x, y): wx * wy for x, wx in mu.items() for y, wy in rho.items()},
    )


def is_monotone_coupling(
    c: Coupling,
    mu: FiniteMeasure,
    rho: FiniteMeasure,
    leq: Optional[PartialOrder] = None
) -> bool:
    """True iff `c` has marginals exactly mu and rho and lives on {x <= y}."""
    if c.first != mu.space or c.second != rho.space:
        return False
    if c.first_marginal() != mu or c.second_marginal() != rho:
        return False
    return c.is_supported_on(leq)


def _fibres(nu: FiniteMeasure, h: ConfigurationMap) -> Dict[Configuration, List[Tuple[Configuration, Fraction]]]:
    groups: Dict[Configuration, List[Tuple[Configuration, Fraction]]] = {}
    for x, w in nu.items():
        groups.setdefault(tuple(h(x)), []).append((x, w))
    return groups


def extend_coupling(
    nu1: FiniteMeasure,
    nu2: FiniteMeasure,
    h1: ConfigurationMap,
    h2: ConfigurationMap,
    eta: Coupling
) -> Coupling:
    """Lift a coupling of the pushforwards back to a coupling of nu1 and nu2.

    Each atom (y1, y2) of eta is spread as the product of nu1 conditioned on
    h1 = y1 and nu2 conditioned on h2 = y2. The result has marginals nu1, nu2
    and pushes forward to eta under (h1, h2).

    Args:
        nu1: First measure
        nu2: Second measure
        h1: Map applied to the first coordinate
        h2: Map applied to the second coordinate
        eta: Coupling of pushforward(nu1, h1) and pushforward(nu2, h2)

    Returns:
        The extended coupling

    Raises:
        InputError: If eta's marginals are not the pushforwards
    """
    image1 = pushforward(nu1, h1, label_bound=eta.first.label_bound)
    image2 = pushforward(nu2, h2, label_bound=eta.second.label_bound)
    if eta.first_marginal() != image1:
        raise InputError("First marginal of eta differs from the pushforward of nu1")
    if eta.second_marginal() != image2:
        raise InputError("Second marginal of eta differs from the pushforward of nu2")

    groups1, groups2 = _fibres(nu1, h1), _fibres(nu2, h2)
    weights: Dict[Pair, Fraction] = {}
    for (y1, y2), e in eta.items():
        t1, t2 = image1[y1], image2[y2]
        for x1, w1 in groups1[y1]:
            share = e * w1 / t1
            for x2, w2 in groups2[y2]:
                pair = (x1, x2)
                weights[pair] = weights.get(pair, Fraction(0)) + share * w2 / t2
    return Coupling(nu1.space, nu2.space, weights)


def integrate_couplings(parts: Sequence[Tuple[RationalLike, Coupling]]) -> Coupling:
    """Convex combination of couplings on a common pair of spaces.

    Raises:
        InputError: If the probabilities do not sum to 1 or spaces differ
    """
    if not parts:
        raise InputError("Nothing to integrate")
    first, second = parts[0][1].first, parts[0][1].second
    total = Fraction(0)
    weights: Dict[Pair, Fraction] = {}
    for probability, coupling in parts:
        probability = as_fraction(probability)
        if probability < 0:
            raise InputError(f"Negative mixing probability {probability}")
        if coupling.first != first or coupling.second != second:
            raise InputError("Couplings live on different spaces")
        total += probability
        if not probability:
            continue
        for pair, w in coupling.items():
            weights[pair] = weights.get(pair, Fraction(0)) + probability * w
    if total != 1:
        raise InputError(f"Probabilities sum to {total}, not 1")
    return Coupling(first, second, weights)


def compose_couplings(c12: Coupling, c23: Coupling) -> Coupling:
    """Glue two couplings along their common middle marginal.

    Monotone inputs give a monotone output, which is the transitivity of
    stochastic domination.
    """
    if c12.second != c23.first:
        raise InputError("Middle spaces differ")
    middle = c12.second_marginal()
    if middle != c23.first_marginal():
        raise InputError("Middle marginals differ")

    forward: Dict[Configuration, List[Tuple[Configuration, Fraction]]] = {}
    for (y, z), w in c23.items():
        forward.setdefault(y, []).append((z, w))
    weights: Dict[Pair, Fraction] = {}
    for (x, y), w in c12.items():
        for z, v in forward[y]:
            pair = (x, z)
            weights[pair] = weights.get(pair, Fraction(0)) + w * v / middle[y]
    return Coupling(c12.first, c23.second, weights)
