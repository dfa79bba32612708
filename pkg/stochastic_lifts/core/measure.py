"""Exact probability measures on finite labelled configuration spaces."""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from ..errors import ConditioningError, InputError

logger = logging.getLogger(__name__)

Configuration = Tuple[int, ...]
RationalLike = Union[Fraction, int, str, float]
ConfigurationMap = Callable[[Configuration], Configuration]


def as_fraction(value: RationalLike) -> Fraction:
    """Convert ints, "num/den" strings and decimal literals to an exact Fraction.

    Floats go through their shortest decimal repr, so 0.3 becomes 3/10.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InputError(f"Not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise InputError(f"Not a rational: {value!r}") from e
    raise InputError(f"Not a rational: {value!r}")


def format_fraction(value: Fraction) -> str:
    """Render a Fraction as "num/den" (denominator always written)."""
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Space:
    """The configuration space [N]^sites, with [N] = {0, ..., N}."""
    sites: int
    label_bound: int

    def __post_init__(self):
        if self.sites < 0:
            raise InputError(f"Negative site count: {self.sites}")
        if self.label_bound < 1:
            raise InputError(f"Label bound must be at least 1, got {self.label_bound}")

    @property
    def size(self) -> int:
        return (self.label_bound + 1) ** self.sites

    def contains(self, x: Configuration) -> bool:
        return len(x) == self.sites and all(0 <= label <= self.label_bound for label in x)

    def configurations(self) -> Iterator[Configuration]:
        """All configurations in lexicographic order."""
        return itertools.product(range(self.label_bound + 1), repeat=self.sites)

    def validate(self, x: Configuration) -> Configuration:
        x = tuple(int(label) for label in x)
        if not self.contains(x):
            raise InputError(f"Configuration {x} is not in [{self.label_bound}]^{self.sites}")
        return x


@dataclass(frozen=True)
class FiniteMeasure:
    """A probability measure with finite support and exact rational weights.

    Weights are strictly positive and sum to exactly one; construction
    rejects anything else. Use `from_weights` to drop zero entries and merge
    duplicates produced by arithmetic.
    """
    space: Space
    weights: Mapping[Configuration, Fraction] = field(compare=False)

    def __post_init__(self):
        cleaned: Dict[Configuration, Fraction] = {}
        for x, w in self.weights.items():
            x = self.space.validate(x)
            w = as_fraction(w)
            if w <= 0:
                raise InputError(f"Non-positive weight {w} at {x}")
            if x in cleaned:
                raise InputError(f"Duplicate configuration {x}")
            cleaned[x] = w
        if not cleaned:
            raise InputError("Empty support")
        total = sum(cleaned.values(), Fraction(0))
        if total != 1:
            raise InputError(f"Weights sum to {total}, not 1")
        object.__setattr__(self, "weights", MappingProxyType(dict(sorted(cleaned.items()))))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteMeasure):
            return NotImplemented
        return self.space == other.space and dict(self.weights) == dict(other.weights)

    def __hash__(self) -> int:
        return hash((self.space, frozenset(self.weights.items())))

    def __reduce__(self):
        return (type(self), (self.space, dict(self.weights)))

    def __len__(self) -> int:
        return len(self.weights)

    def __getitem__(self, x: Configuration) -> Fraction:
        return self.weights.get(tuple(x), Fraction(0))

    @property
    def sites(self) -> int:
        return self.space.sites

    @property
    def label_bound(self) -> int:
        return self.space.label_bound

    @property
    def support(self) -> Tuple[Configuration, ...]:
        return tuple(self.weights)

    def items(self) -> Iterable[Tuple[Configuration, Fraction]]:
        return self.weights.items()

    def probability(self, event: Callable[[Configuration], bool]) -> Fraction:
        """Mass of the configurations satisfying `event`."""
        return sum((w for x, w in self.weights.items() if event(x)), Fraction(0))

    def marginal(self, sites: Sequence[int]) -> "FiniteMeasure":
        """Law of the labels at `sites`, in the given order."""
        return pushforward(self, tuple(sites))

    @classmethod
    def from_weights(
        cls,
        space: Space,
        weights: Mapping[Configuration, RationalLike],
        normalize: bool = False
    ) -> "FiniteMeasure":
        """Build a measure, dropping zero weights.

        Args:
            space: Configuration space
            weights: Possibly unnormalized, possibly zero weights
            normalize: Divide by the total mass instead of requiring it to be 1

        Returns:
            The measure
        """
        merged: Dict[Configuration, Fraction] = {}
        for x, w in weights.items():
            w = as_fraction(w)
            if w < 0:
                raise InputError(f"Negative weight {w} at {x}")
            if w:
                key = tuple(x)
                merged[key] = merged.get(key, Fraction(0)) + w
        if normalize:
            total = sum(merged.values(), Fraction(0))
            if total == 0:
                raise InputError("Empty support")
            merged = {x: w / total for x, w in merged.items()}
        return cls(space, merged)


def point_mass(x: Configuration, label_bound: int = 1) -> FiniteMeasure:
    """Dirac mass at `x`."""
    return FiniteMeasure(Space(len(x), label_bound), {tuple(x): Fraction(1)})


def uniform(configurations: Iterable[Configuration], label_bound: int = 1) -> FiniteMeasure:
    """Uniform measure on a nonempty set of distinct configurations."""
    support = sorted({tuple(x) for x in configurations})
    if not support:
        raise InputError("Empty support")
    weight = Fraction(1, len(support))
    return FiniteMeasure(Space(len(support[0]), label_bound), {x: weight for x in support})


def bernoulli_product(p: RationalLike, sites: int) -> FiniteMeasure:
    """Independent Bernoulli(p) labels on `sites` sites (N = 1)."""
    p = as_fraction(p)
    if not 0 <= p <= 1:
        raise InputError(f"Probability out of range: {p}")
    weights = {}
    for x in itertools.product((0, 1), repeat=sites):
        ones = sum(x)
        weights[x] = p ** ones * (1 - p) ** (sites - ones)
    return FiniteMeasure.from_weights(Space(sites, 1), weights)


def pushforward(
    mu: FiniteMeasure,
    f: Union[ConfigurationMap, Sequence[int]],
    label_bound: Optional[int] = None
) -> FiniteMeasure:
    """Image measure of `mu` under a configuration map or a site relabelling.

    Args:
        mu: Source measure
        f: Either a callable on configurations, or a sequence `s` of source
            sites meaning y[i] = x[s[i]]
        label_bound: Label bound of the target space; defaults to the larger of
            mu's bound and the largest image label

    Returns:
        The pushforward measure

    Raises:
        InputError: If f is undefined on a support point
    """
    if not callable(f):
        relabelling = tuple(f)
        for i in relabelling:
            if not 0 <= i < mu.sites:
                raise InputError(f"Unknown site {i} in relabelling")
        func: ConfigurationMap = lambda x: tuple(x[i] for i in relabelling)
    else:
        func = f

    images: Dict[Configuration, Fraction] = {}
    for x, w in mu.items():
        try:
            y = func(x)
        except (KeyError, IndexError, ValueError, TypeError) as e:
            raise InputError(f"Map undefined at support point {x}: {e}") from e
        if y is None:
            raise InputError(f"Map undefined at support point {x}")
        y = tuple(int(label) for label in y)
        images[y] = images.get(y, Fraction(0)) + w

    lengths = {len(y) for y in images}
    if len(lengths) != 1:
        raise InputError(f"Map produces configurations of lengths {sorted(lengths)}")
    top = max((max(y) for y in images if y), default=0)
    if label_bound is None:
        label_bound = max(mu.label_bound, top)
    return FiniteMeasure(Space(lengths.pop(), label_bound), images)


def conditional(mu: FiniteMeasure, event: Callable[[Configuration], bool]) -> FiniteMeasure:
    """Law of `mu` conditioned on `event`.

    Raises:
        ConditioningError: If the event has probability zero
    """
    kept = {x: w for x, w in mu.items() if event(x)}
    mass = sum(kept.values(), Fraction(0))
    if mass == 0:
        raise ConditioningError("Conditioning on an event of probability zero")
    return FiniteMeasure(mu.space, {x: w / mass for x, w in kept.items()})


def product_measure(
    factors: Sequence[FiniteMeasure],
    blocks: Optional[Sequence[Sequence[int]]] = None
) -> FiniteMeasure:
    """Independent product of measures living on disjoint site blocks.

    Args:
        factors: One measure per block
        blocks: Target sites of each factor, in factor-site order; defaults to
            consecutive blocks

    Returns:
        The product measure on the union of the blocks
    """
    if not factors:
        raise InputError("No factors")
    if blocks is None:
        blocks, start = [], 0
        for factor in factors:
            blocks.append(list(range(start, start + factor.sites)))
            start += factor.sites
    if len(blocks) != len(factors):
        raise InputError("One block per factor is required")
    for factor, block in zip(factors, blocks):
        if len(block) != factor.sites:
            raise InputError(f"Block {list(block)} does not match a factor on {factor.sites} sites")

    used: List[int] = [site for block in blocks for site in block]
    if len(set(used)) != len(used):
        raise InputError("Overlapping blocks")
    total_sites = len(used)
    if sorted(used) != list(range(total_sites)):
        raise InputError("Blocks do not partition the site set")

    label_bound = max(factor.label_bound for factor in factors)
    weights: Dict[Configuration, Fraction] = {}
    for combo in itertools.product(*(list(factor.items()) for factor in factors)):
        x = [0] * total_sites
        w = Fraction(1)
        for block, (part, part_weight) in zip(blocks, combo):
            for site, label in zip(block, part):
                x[site] = label
            w *= part_weight
        weights[tuple(x)] = w
    return FiniteMeasure(Space(total_sites, label_bound), weights)


def mixture(parts: Sequence[Tuple[RationalLike, FiniteMeasure]]) -> FiniteMeasure:
    """Convex combination of measures on one space."""
    if not parts:
        raise InputError("Empty mixture")
    space = parts[0][1].space
    weights: Dict[Configuration, Fraction] = {}
    total = Fraction(0)
    for probability, measure in parts:
        probability = as_fraction(probability)
        if measure.space != space:
            raise InputError("Mixture components live on different spaces")
        total += probability
        for x, w in measure.items():
            weights[x] = weights.get(x, Fraction(0)) + probability * w
    if total != 1:
        raise InputError(f"Mixture probabilities sum to {total}, not 1")
    return FiniteMeasure.from_weights(space, weights)
