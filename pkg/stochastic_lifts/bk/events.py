"""Events on {0,1}^n stored as membership bitsets, and their constructors."""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from ..config import get_settings
from ..core.domination import enumerate_up_sets
from ..core.measure import RationalLike, Space, as_fraction
from ..errors import InputError, SizeLimitError
from ..percolation.estimation import ball_elements, reaches
from ..percolation.graph import Graph
from ..percolation.sampling import Mode

logger = logging.getLogger(__name__)

# Bit i of a configuration is coordinate i
Omega = int


@dataclass(frozen=True)
class Event:
    """Subset of {0,1}^n; bit omega of `members` is set when configuration omega belongs."""
    n: int
    members: int

    def __post_init__(self):
        cap = get_settings().bk_ground_cap
        if not 0 <= self.n <= cap:
            raise SizeLimitError("event ground set", self.n, cap)
        if not 0 <= self.members < 1 << (1 << self.n):
            raise InputError(f"Membership mask does not fit {1 << self.n} configurations")

    def __contains__(self, omega: Omega) -> bool:
        return bool(self.members >> omega & 1)

    def __len__(self) -> int:
        return bin(self.members).count("1")

    def __iter__(self) -> Iterator[Omega]:
        return (omega for omega in range(1 << self.n) if omega in self)

    def __and__(self, other: "Event") -> "Event":
        same_ground(self, other)
        return Event(self.n, self.members & other.members)

    def issubset(self, other: "Event") -> bool:
        same_ground(self, other)
        return self.members & ~other.members == 0

    def probability(self, p: Union[RationalLike, Sequence[RationalLike]]) -> Fraction:
        """Mass under independent coordinates, coordinate i open with probability p[i]."""
        weights = configuration_weights(self.n, p)
        return sum((weights[omega] for omega in self), Fraction(0))

    def to_hex(self) -> str:
        return hex(self.members)

    @classmethod
    def full(cls, n: int) -> "Event":
        return cls(n, (1 << (1 << n)) - 1)

    @classmethod
    def empty(cls, n: int) -> "Event":
        return cls(n, 0)

    @classmethod
    def from_hex(cls, n: int, text: str) -> "Event":
        try:
            return cls(n, int(text, 16))
        except ValueError as e:
            raise InputError(f"Bad event bitmask {text!r}") from e

    @classmethod
    def from_predicate(cls, n: int, predicate: Callable[[Tuple[int, ...]], bool]) -> "Event":
        members = 0
        for omega in range(1 << n):
            if predicate(bits(omega, n)):
                members |= 1 << omega
        return cls(n, members)

    @classmethod
    def from_min_terms(cls, n: int, terms: Iterable[Iterable[int]]) -> "Event":
        """Configurations whose open coordinates contain one of the terms."""
        masks = []
        for term in terms:
            mask = 0
            for i in term:
                if not 0 <= i < n:
                    raise InputError(f"Coordinate {i} outside a ground set of size {n}")
                mask |= 1 << i
            masks.append(mask)
        members = 0
        for omega in range(1 << n):
            if any(omega & mask == mask for mask in masks):
                members |= 1 << omega
        return cls(n, members)


def same_ground(e1: Event, e2: Event) -> None:
    if e1.n != e2.n:
        raise InputError(f"Events live on ground sets of sizes {e1.n} and {e2.n}")


def bits(omega: Omega, n: int) -> Tuple[int, ...]:
    return tuple(omega >> i & 1 for i in range(n))


def omega_of(x: Sequence[int]) -> Omega:
    return sum(1 << i for i, bit in enumerate(x) if bit)


def coordinate_probabilities(n: int, p: Union[RationalLike, Sequence[RationalLike]]) -> List[Fraction]:
    if isinstance(p, (list, tuple)):
        if len(p) != n:
            raise InputError(f"Expected {n} coordinate probabilities, got {len(p)}")
        values = [as_fraction(q) for q in p]
    else:
        values = [as_fraction(p)] * n
    for q in values:
        if not 0 <= q <= 1:
            raise InputError(f"Probability out of range: {q}")
    return values


def configuration_weights(n: int, p: Union[RationalLike, Sequence[RationalLike]]) -> List[Fraction]:
    """Product-measure weight of every configuration, indexed by omega."""
    probs = coordinate_probabilities(n, p)
    weights = [Fraction(1)]
    for q in probs:
        weights = [w * (1 - q) for w in weights] + [w * q for w in weights]
    return weights


def parse_min_terms(text: str) -> List[List[int]]:
    """"0,1;2" -> [[0, 1], [2]]; an empty term means the full space."""
    try:
        return [[int(t) for t in term.split(",") if t.strip()] for term in text.split(";")]
    except ValueError as e:
        raise InputError(f"Bad min-term list {text!r}") from e


def enumerate_increasing_events(n: int) -> List[Event]:
    """Every increasing event on n coordinates, empty and full included."""
    space = Space(n, 1)
    events = []
    for up_set in enumerate_up_sets(list(space.configurations())):
        members = 0
        for x in up_set:
            members |= 1 << omega_of(x)
        events.append(Event(n, members))
    logger.debug(f"{len(events)} increasing events on {n} coordinates")
    return sorted(events, key=lambda e: e.members)


def arm_event(g: Graph, v: int, radius: int, cap: Optional[int] = None) -> Tuple[Event, List[int]]:
    """Edge configurations of the radius ball in which v is joined to distance `radius`.

    Returns:
        The event and the edge ids behind its coordinates

    Raises:
        SizeLimitError: If the ball has more edges than the ground set cap
    """
    cap = cap if cap is not None else get_settings().bk_ground_cap
    edges = ball_elements(g, Mode.BOND, v, radius)
    if len(edges) > cap:
        raise SizeLimitError("arm event ground set", len(edges), cap)
    position = {e: i for i, e in enumerate(edges)}
    distances = g.distances_from(v, radius)

    def joined(x: Tuple[int, ...]) -> bool:
        return reaches(g, Mode.BOND, lambda e: e in position and bool(x[position[e]]), v, distances, radius)

    return Event.from_predicate(len(edges), joined), edges
