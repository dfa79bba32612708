"""Disjoint occurrence and exact checks of the BK inequality and its paired-measure version."""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

from ..core.measure import FiniteMeasure, RationalLike, Space, format_fraction
from ..errors import InputError, PreconditionError, SizeLimitError
from ..percolation.graph import Graph
from .events import Event, arm_event, configuration_weights, coordinate_probabilities, enumerate_increasing_events, same_ground

logger = logging.getLogger(__name__)

PAIR_TABLE_CAP = 4 ** 10


def is_increasing(e: Event) -> bool:
    """Closed under opening any single coordinate."""
    for omega in e:
        for i in range(e.n):
            if not omega >> i & 1 and (omega | 1 << i) not in e:
                return False
    return True


def _submasks(mask: int):
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


@lru_cache(maxsize=None)
def _witnesses(e: Event, omega: int) -> Tuple[int, ...]:
    """Minimal coordinate sets P such that every configuration agreeing with omega on P lies in e."""
    everything = (1 << e.n) - 1
    found: List[int] = []
    for size in range(e.n + 1):
        for p in _submasks(everything):
            if bin(p).count("1") != size or any(q & p == q for q in found):
                continue
            fixed = omega & p
            if all((fixed | free) in e for free in _submasks(everything & ~p)):
                found.append(p)
    return tuple(found)


def disjoint_occurrence(e1: Event, e2: Event, fast: Optional[bool] = None) -> Event:
    """Configurations where e1 and e2 hold on disjoint sets of coordinates.

    The general path searches every pair of witness sets. When both events
    are increasing (the default when `fast` is None) only splittings of the
    open coordinates are tried.
    """
    same_ground(e1, e2)
    if fast is None:
        fast = is_increasing(e1) and is_increasing(e2)
    members = 0
    for omega in range(1 << e1.n):
        if fast:
            hit = any(p in e1 and (omega & ~p) in e2 for p in _submasks(omega))
        else:
            first = _witnesses(e1, omega)
            second = _witnesses(e2, omega) if first else []
            hit = any(p & q == 0 for p in first for q in second)
        if hit:
            members |= 1 << omega
    return Event(e1.n, members)


def _require_increasing(*events: Event) -> None:
    for i, e in enumerate(events, start=1):
        if not is_increasing(e):
            raise PreconditionError(f"Event {i} ({e.to_hex()}) is not increasing")


@dataclass
class BKReport:
    """Both sides of an inequality lhs <= rhs, as exact fractions."""
    lhs: Fraction
    rhs: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs

    @property
    def gap(self) -> Fraction:
        return self.rhs - self.lhs

    def to_dict(self) -> Dict[str, Union[str, bool]]:
        return {
            "lhs": format_fraction(self.lhs),
            "rhs": format_fraction(self.rhs),
            "gap": format_fraction(self.gap),
            "holds": self.holds,
        }


def check_bk(e1: Event, e2: Event, p: Union[RationalLike, Sequence[RationalLike]]) -> BKReport:
    """P(e1 and e2 disjointly) against P(e1) P(e2) under independent coordinates.

    Raises:
        PreconditionError: If either event is not increasing
    """
    _require_increasing(e1, e2)
    weights = configuration_weights(e1.n, p)
    lhs = sum((weights[omega] for omega in disjoint_occurrence(e1, e2, fast=True)), Fraction(0))
    first = sum((weights[omega] for omega in e1), Fraction(0))
    second = sum((weights[omega] for omega in e2), Fraction(0))
    return BKReport(lhs, first * second)


def check_prop_bk(
    e1: Event,
    e2: Event,
    rho: Sequence[FiniteMeasure],
    p: Union[RationalLike, Sequence[RationalLike]]
) -> BKReport:
    """P_p(e1 and e2 disjointly) against the mass of e1 x e2 under the product of the pair laws rho.

    rho[i] is a law on {0,1}^2 whose two marginals are Bernoulli with
    parameter at least p[i].

    Raises:
        PreconditionError: If an event is not increasing or a marginal is too small
        SizeLimitError: If the paired configuration table is too large
    """
    _require_increasing(e1, e2)
    n = e1.n
    probs = coordinate_probabilities(n, p)
    if len(rho) != n:
        raise InputError(f"Expected {n} pair laws, got {len(rho)}")
    if 4 ** n > PAIR_TABLE_CAP:
        raise SizeLimitError("paired configurations", 4 ** n, PAIR_TABLE_CAP)
    pair_space = Space(2, 1)
    for i, (law, q) in enumerate(zip(rho, probs)):
        if law.space != pair_space:
            raise InputError(f"Pair law {i} does not live on {{0,1}}^2")
        for side in (0, 1):
            margin = law.probability(lambda x: x[side] == 1)
            if margin < q:
                raise PreconditionError(f"Marginal {side} of pair law {i} is {margin} < {q}", position=i)

    lhs = check_bk(e1, e2, probs).lhs
    rhs = Fraction(0)
    for omega in e1:
        for omega2 in e2:
            weight = Fraction(1)
            for i, law in enumerate(rho):
                weight *= law[(omega >> i & 1, omega2 >> i & 1)]
                if not weight:
                    break
            rhs += weight
    return BKReport(lhs, rhs)


@dataclass
class TwoArmReport:
    """a1: one open arm to the radius; a2: two edge-disjoint open arms."""
    a1: Fraction
    a2: Fraction
    edges: List[int]

    @property
    def holds(self) -> bool:
        return self.a2 <= self.a1 * self.a1

    def to_dict(self) -> Dict:
        return {
            "a1": format_fraction(self.a1),
            "a2": format_fraction(self.a2),
            "a1_squared": format_fraction(self.a1 * self.a1),
            "edges": self.edges,
            "holds": self.holds,
        }


def two_arm_check(g: Graph, v: int, radius: int, p: RationalLike, cap: Optional[int] = None) -> TwoArmReport:
    """Exact one-arm and two-arm probabilities from v, checked against a2 <= a1^2."""
    arm, edges = arm_event(g, v, radius, cap)
    report = check_bk(arm, arm, p)
    return TwoArmReport(arm.probability(p), report.lhs, edges)


@dataclass
class BKSweep:
    n: int
    p: str
    events: int
    pairs: int
    violations: int
    max_ratio: Optional[str]
    max_gap: str
    paths_agree: bool

    @property
    def holds(self) -> bool:
        return self.violations == 0 and self.paths_agree


def bk_sweep(n: int, p: RationalLike, compare_paths: bool = True) -> BKSweep:
    """Every ordered pair of increasing events on n coordinates.

    `max_ratio` is the largest lhs / rhs over pairs with rhs > 0 and
    `max_gap` the largest rhs - lhs over all pairs. With
    `compare_paths`, the general disjoint-occurrence search is run on every
    pair as well and must agree with the fast path.
    """
    events = enumerate_increasing_events(n)
    weights = configuration_weights(n, p)
    masses = [sum((weights[omega] for omega in e), Fraction(0)) for e in events]
    violations, best, agree = 0, None, True
    gap = Fraction(0)
    for i, e1 in enumerate(events):
        for j, e2 in enumerate(events):
            both = disjoint_occurrence(e1, e2, fast=True)
            if compare_paths and both != disjoint_occurrence(e1, e2, fast=False):
                agree = False
                logger.warning(f"Disjoint occurrence paths disagree on {e1.to_hex()} and {e2.to_hex()}")
            lhs = sum((weights[omega] for omega in both), Fraction(0))
            rhs = masses[i] * masses[j]
            if lhs > rhs:
                violations += 1
            gap = max(gap, rhs - lhs)
            if rhs > 0 and (best is None or lhs / rhs > best):
                best = lhs / rhs
    count = len(events)
    logger.info(f"BK sweep on {n} coordinates: {count * count} pairs, {violations} violations")
    return BKSweep(
        n,
        format_fraction(coordinate_probabilities(1, p)[0]),
        count,
        count * count,
        violations,
        format_fraction(best) if best is not None else None,
        format_fraction(gap),
        agree,
    )
