"""Lifting two Bernoulli families at once, on ordered pairs of distinct sites."""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Optional, Tuple

from ..core.domination import dominates
from ..core.measure import (
    Configuration,
    FiniteMeasure,
    RationalLike,
    Space,
    as_fraction,
    bernoulli_product,
    product_measure,
    pushforward,
)
from ..errors import InputError, PreconditionError, SizeLimitError
from .fibre import FibreMap

logger = logging.getLogger(__name__)

SectionPair = Tuple[Tuple[int, ...], Tuple[int, ...]]


@dataclass(frozen=True)
class MultiliftEnvironment:
    """Joint law of (X, X†, S, S†).

    `joint` lives on 4|B| sites: X, then X†, then the positions of S(b)
    and of S†(b) inside the fibre of b.
    """
    pm: FibreMap
    joint: FiniteMeasure

    def __post_init__(self):
        if self.joint.sites != 4 * self.pm.b_count:
            raise InputError(f"Joint law must live on {4 * self.pm.b_count} sites")

    def atoms(self) -> Iterator[Tuple[Configuration, Configuration, Tuple[int, ...], Tuple[int, ...], Fraction]]:
        """Yield (x, x_dagger, S, S_dagger, probability) with sections as sites of A."""
        k = self.pm.b_count
        fibres = self.pm.fibres
        for z, w in self.joint.items():
            s = tuple(fibres[b][j] for b, j in enumerate(z[2 * k:3 * k]))
            s_dagger = tuple(fibres[b][j] for b, j in enumerate(z[3 * k:]))
            yield z[:k], z[k:2 * k], s, s_dagger, w

    @classmethod
    def deterministic(
        cls,
        pm: FibreMap,
        p: RationalLike,
        strategy: Callable[[Configuration, Configuration], SectionPair]
    ) -> "MultiliftEnvironment":
        """X, X† independent Bernoulli(p) families and (S, S†) = strategy(X, X†)."""
        k = pm.b_count
        fibres = pm.fibres
        weights: Dict[Configuration, Fraction] = {}
        for bits, w in bernoulli_product(p, 2 * k).items():
            x, x_dagger = bits[:k], bits[k:]
            s, s_dagger = strategy(x, x_dagger)
            if not (pm.is_section(s) and pm.is_section(s_dagger)):
                raise InputError(f"Strategy returned non-sections at {(x, x_dagger)}")
            positions = tuple(fibres[b].index(a) for b, a in enumerate(s))
            positions += tuple(fibres[b].index(a) for b, a in enumerate(s_dagger))
            weights[bits + positions] = w
        bound = max([1] + [len(f) - 1 for f in fibres])
        return cls(pm, FiniteMeasure.from_weights(Space(4 * k, bound), weights))


@dataclass(frozen=True)
class PairSpace:
    """The fibre map on ordered pairs of distinct sites sharing a fibre."""
    pairs: Tuple[Tuple[int, int], ...]
    pm: FibreMap
    index: Dict[Tuple[int, int], int] = field(compare=False, hash=False)


def pair_space(pm: FibreMap) -> PairSpace:
    """Ordered pairs (a1, a2), a1 != a2, grouped fibre by fibre."""
    pairs: List[Tuple[int, int]] = []
    for column in pm.fibres:
        if len(column) < 2:
            raise PreconditionError("Every fibre needs at least two sites")
        pairs.extend(itertools.permutations(column, 2))
    pi = tuple(pm.pi[a1] for a1, _ in pairs)
    return PairSpace(tuple(pairs), FibreMap(len(pairs), pm.b_count, pi), {pair: i for i, pair in enumerate(pairs)})


def paired_target(pm: FibreMap, p: RationalLike) -> FiniteMeasure:
    """Product over columns of the law of (2 Z_{a1} + Z_{a2}) over pairs, Z i.i.d. Bernoulli(p)."""
    space = pair_space(pm)
    factors = []
    for column in pm.fibres:
        local = {a: i for i, a in enumerate(column)}
        column_pairs = [(local[a1], local[a2]) for a1, a2 in itertools.permutations(column, 2)]
        factors.append(pushforward(
            bernoulli_product(p, len(column)),
            lambda z, cp=column_pairs: tuple(2 * z[i] + z[j] for i, j in cp),
            label_bound=3,
        ))
    return product_measure(factors, [list(f) for f in space.pm.fibres])


def paired_lift(env: MultiliftEnvironment) -> FiniteMeasure:
    """Law of the lift of 2X + X† along (S, S†) on the pair space."""
    space = pair_space(env.pm)
    weights: Dict[Configuration, Fraction] = {}
    for x, x_dagger, s, s_dagger, w in env.atoms():
        y = [0] * len(space.pairs)
        for b in range(env.pm.b_count):
            if s[b] == s_dagger[b]:
                raise PreconditionError(f"S and S† coincide on column {b}")
            y[space.index[(s[b], s_dagger[b])]] = 2 * x[b] + x_dagger[b]
        key = tuple(y)
        weights[key] = weights.get(key, Fraction(0)) + w
    return FiniteMeasure(Space(len(space.pairs), 3), weights)


@dataclass
class MultiliftReport:
    """Domination verdict on the pair space and the decoded per-column checks."""
    holds: bool
    checks: int = 0
    failures: List[str] = field(default_factory=list)
    violator: Optional[str] = None


def multilift_domination(env2: MultiliftEnvironment, pm: FibreMap, p: RationalLike) -> MultiliftReport:
    """Couple both lifted families below one Bernoulli(p) field and decode the coupling.

    On success, every coupled pair is decoded into Z on A and (X, X†, S, S†),
    and the three conditions are verified: (1,0) gives Z_S = 1, (1,1) gives
    Z_S = Z_S† = 1, and (0,1) gives Z_S = 1 or Z_S† = 1.

    Raises:
        PreconditionError: If (X, X†) is not i.i.d. Bernoulli(p) or S = S† somewhere
    """
    if pm != env2.pm:
        raise InputError("Environment built for another fibre map")
    p = as_fraction(p)
    k = pm.b_count
    bits_law = pushforward(env2.joint, tuple(range(2 * k)), label_bound=1)
    if bits_law != bernoulli_product(p, 2 * k):
        raise PreconditionError("X and X† must be independent Bernoulli(p) families")

    space = pair_space(pm)
    lifted = paired_lift(env2)
    verdict = dominates(lifted, paired_target(pm, p))
    if not verdict.holds:
        return MultiliftReport(False, violator=str(sorted(verdict.violator.generators)))

    report = MultiliftReport(True)
    for y, target in verdict.coupling.support:
        z = [0] * pm.a_count
        for (a1, _), i in space.index.items():
            z[a1] = target[i] // 2
        for (a1, a2), i in space.index.items():
            if target[i] != 2 * z[a1] + z[a2]:
                report.failures.append(f"target {target} is not of the form 2 Z_a1 + Z_a2")
        for (a1, a2), i in space.index.items():
            value = y[i]
            if not value:
                continue
            report.checks += 1
            bit, bit_dagger = divmod(value, 2)
            if (bit, bit_dagger) == (1, 0):
                ok = z[a1] == 1
            elif (bit, bit_dagger) == (1, 1):
                ok = z[a1] == 1 and z[a2] == 1
            else:
                ok = z[a1] == 1 or z[a2] == 1
            if not ok:
                report.failures.append(f"labels {(bit, bit_dagger)} at {(a1, a2)} not covered by {tuple(z)}")
    report.holds = not report.failures
    return report


def strengthened_lift_law(env2: MultiliftEnvironment) -> FiniteMeasure:
    """Law of Y demanding Y_S = X and Y_S† = X† jointly on A.

    (1,0) puts a 1 at S, (1,1) at S and S†, (0,1) at S† only.
    """
    pm = env2.pm
    weights: Dict[Configuration, Fraction] = {}
    for x, x_dagger, s, s_dagger, w in env2.atoms():
        y = [0] * pm.a_count
        for b in range(pm.b_count):
            if x[b]:
                y[s[b]] = 1
            if x_dagger[b]:
                y[s_dagger[b]] = 1
        key = tuple(y)
        weights[key] = weights.get(key, Fraction(0)) + w
    return FiniteMeasure(Space(pm.a_count, 1), weights)


def deterministic_pair_strategies(
    pm: FibreMap,
    adaptive: bool = False,
    cap: int = 10**5
) -> Iterator[Callable[[Configuration, Configuration], SectionPair]]:
    """Deterministic (S, S†) rules with S(b) != S†(b).

    Args:
        pm: Fibre map, every fibre of size at least 2
        adaptive: Enumerate every function of (X, X†) instead of constant pairs
        cap: Maximal number of rules

    Raises:
        SizeLimitError: If more than `cap` rules would be enumerated
    """
    k = pm.b_count
    per_column = [list(itertools.permutations(column, 2)) for column in pm.fibres]
    choices = [tuple(zip(*combo)) for combo in itertools.product(*per_column)]
    keys = list(itertools.product((0, 1), repeat=2 * k)) if adaptive else [None]
    count = len(choices) ** len(keys)
    if count > cap:
        raise SizeLimitError("pair strategy enumeration", count, cap)
    for assignment in itertools.product(choices, repeat=len(keys)):
        if adaptive:
            table = dict(zip(keys, assignment))
            yield lambda x, xd, t=table: t[tuple(x) + tuple(xd)]
        else:
            yield lambda x, xd, c=assignment[0]: c
