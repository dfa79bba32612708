"""Lifted measures: lifts, pushdowns, flattening and marginals along sections."""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from ..core.measure import (
    Configuration,
    FiniteMeasure,
    RationalLike,
    Space,
    as_fraction,
    mixture,
    pushforward,
)
from ..errors import InputError, PreconditionError
from .fibre import FibreMap, Section

logger = logging.getLogger(__name__)


def is_pi_lift(mu: FiniteMeasure, pm: FibreMap) -> bool:
    """True iff every support configuration has at most one nonzero label per fibre."""
    if mu.sites != pm.a_count:
        raise InputError(f"Measure on {mu.sites} sites, but |A| = {pm.a_count}")
    for x in mu.support:
        seen = set()
        for a, label in enumerate(x):
            if label:
                b = pm.pi[a]
                if b in seen:
                    return False
                seen.add(b)
    return True


def pushdown(mu: FiniteMeasure, pm: FibreMap) -> FiniteMeasure:
    """Law of the per-fibre maximum of a lifted measure.

    Raises:
        PreconditionError: If mu is not a lift along pm
    """
    if not is_pi_lift(mu, pm):
        raise PreconditionError("pushdown requires a lifted measure")
    return pushforward(mu, pm.column_max, label_bound=mu.label_bound)


def permute(x: Configuration, sigma: Mapping[int, int]) -> Configuration:
    """The configuration sigma.x, i.e. (sigma.x)[sigma(a)] = x[a]; sites absent from sigma stay put."""
    y = list(x)
    for a, image in sigma.items():
        y[image] = x[a]
    return tuple(y)


def column_flattener(pm: FibreMap, b: int) -> Callable[[Configuration], Configuration]:
    """The map moving the maximum of column b onto section[b] and zeroing the rest of the column."""
    section = pm.require_section()
    column = pm.fibre(b)
    keep = section[b]

    def flatten(x: Configuration) -> Configuration:
        y = list(x)
        top = max(x[a] for a in column)
        for a in column:
            y[a] = 0
        y[keep] = top
        return tuple(y)

    return flatten


def flatten_column(mu: FiniteMeasure, pm: FibreMap, b: int) -> FiniteMeasure:
    """Pushforward of mu by the column-b flattening map."""
    flatten = column_flattener(pm, b)
    if len(pm.fibre(b)) == 1:
        return mu
    return pushforward(mu, flatten, label_bound=mu.label_bound)


def flatten_columns(mu: FiniteMeasure, pm: FibreMap, columns: Optional[Sequence[int]] = None) -> FiniteMeasure:
    """Flatten several columns (all of them by default)."""
    for b in (range(pm.b_count) if columns is None else columns):
        mu = flatten_column(mu, pm, b)
    return mu


def s_marginal(rho: FiniteMeasure, pm: FibreMap, section: Sequence[int]) -> FiniteMeasure:
    """Law of (x[s(b)])_b under rho."""
    if not pm.is_section(section):
        raise InputError(f"{tuple(section)} is not a section")
    return pushforward(rho, tuple(section), label_bound=rho.label_bound)


def horizontal_marginal(rho: FiniteMeasure, pm: FibreMap) -> FiniteMeasure:
    """The common s-marginal of rho.

    Raises:
        InputError: If two s-marginals differ
    """
    sections = pm.sections()
    reference = s_marginal(rho, pm, next(sections))
    for section in sections:
        if s_marginal(rho, pm, section) != reference:
            raise InputError(f"s-marginals differ (section {section})")
    return reference


def fibre_permutations(pm: FibreMap) -> Iterator[Dict[int, int]]:
    """Every permutation of A preserving each fibre."""
    per_column = [
        [dict(zip(fibre, image)) for image in itertools.permutations(fibre)]
        for fibre in pm.fibres
    ]
    for combo in itertools.product(*per_column):
        sigma: Dict[int, int] = {}
        for part in combo:
            sigma.update(part)
        yield sigma


def exchangeable_symmetrization(rho: FiniteMeasure, pm: FibreMap) -> FiniteMeasure:
    """Average of rho over all fibre-preserving permutations."""
    sigmas = list(fibre_permutations(pm))
    share = Fraction(1, len(sigmas))
    return mixture([
        (share, pushforward(rho, lambda x, s=sigma: permute(x, s), label_bound=rho.label_bound))
        for sigma in sigmas
    ])


@dataclass(frozen=True)
class LiftEnvironment:
    """Joint law of the labels X on B and a random section S.

    `joint` lives on 2|B| sites: X_b at site b and, at site |B| + b, the
    position of S(b) inside the fibre of b.
    """
    pm: FibreMap
    joint: FiniteMeasure
    label_bound: int

    def __post_init__(self):
        b_count = self.pm.b_count
        if self.joint.sites != 2 * b_count:
            raise InputError(f"Joint law must live on {2 * b_count} sites")
        fibres = self.pm.fibres
        for z in self.joint.support:
            if any(label > self.label_bound for label in z[:b_count]):
                raise InputError(f"Label above {self.label_bound} in {z[:b_count]}")
            if any(not 0 <= j < len(fibres[b]) for b, j in enumerate(z[b_count:])):
                raise InputError(f"Invalid section positions {z[b_count:]}")

    def atoms(self) -> Iterator[Tuple[Configuration, Section, Fraction]]:
        """Yield (x, section as sites of A, probability)."""
        b_count = self.pm.b_count
        fibres = self.pm.fibres
        for z, w in self.joint.items():
            section = tuple(fibres[b][j] for b, j in enumerate(z[b_count:]))
            yield z[:b_count], section, w

    def x_marginal(self) -> FiniteMeasure:
        return pushforward(self.joint, tuple(range(self.pm.b_count)), label_bound=self.label_bound)

    @classmethod
    def from_table(
        cls,
        pm: FibreMap,
        table: Mapping[Tuple[Configuration, Section], RationalLike],
        label_bound: int = 1
    ) -> "LiftEnvironment":
        """Explicit joint table {(x, section): probability}; sections given as sites of A."""
        fibres = pm.fibres
        weights: Dict[Configuration, Fraction] = {}
        for (x, section), w in table.items():
            if len(x) != pm.b_count:
                raise InputError(f"Label vector {x} does not have |B| entries")
            if not pm.is_section(section):
                raise InputError(f"{tuple(section)} is not a section")
            positions = tuple(fibres[b].index(a) for b, a in enumerate(section))
            key = tuple(x) + positions
            weights[key] = weights.get(key, Fraction(0)) + as_fraction(w)
        bound = max([label_bound] + [len(f) - 1 for f in fibres])
        joint = FiniteMeasure.from_weights(Space(2 * pm.b_count, bound), weights)
        return cls(pm, joint, label_bound)

    @classmethod
    def from_kernel(
        cls,
        pm: FibreMap,
        x_law: FiniteMeasure,
        kernel: Callable[[Configuration], Mapping[Section, RationalLike]]
    ) -> "LiftEnvironment":
        """X drawn from x_law, then S drawn from kernel(X)."""
        if x_law.sites != pm.b_count:
            raise InputError(f"X law must live on |B| = {pm.b_count} sites")
        table: Dict[Tuple[Configuration, Section], Fraction] = {}
        for x, w in x_law.items():
            law = {tuple(s): as_fraction(v) for s, v in kernel(x).items()}
            if sum(law.values(), Fraction(0)) != 1:
                raise InputError(f"Section law given {x} does not sum to 1")
            for section, v in law.items():
                key = (x, section)
                table[key] = table.get(key, Fraction(0)) + w * v
        return cls.from_table(pm, table, x_law.label_bound)

    @classmethod
    def from_independent(
        cls,
        pm: FibreMap,
        x_law: FiniteMeasure,
        strategy: Union[Callable[[Configuration], Sequence[int]], Mapping[Configuration, Sequence[int]]]
    ) -> "LiftEnvironment":
        """Compact form: X from x_law and a deterministic section S = strategy(X)."""
        choose = strategy if callable(strategy) else (lambda x: strategy[x])
        return cls.from_kernel(pm, x_law, lambda x: {tuple(choose(x)): 1})


def lift_distribution(env: LiftEnvironment, pm: Optional[FibreMap] = None) -> FiniteMeasure:
    """Law of Y with Y_a = X_{pi(a)} if S(pi(a)) = a and 0 otherwise."""
    pm = pm or env.pm
    if pm != env.pm:
        raise InputError("Environment built for another fibre map")
    weights: Dict[Configuration, Fraction] = {}
    for x, section, w in env.atoms():
        y = [0] * pm.a_count
        for b, a in enumerate(section):
            y[a] = x[b]
        key = tuple(y)
        weights[key] = weights.get(key, Fraction(0)) + w
    return FiniteMeasure(Space(pm.a_count, env.label_bound), weights)


def all_strategies(pm: FibreMap, x_values: Sequence[Configuration]) -> Iterator[Dict[Configuration, Section]]:
    """Every deterministic map from the given X values to sections."""
    sections: List[Section] = list(pm.sections())
    for choice in itertools.product(sections, repeat=len(x_values)):
        yield dict(zip(x_values, choice))
