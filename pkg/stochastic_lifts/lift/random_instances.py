"""Seeded generators of small valid instances for the coupling constructions."""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..core.domination import dominates
from ..core.measure import Configuration, FiniteMeasure, Space, bernoulli_product
from .assumptions import check_assumption_A
from .fibre import FibreMap, Section
from .lifting import LiftEnvironment, all_strategies, exchangeable_symmetrization, lift_distribution, s_marginal
from .one_column import ValuePosition

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MainInstance:
    """A lifted measure, a target and the fibre map they live on."""
    mu: FiniteMeasure
    rho: FiniteMeasure
    pm: FibreMap


def random_measure(rng: np.random.Generator, space: Space, support_size: int) -> FiniteMeasure:
    """Measure on a few random configurations with small integer weights."""
    weights: Dict[Configuration, int] = {}
    for _ in range(support_size):
        x = tuple(int(v) for v in rng.integers(0, space.label_bound + 1, size=space.sites))
        weights[x] = weights.get(x, 0) + int(rng.integers(1, 5))
    return FiniteMeasure.from_weights(space, weights, normalize=True)


def random_fibre_map(rng: np.random.Generator, max_columns: int = 3, max_fibre: int = 3) -> FibreMap:
    """Consecutive fibres of random sizes and a random distinguished section."""
    columns = int(rng.integers(1, max_columns + 1))
    sizes = [int(s) for s in rng.integers(1, max_fibre + 1, size=columns)]
    positions = [int(rng.integers(0, size)) for size in sizes]
    return FibreMap.from_fibre_sizes(sizes, positions)


def _decrease(rng: np.random.Generator, x: Configuration) -> Configuration:
    return tuple(int(rng.integers(0, label + 1)) for label in x)


def random_main_instance(
    rng: np.random.Generator,
    max_columns: int = 3,
    max_fibre: int = 3,
    max_label: int = 2,
    support_size: int = 3,
    exchangeable: bool = True,
    attempts: int = 50
) -> MainInstance:
    """An instance on which the main coupling construction must succeed.

    With exchangeable set, the target is the fibre-exchangeable average of a
    random measure, so conditional laws inside a column do not depend on the
    site. Otherwise raw random targets are drawn until one passes the
    distinguished-site check, falling back to the average after the given
    number of attempts. The lifted
    measure places a sitewise-decreased copy of the target's marginal along
    the distinguished section onto random sections, so once flattened it
    sits below the target.
    """
    pm = random_fibre_map(rng, max_columns, max_fibre)
    label_bound = int(rng.integers(1, max_label + 1))
    rho: Optional[FiniteMeasure] = None
    if not exchangeable:
        for _ in range(attempts):
            candidate = random_measure(rng, Space(pm.a_count, label_bound), support_size)
            if check_assumption_A(candidate, pm).holds:
                rho = candidate
                break
    if rho is None:
        seed_law = random_measure(rng, Space(pm.a_count, label_bound), support_size)
        rho = exchangeable_symmetrization(seed_law, pm)

    horizontal = s_marginal(rho, pm, pm.require_section())
    lowered: Dict[Configuration, Fraction] = {}
    for x, w in horizontal.items():
        y = _decrease(rng, x)
        lowered[y] = lowered.get(y, Fraction(0)) + w
    x_law = FiniteMeasure.from_weights(Space(pm.b_count, label_bound), lowered)

    sections: List[Section] = list(pm.sections())

    def kernel(x: Configuration) -> Dict[Section, Fraction]:
        picks = rng.integers(0, len(sections), size=2)
        law: Dict[Section, Fraction] = {}
        for i in picks:
            law[sections[int(i)]] = law.get(sections[int(i)], Fraction(0)) + Fraction(1, 2)
        return law

    env = LiftEnvironment.from_kernel(pm, x_law, kernel)
    return MainInstance(lift_distribution(env), rho, pm)


def random_one_column_instance(
    rng: np.random.Generator,
    width: int,
    label_bound: int,
    support_size: int = 4
) -> Tuple[Dict[ValuePosition, Fraction], FiniteMeasure]:
    """A (value, position) law whose value law lies below every column marginal.

    The value tails are a random fraction of the smallest tails over the
    positions of a random column law.
    """
    rho = random_measure(rng, Space(width, label_bound), support_size)
    tails = [Fraction(1)]
    for t in range(1, label_bound + 1):
        tails.append(min(rho.probability(lambda z, c=c, t=t: z[c] >= t) for c in range(width)))
    tails.append(Fraction(0))
    scale = Fraction(int(rng.integers(0, 5)), 4)
    scaled = [Fraction(1)] + [scale * tail for tail in tails[1:]]

    law: Dict[ValuePosition, Fraction] = {}
    for value in range(label_bound + 1):
        mass = scaled[value] - scaled[value + 1]
        if not mass:
            continue
        if value == 0:
            law[(0, 0)] = law.get((0, 0), Fraction(0)) + mass
            continue
        cut = int(rng.integers(0, 3))
        positions = [int(c) for c in rng.integers(0, width, size=max(1, cut))]
        share = mass / len(positions)
        for c in positions:
            law[(value, c)] = law.get((value, c), Fraction(0)) + share
    return law, rho


def bernoulli_lift_verdicts(
    pm: FibreMap,
    p: Fraction,
    x_values: Optional[Sequence[Configuration]] = None
) -> Iterator[Tuple[Dict[Configuration, Section], bool]]:
    """Domination verdict of the lift against i.i.d. Bernoulli(p) labels, per deterministic strategy.

    Every map from label vectors to sections is tried, X being i.i.d.
    Bernoulli(p) on B.
    """
    x_law = bernoulli_product(p, pm.b_count)
    target = bernoulli_product(p, pm.a_count)
    values = list(x_values) if x_values is not None else list(x_law.support)
    for strategy in all_strategies(pm, values):
        env = LiftEnvironment.from_independent(pm, x_law, strategy)
        yield strategy, dominates(lift_distribution(env), target).holds
