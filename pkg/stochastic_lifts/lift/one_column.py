"""Greedy monotone coupling for a single column."""

import logging
from fractions import Fraction
from typing import Dict, Mapping, Tuple, Union

from ..core.coupling import Coupling
from ..core.measure import Configuration, FiniteMeasure, Space, as_fraction
from ..errors import InputError, InvariantViolation, PreconditionError

logger = logging.getLogger(__name__)

ValuePosition = Tuple[int, int]


def value_position_law(column_law: FiniteMeasure) -> Dict[ValuePosition, Fraction]:
    """Describe a one-column lifted law by (value, position of the value).

    The all-zero configuration is reported at position 0.
    """
    law: Dict[ValuePosition, Fraction] = {}
    for y, w in column_law.items():
        nonzero = [j for j, label in enumerate(y) if label]
        if len(nonzero) > 1:
            raise PreconditionError(f"{y} has more than one nonzero label")
        key = (y[nonzero[0]], nonzero[0]) if nonzero else (0, 0)
        law[key] = law.get(key, Fraction(0)) + w
    return law


def _placed(value: int, position: int, width: int) -> Configuration:
    y = [0] * width
    if value:
        y[position] = value
    return tuple(y)


def one_column_coupling(
    x_dist_with_H: Union[Mapping[ValuePosition, object], FiniteMeasure],
    rho: FiniteMeasure
) -> Coupling:
    """Couple the law of Y (value X placed at position H) with rho, monotonically.

    States are visited in the order (N,0), ..., (N,M-1), (N-1,0), ...,
    (1,M-1) and finally 0. The mass of state (i, j) is stored on the
    remaining rho-atoms beta with beta[j] >= i, lexicographically smallest
    first; the zero state takes whatever is left.

    Args:
        x_dist_with_H: Law of (X, H) as {(value, position): probability}, or
            a measure on two sites (value, position)
        rho: Measure on [N]^C

    Returns:
        A monotone coupling between the law of Y and rho

    Raises:
        PreconditionError: If the law of X is not dominated by the marginal of
            rho at some position; `position` names it
    """
    if isinstance(x_dist_with_H, FiniteMeasure):
        if x_dist_with_H.sites != 2:
            raise InputError("A (value, position) measure lives on two sites")
        raw = dict(x_dist_with_H.items())
    else:
        raw = {tuple(k): as_fraction(v) for k, v in x_dist_with_H.items()}

    width, top = rho.sites, rho.label_bound
    law: Dict[ValuePosition, Fraction] = {}
    for (value, position), w in raw.items():
        if not 0 <= value <= top:
            raise InputError(f"Value {value} outside [0, {top}]")
        if not 0 <= position < width:
            raise InputError(f"Position {position} outside the column")
        if value == 0:
            position = 0
        if w:
            law[(value, position)] = law.get((value, position), Fraction(0)) + w
    if sum(law.values(), Fraction(0)) != 1:
        raise InputError("Law of (X, H) does not sum to 1")

    for c in range(width):
        for t in range(1, top + 1):
            lhs = sum((w for (value, _), w in law.items() if value >= t), Fraction(0))
            rhs = rho.probability(lambda z: z[c] >= t)
            if lhs > rhs:
                raise PreconditionError(
                    f"Law of X is not dominated by the marginal at position {c} "
                    f"(P(X >= {t}) = {lhs} > {rhs})",
                    position=c,
                )

    remaining: Dict[Configuration, Fraction] = dict(sorted(rho.items()))
    weights: Dict[Tuple[Configuration, Configuration], Fraction] = {}
    for value in range(top, 0, -1):
        for position in range(width):
            need = law.get((value, position), Fraction(0))
            if not need:
                continue
            y = _placed(value, position, width)
            for beta, left in remaining.items():
                if not need:
                    break
                if left and beta[position] >= value:
                    take = min(need, left)
                    weights[(y, beta)] = weights.get((y, beta), Fraction(0)) + take
                    remaining[beta] = left - take
                    need -= take
            if need:
                raise InvariantViolation(f"Greedy step ({value}, {position}) ran out of mass")

    zero = _placed(0, 0, width)
    for beta, left in remaining.items():
        if left:
            weights[(zero, beta)] = weights.get((zero, beta), Fraction(0)) + left
    return Coupling(Space(width, top), rho.space, weights)
