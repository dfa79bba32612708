"""Column-by-column construction of a monotone coupling of a lifted measure and its target."""

import logging
from fractions import Fraction
from typing import Dict, List, Tuple

from ..core.coupling import Coupling, extend_coupling, integrate_couplings, is_monotone_coupling
from ..core.measure import Configuration, FiniteMeasure
from ..errors import AssumptionError, InputError, InvariantViolation, PreconditionError
from .assumptions import describe_violator, check_assumption_A, flattened_domination
from .fibre import FibreMap
from .lifting import column_flattener, flatten_columns, is_pi_lift
from .one_column import one_column_coupling, value_position_law

logger = logging.getLogger(__name__)


def _restrict(sites: Tuple[int, ...]):
    return lambda x: tuple(x[a] for a in sites)


def _unflatten_column(
    finer: FiniteMeasure,
    rho: FiniteMeasure,
    pm: FibreMap,
    b: int,
    eta: Coupling
) -> Coupling:
    """Turn a coupling of (finer flattened in column b, rho) into one of (finer, rho).

    The coupling is first extended through the flattening map, then rebuilt
    column-wise on each atom of the target's labels outside column b.
    """
    gamma = extend_coupling(finer, rho, column_flattener(pm, b), lambda z: z, eta)
    column, outside = pm.fibre(b), pm.outside(b)
    on_column, off_column = _restrict(column), _restrict(outside)

    groups: Dict[Configuration, List[Tuple[Tuple[Configuration, Configuration], Fraction]]] = {}
    for (y, z), w in gamma.items():
        groups.setdefault(off_column(z), []).append(((y, z), w))

    parts = []
    for d, atoms in sorted(groups.items()):
        mass = sum((w for _, w in atoms), Fraction(0))
        y_weights: Dict[Configuration, Fraction] = {}
        z_weights: Dict[Configuration, Fraction] = {}
        for (y, z), w in atoms:
            y_weights[y] = y_weights.get(y, Fraction(0)) + w / mass
            z_weights[z] = z_weights.get(z, Fraction(0)) + w / mass
        y_law = FiniteMeasure(finer.space, y_weights)
        z_law = FiniteMeasure(rho.space, z_weights)
        y_column = y_law.marginal(column)
        z_column = z_law.marginal(column)
        try:
            column_coupling = one_column_coupling(value_position_law(y_column), z_column)
        except PreconditionError as e:
            raise InvariantViolation(f"Column {b}, outside atom {d}: {e}") from e
        parts.append((mass, extend_coupling(y_law, z_law, on_column, on_column, column_coupling)))
    return integrate_couplings(parts)


def build_main_coupling(mu: FiniteMeasure, rho: FiniteMeasure, pm: FibreMap) -> Coupling:
    """Build a monotone coupling of a lifted measure mu and rho.

    Starts from a coupling of the fully flattened mu with rho, then restores
    the columns one at a time in increasing order. Each step extends the
    current coupling through the flattening of that column and, for every
    atom of the target outside the column, couples the column greedily.

    Args:
        mu: Lifted measure on A
        rho: Target measure on A
        pm: Fibre map with a distinguished section

    Returns:
        A coupling verified to be monotone with marginals mu and rho

    Raises:
        AssumptionError: If assumption A or B fails
        InvariantViolation: If the final coupling fails verification
    """
    pm.require_section()
    if mu.space != rho.space:
        raise InputError(f"Mismatched spaces: {mu.space} vs {rho.space}")
    if not is_pi_lift(mu, pm):
        raise PreconditionError("mu is not a lifted measure")

    report = check_assumption_A(rho, pm)
    if not report.holds:
        raise AssumptionError("A", report.witness)
    base = flattened_domination(mu, rho, pm)
    if not base.holds:
        raise AssumptionError("B", describe_violator(base))

    coupling = base.coupling
    for b in range(pm.b_count):
        if len(pm.fibre(b)) == 1:
            continue
        finer = flatten_columns(mu, pm, range(b + 1, pm.b_count))
        coupling = _unflatten_column(finer, rho, pm, b, coupling)
        logger.debug(f"Restored column {b}; coupling support {len(coupling)}")

    if not is_monotone_coupling(coupling, mu, rho):
        raise InvariantViolation("Constructed coupling is not a monotone coupling of mu and rho")
    return coupling
