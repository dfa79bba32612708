"""Golden fixtures with exact verifiers.

Each verifier recomputes its fixture from scratch and raises
FixtureRegressionError as soon as an expected value drifts.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Tuple

from ..core.coupling import Coupling, is_monotone_coupling
from ..core.domination import dominates
from ..core.measure import (
    Configuration,
    FiniteMeasure,
    RationalLike,
    Space,
    as_fraction,
    bernoulli_product,
    conditional,
    format_fraction,
    pushforward,
    uniform,
)
from ..core.serialization import save_measure
from ..errors import FixtureRegressionError, LiftError
from ..lift.assumptions import check_assumption_A, check_assumption_B, check_assumption_C
from ..lift.fibre import FibreMap
from ..lift.lifting import LiftEnvironment, is_pi_lift, lift_distribution, pushdown, s_marginal
from ..lift.main_coupling import build_main_coupling
from ..lift.multilift import MultiliftEnvironment, strengthened_lift_law

logger = logging.getLogger(__name__)

Matrix = Tuple[Tuple[int, int, int], ...]


@dataclass
class Fixture:
    """A pair of measures on a fibred site set and the verdicts it must produce."""
    name: str
    mu: FiniteMeasure
    rho: FiniteMeasure
    pm: FibreMap
    expected: Dict[str, Any] = field(default_factory=dict)


@dataclass
class FixtureReport:
    name: str
    passed: bool
    checks: Dict[str, Any] = field(default_factory=dict)


def _expect(name: str, condition: bool, message: str) -> None:
    if not condition:
        raise FixtureRegressionError(f"{name}: {message}")


def _flat(matrix: Matrix) -> Configuration:
    return tuple(label for row in matrix for label in row)


# 3x3 matrices, sites numbered row by row; columns are the fibres.
ZERO: Matrix = ((0, 0, 0), (0, 0, 0), (0, 0, 0))
MU_MATRICES: Tuple[Matrix, ...] = (
    ZERO,
    ((1, 1, 0), (0, 0, 0), (0, 0, 0)),
    ((0, 0, 0), (1, 0, 1), (0, 0, 0)),
    ((0, 0, 0), (0, 0, 0), (0, 1, 1)),
)
RHO_MATRICES: Dict[str, Matrix] = {
    "J": ((1, 1, 1), (1, 1, 1), (1, 1, 1)),
    "P": ((1, 1, 0), (1, 0, 1), (0, 1, 1)),
    "Q": ((1, 0, 1), (0, 1, 1), (1, 1, 0)),
    "R": ((0, 1, 1), (1, 1, 0), (1, 0, 1)),
}

# Rows chosen in columns 1..3 (1-based), and for each pushdown vector the
# target matrix it is paired with along that section.
SECTION_PAIRINGS: Dict[Tuple[int, int, int], Dict[Configuration, str]] = {
    (1, 1, 1): {(1, 1, 0): "P", (1, 0, 1): "Q", (0, 1, 1): "J", (0, 0, 0): "R"},
    (1, 1, 2): {(1, 1, 0): "P", (1, 0, 1): "Q", (0, 1, 1): "J", (0, 0, 0): "R"},
    (1, 1, 3): {(1, 1, 0): "P", (1, 0, 1): "J", (0, 1, 1): "R", (0, 0, 0): "Q"},
    (1, 2, 1): {(1, 1, 0): "Q", (1, 0, 1): "J", (0, 1, 1): "R", (0, 0, 0): "P"},
    (1, 2, 2): {(1, 1, 0): "Q", (1, 0, 1): "P", (0, 1, 1): "J", (0, 0, 0): "R"},
    (1, 2, 3): {(1, 1, 0): "Q", (1, 0, 1): "P", (0, 1, 1): "J", (0, 0, 0): "R"},
    (1, 3, 1): {(1, 1, 0): "P", (1, 0, 1): "Q", (0, 1, 1): "J", (0, 0, 0): "R"},
    (1, 3, 2): {(1, 1, 0): "P", (1, 0, 1): "Q", (0, 1, 1): "J", (0, 0, 0): "R"},
    (1, 3, 3): {(1, 1, 0): "Q", (1, 0, 1): "J", (0, 1, 1): "P", (0, 0, 0): "R"},
}


def matrix_fibre_map() -> FibreMap:
    """3x3 sites numbered row by row, projected to their column."""
    return FibreMap(9, 3, tuple(a % 3 for a in range(9)))


def rows_to_section(rows: Tuple[int, ...]) -> Tuple[int, ...]:
    """1-based row choices per column to sites."""
    return tuple(3 * (r - 1) + b for b, r in enumerate(rows))


def section32_instance() -> Fixture:
    """Assumption C holds along every section, yet the lift is not dominated."""
    mu = uniform([_flat(m) for m in MU_MATRICES])
    rho = uniform([_flat(m) for m in RHO_MATRICES.values()])
    return Fixture(
        "section32",
        mu,
        rho,
        matrix_fibre_map(),
        {
            "assumption_C": True,
            "dominates": False,
            "pushdown": sorted({(0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)}),
            "dominating_targets": 2,
        },
    )


def verify_section32() -> FixtureReport:
    """Check the 3x3 instance, including the nine tabulated section pairings.

    Raises:
        FixtureRegressionError: If any expected value drifts
    """
    fx = section32_instance()
    name, mu, rho, pm = fx.name, fx.mu, fx.rho, fx.pm
    _expect(name, len(mu) == 4 and len(rho) == 4, "expected four atoms on each side")
    _expect(name, is_pi_lift(mu, pm), "mu is not a lifted measure")

    down = pushdown(mu, pm)
    _expect(name, sorted(down.support) == fx.expected["pushdown"], f"pushdown support {down.support}")

    report_c = check_assumption_C(mu, rho, pm)
    _expect(name, report_c.holds, f"assumption C fails: {report_c.witness}")

    verdict = dominates(mu, rho)
    _expect(name, not verdict.holds, "mu is dominated by rho")
    _expect(name, verdict.mu_mass > verdict.rho_mass, "violator does not separate the measures")

    counts = []
    for x in mu.support:
        if any(x):
            counts.append(sum(1 for z in rho.support if all(a <= b for a, b in zip(x, z))))
    _expect(
        name,
        all(c == fx.expected["dominating_targets"] for c in counts),
        f"dominating target counts {counts}",
    )

    rows_checked = 0
    for rows, pairing in SECTION_PAIRINGS.items():
        section = rows_to_section(rows)
        _expect(name, sorted(pairing) == fx.expected["pushdown"], f"row {rows} misses a pushdown vector")
        _expect(name, sorted(pairing.values()) == sorted(RHO_MATRICES), f"row {rows} is not a bijection")
        for vector, label in pairing.items():
            z = _flat(RHO_MATRICES[label])
            picked = tuple(z[a] for a in section)
            _expect(
                name,
                all(v <= t for v, t in zip(vector, picked)),
                f"row {rows}: {label} along the section reads {picked}, below {vector}",
            )
        rows_checked += 1

    failing_sections = 0
    for section in pm.sections():
        with_section = pm.with_section(section)
        if not (check_assumption_A(rho, with_section).holds and check_assumption_B(mu, rho, with_section).holds):
            failing_sections += 1
    _expect(name, failing_sections == pm.section_count(), "some section satisfies both main assumptions")

    logger.info(f"{name}: assumption C on {pm.section_count()} sections, {rows_checked} pairing rows verified")
    return FixtureReport(name, True, {
        "sections_checked": pm.section_count(),
        "assumption_C": True,
        "dominates": False,
        "violator": [list(g) for g in sorted(verdict.violator.generators)],
        "mu_mass": format_fraction(verdict.mu_mass),
        "rho_mass": format_fraction(verdict.rho_mass),
        "dominating_targets": counts,
        "pairing_rows": rows_checked,
        "sections_failing_A_or_B": failing_sections,
    })


# Labels in {0,1}^2 with the product order, two sites over one column;
# site a's label sits on bits 2a and 2a + 1.
PAIR_BITS = {(0, 0): (0, 0), (1, 0): (1, 0), (0, 1): (0, 1), (1, 1): (1, 1)}


def _encode(labels: Tuple[Tuple[int, int], ...]) -> Configuration:
    return tuple(bit for label in labels for bit in PAIR_BITS[label])


def _label_at(x: Configuration, a: int) -> Configuration:
    return x[2 * a:2 * a + 2]


def nontotal_label_instance() -> Fixture:
    """Both main assumptions hold for a partially ordered label set, domination fails."""
    mu = uniform([_encode(((1, 0), (0, 0))), _encode(((0, 0), (0, 1)))])
    rho = uniform([_encode(((1, 0), (0, 1))), _encode(((0, 1), (1, 0)))])
    return Fixture(
        "nontotal_labels",
        mu,
        rho,
        FibreMap(2, 1, (0, 0)),
        {"assumption_A": True, "assumption_B": True, "dominates": False},
    )


def _flatten_pairs(x: Configuration, keep: int) -> Configuration:
    labels = [_label_at(x, a) for a in range(2)]
    nonzero = [label for label in labels if any(label)]
    if len(nonzero) > 1:
        raise FixtureRegressionError(f"{x} has two nonzero labels in one column")
    moved = [(0, 0), (0, 0)]
    if nonzero:
        moved[keep] = nonzero[0]
    return tuple(bit for label in moved for bit in label)


def verify_nontotal_labels() -> FixtureReport:
    """Check the assumptions under both choices of distinguished site.

    Raises:
        FixtureRegressionError: If an assumption fails or domination holds
    """
    fx = nontotal_label_instance()
    name, mu, rho = fx.name, fx.mu, fx.rho
    per_choice: Dict[str, Dict[str, bool]] = {}
    for keep in range(2):
        other = 1 - keep
        law_keep = pushforward(rho, (2 * keep, 2 * keep + 1), label_bound=1)
        law_other = pushforward(rho, (2 * other, 2 * other + 1), label_bound=1)
        holds_a = dominates(law_keep, law_other).holds
        flattened = pushforward(mu, lambda x, k=keep: _flatten_pairs(x, k), label_bound=1)
        holds_b = dominates(flattened, rho).holds
        per_choice[f"site_{keep}"] = {"assumption_A": holds_a, "assumption_B": holds_b}
        _expect(name, holds_a, f"assumption A fails with distinguished site {keep}")
        _expect(name, holds_b, f"assumption B fails with distinguished site {keep}")

    verdict = dominates(mu, rho)
    _expect(name, not verdict.holds, "mu is dominated by rho")
    logger.info(f"{name}: assumptions hold for both distinguished sites, domination fails")
    return FixtureReport(name, True, {
        "choices": per_choice,
        "dominates": False,
        "mu_mass": format_fraction(verdict.mu_mass),
        "rho_mass": format_fraction(verdict.rho_mass),
    })


def _two_by_two() -> FibreMap:
    # sites: 0 top-left, 1 top-right, 2 bottom-left, 3 bottom-right
    return FibreMap(4, 2, (0, 1, 0, 1), (0, 1))


def two_column_pitfall_instance() -> Tuple[Fixture, Coupling]:
    """Lifted uniform bits whose rows depend on both bits, and a bad first-column coupling.

    Both bits go on the top row when they are both 1, on the bottom row
    otherwise. The returned coupling of the left columns is monotone yet
    cannot be completed into a coupling of the whole matrices.
    """
    pm = _two_by_two()
    x_law = bernoulli_product(Fraction(1, 2), 2)
    top, bottom = (0, 1), (2, 3)
    env = LiftEnvironment.from_independent(pm, x_law, lambda x: top if x == (1, 1) else bottom)
    mu = lift_distribution(env)
    rho = bernoulli_product(Fraction(1, 2), 4)

    # left column written (top, bottom); pairs driven by X
    quarter = Fraction(1, 4)
    left = Coupling(Space(2, 1), Space(2, 1), {
        ((1, 0), (1, 1)): quarter,
        ((0, 1), (0, 1)): quarter,
        ((0, 0), (1, 0)): quarter,
        ((0, 0), (0, 0)): quarter,
    })
    return Fixture("two_column_pitfall", mu, rho, pm, {"extension": False, "main_coupling": True}), left


def verify_two_column_pitfall() -> FixtureReport:
    """The bad left coupling cannot be extended; the column construction still succeeds.

    Raises:
        FixtureRegressionError: If any expected value drifts
    """
    fx, left = two_column_pitfall_instance()
    name, mu, rho, pm = fx.name, fx.mu, fx.rho, fx.pm
    left_sites, right_sites = pm.fibre(0), pm.fibre(1)
    mu_left = pushforward(mu, left_sites, label_bound=1)
    rho_left = pushforward(rho, left_sites, label_bound=1)
    _expect(name, is_monotone_coupling(left, mu_left, rho_left), "left coupling is not monotone")

    stuck = None
    for (y, z), _ in left.items():
        mu_right = pushforward(
            conditional(mu, lambda x, y=y: tuple(x[a] for a in left_sites) == y), right_sites, label_bound=1
        )
        rho_right = pushforward(
            conditional(rho, lambda x, z=z: tuple(x[a] for a in left_sites) == z), right_sites, label_bound=1
        )
        if not dominates(mu_right, rho_right).holds:
            stuck = (y, z)
            break
    _expect(name, stuck == ((1, 0), (1, 1)), f"extension blocked at {stuck}")

    try:
        coupling = build_main_coupling(mu, rho, pm)
    except LiftError as e:
        raise FixtureRegressionError(f"{name}: main coupling failed: {e}") from e
    _expect(name, is_monotone_coupling(coupling, mu, rho), "main coupling is not monotone")
    logger.info(f"{name}: left coupling stuck at {stuck}, main coupling has {len(coupling)} atoms")
    return FixtureReport(name, True, {"stuck_pair": [list(stuck[0]), list(stuck[1])], "main_coupling_atoms": len(coupling)})


def multilift_counterexample_instance(p: RationalLike = Fraction(1, 2)) -> Tuple[Fixture, MultiliftEnvironment]:
    """Two sites over one point; (S, S†) = (0, 1) when X = 1 and (1, 0) otherwise.

    Requiring Y_S = X and Y_S† = X† together puts a 1 at site 0 whenever X or
    X† is 1.
    """
    p = as_fraction(p)
    pm = FibreMap(2, 1, (0, 0))
    env2 = MultiliftEnvironment.deterministic(
        pm, p, lambda x, xd: (((0,), (1,)) if x[0] == 1 else ((1,), (0,)))
    )
    mu = strengthened_lift_law(env2)
    rho = bernoulli_product(p, 2)
    marginal = 1 - (1 - p) ** 2
    return Fixture(
        "multilift_counterexample",
        mu,
        rho,
        pm,
        {"site0_marginal": marginal, "dominates": not (0 < p < 1)},
    ), env2


def verify_multilift_counterexample(p: RationalLike = Fraction(1, 2)) -> FixtureReport:
    fx, _ = multilift_counterexample_instance(p)
    name, mu, rho = fx.name, fx.mu, fx.rho
    marginal = mu.probability(lambda y: y[0] == 1)
    _expect(name, marginal == fx.expected["site0_marginal"], f"site 0 marginal {marginal}")
    holds = dominates(mu, rho).holds
    _expect(name, holds == fx.expected["dominates"], f"domination verdict {holds}")
    return FixtureReport(name, True, {
        "p": format_fraction(as_fraction(p)),
        "site0_marginal": format_fraction(marginal),
        "dominates": holds,
    })


VERIFIERS: Dict[str, Callable[[], FixtureReport]] = {
    "section32": verify_section32,
    "nontotal_labels": verify_nontotal_labels,
    "two_column_pitfall": verify_two_column_pitfall,
    "multilift_counterexample": verify_multilift_counterexample,
}


def verify_all() -> List[FixtureReport]:
    """Run every fixture verifier in a fixed order."""
    return [verify() for verify in VERIFIERS.values()]


def write_fixtures(directory: str) -> List[str]:
    """Export the fixtures as measure and fibre-map JSON files.

    Args:
        directory: Output directory, created if missing

    Returns:
        Paths of the written files
    """
    os.makedirs(directory, exist_ok=True)
    fixtures = [
        section32_instance(),
        nontotal_label_instance(),
        two_column_pitfall_instance()[0],
        multilift_counterexample_instance()[0],
    ]
    paths = []
    for fx in fixtures:
        paths.append(save_measure(fx.mu, os.path.join(directory, f"{fx.name}_mu.json")))
        paths.append(save_measure(fx.rho, os.path.join(directory, f"{fx.name}_rho.json")))
        pm_path = os.path.join(directory, f"{fx.name}_pm.json")
        with open(pm_path, "w") as f:
            json.dump(fx.pm.to_dict(), f, indent=2)
        paths.append(pm_path)
    logger.info(f"Wrote {len(paths)} fixture files to {directory}")
    return paths
