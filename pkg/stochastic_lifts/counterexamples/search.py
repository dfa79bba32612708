"""Random search for lifts whose pushdown equals every section marginal yet are not dominated."""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field

from ..core.domination import dominates
from ..core.measure import FiniteMeasure, Space, mixture, pushforward
from ..errors import InvariantViolation
from ..lift.fibre import FibreMap, Section
from ..lift.lifting import LiftEnvironment, fibre_permutations, is_pi_lift, lift_distribution, permute, pushdown, s_marginal
from ..lift.random_instances import MainInstance, random_fibre_map, random_measure

logger = logging.getLogger(__name__)


class SearchBounds(BaseModel):
    """Size limits of the random instances."""
    max_columns: int = Field(default=2, ge=1, le=4)
    max_fibre: int = Field(default=3, ge=1, le=4)
    max_label: int = Field(default=1, ge=1, le=3)
    support_size: int = Field(default=3, ge=1)


@dataclass
class SearchResult:
    trials: int
    candidates: int
    found: Optional[MainInstance] = None
    witness: Optional[str] = None


def all_s_marginals_equal_pushdown(mu: FiniteMeasure, rho: FiniteMeasure, pm: FibreMap) -> bool:
    """True iff mu is a lift and its pushdown equals the marginal of rho along every section."""
    if not is_pi_lift(mu, pm):
        return False
    down = pushdown(mu, pm)
    for section in pm.sections():
        along = s_marginal(rho, pm, section)
        if pushforward(along, tuple(range(pm.b_count)), label_bound=down.label_bound) != down:
            return False
    return True


def _candidate(rng: np.random.Generator, bounds: SearchBounds) -> Optional[MainInstance]:
    pm = random_fibre_map(rng, bounds.max_columns, bounds.max_fibre)
    label_bound = int(rng.integers(1, bounds.max_label + 1))
    seed_law = random_measure(rng, Space(pm.a_count, label_bound), bounds.support_size)

    sigmas = list(fibre_permutations(pm))
    picked = sorted({int(i) for i in rng.integers(0, len(sigmas), size=int(rng.integers(1, len(sigmas) + 1)))})
    share = Fraction(1, len(picked))
    rho = mixture([
        (share, pushforward(seed_law, lambda x, s=sigmas[i]: permute(x, s), label_bound=label_bound))
        for i in picked
    ])

    sections: List[Section] = list(pm.sections())
    reference = s_marginal(rho, pm, sections[0])
    if any(s_marginal(rho, pm, s) != reference for s in sections[1:]):
        return None

    def kernel(x):
        law: Dict[Section, Fraction] = {}
        for i in rng.integers(0, len(sections), size=2):
            law[sections[int(i)]] = law.get(sections[int(i)], Fraction(0)) + Fraction(1, 2)
        return law

    env = LiftEnvironment.from_kernel(pm, reference, kernel)
    return MainInstance(lift_distribution(env), rho, pm)


def counterexample_search(bounds: SearchBounds, trials: int, seed: int) -> SearchResult:
    """Sample instances satisfying the equality constraint and test domination.

    Instances whose section marginals differ are discarded. Any instance found
    is re-verified from scratch before it is reported.

    Args:
        bounds: Instance size limits
        trials: Number of random draws
        seed: Seed of the numpy generator

    Returns:
        Counts and the first failing instance, if any
    """
    rng = np.random.default_rng(seed)
    result = SearchResult(trials=trials, candidates=0)
    for trial in range(trials):
        instance = _candidate(rng, bounds)
        if instance is None:
            continue
        result.candidates += 1
        verdict = dominates(instance.mu, instance.rho)
        if verdict.holds:
            continue
        if not all_s_marginals_equal_pushdown(instance.mu, instance.rho, instance.pm):
            raise InvariantViolation(f"Trial {trial}: candidate fails the equality constraint on re-check")
        if dominates(instance.mu, instance.rho).holds:
            raise InvariantViolation(f"Trial {trial}: domination verdict is not reproducible")
        result.found = instance
        result.witness = f"trial {trial}: up-set {sorted(verdict.violator.generators)}"
        logger.warning(f"Counterexample candidate found at trial {trial}")
        break
    logger.info(f"Search finished: {result.candidates} of {trials} draws met the equality constraint")
    return result
