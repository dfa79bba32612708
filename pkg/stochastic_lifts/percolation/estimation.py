"""Reach probabilities: exact exploration sums, Monte Carlo estimates and a finite-size threshold proxy."""

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np
from scipy import stats

from ..config import get_settings
from ..core.measure import RationalLike, as_fraction, format_fraction
from ..errors import InputError, SizeLimitError
from .graph import Graph, VertexMap
from .sampling import Mode, Probability, draw_rng, uniforms

logger = logging.getLogger(__name__)

CHUNK_SIZE = 1000

T = TypeVar("T")
R = TypeVar("R")

# (opened, closed) -> number of exploration leaves reaching the target distance
ReachPolynomial = Dict[Tuple[int, int], int]


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean of 0/1 outcomes with its standard error (sample sd over sqrt(trials))."""
    mean: float
    standard_error: float
    trials: int
    seed: int

    @classmethod
    def from_outcomes(cls, outcomes: np.ndarray, seed: int) -> "MCEstimate":
        values = np.asarray(outcomes, dtype=float)
        if len(values) == 0:
            raise InputError("No trials")
        error = float(stats.sem(values)) if len(values) > 1 else 0.0
        if math.isnan(error):
            error = 0.0
        return cls(float(values.mean()), error, len(values), seed)

    def to_dict(self) -> Dict[str, Union[float, int]]:
        return {"mean": self.mean, "standard_error": self.standard_error, "trials": self.trials, "seed": self.seed}


def combined_error(a: MCEstimate, b: MCEstimate) -> float:
    return math.sqrt(a.standard_error ** 2 + b.standard_error ** 2)


def chunk_bounds(trials: int, chunk_size: int = CHUNK_SIZE) -> List[Tuple[int, int]]:
    """Chunk boundaries depend on the trial count only."""
    return [(start, min(start + chunk_size, trials)) for start in range(0, trials, chunk_size)]


def map_chunks(func: Callable[[T], R], tasks: Sequence[T], jobs: int = 1) -> List[R]:
    """Apply func to every task, in a process pool when jobs > 1; results keep task order."""
    if jobs <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, tasks))


def _check_radius(radius: int) -> None:
    if radius < 0:
        raise InputError(f"Negative radius {radius}")


def reaches(
    g: Graph,
    mode: Mode,
    is_open: Callable[[int], bool],
    v: int,
    distances: Dict[int, int],
    radius: int
) -> bool:
    """Whether v joins a vertex at distance `radius` through open elements inside `distances`."""
    if mode == Mode.SITE and not is_open(v):
        return False
    if radius == 0:
        return True
    seen, stack = {v}, [v]
    while stack:
        u = stack.pop()
        for w in g.neighbours(u):
            if w in seen or w not in distances:
                continue
            passable = is_open(g.edge_id(u, w)) if mode == Mode.BOND else is_open(w)
            if passable:
                if distances[w] >= radius:
                    return True
                seen.add(w)
                stack.append(w)
    return False


def ball_elements(g: Graph, mode: Mode, v: int, radius: int) -> List[int]:
    """Edges (bond) or vertices (site) that can matter for reaching distance `radius` from v."""
    distances = g.distances_from(v, radius)
    if mode == Mode.SITE:
        return sorted(distances)
    return [
        i for i, (a, b) in enumerate(g.edges)
        if a in distances and b in distances and min(distances[a], distances[b]) < radius
    ]


def reach_polynomial(
    g: Graph,
    mode: Union[Mode, str],
    v: int,
    radius: int,
    cap: Optional[int] = None
) -> ReachPolynomial:
    """Exact reach event as a sum over exploration leaves.

    Elements are revealed one at a time, always the smallest unrevealed one
    leaving the current cluster; the exploration stops on reaching the
    target distance. Each successful leaf contributes p^opened (1-p)^closed.

    Raises:
        SizeLimitError: If the ball has more relevant elements than the cap
    """
    mode = Mode(mode)
    _check_radius(radius)
    cap = cap if cap is not None else get_settings().exact_ball_cap
    elements = ball_elements(g, mode, v, radius)
    if len(elements) > cap:
        raise SizeLimitError("exact reach ball", len(elements), cap)
    distances = g.distances_from(v, radius)

    def frontier(cluster: FrozenSet[int], closed: FrozenSet[int]) -> Optional[Tuple[int, int]]:
        best = None
        for u in cluster:
            for w in g.neighbours(u):
                if w in cluster or w not in distances:
                    continue
                element = g.edge_id(u, w) if mode == Mode.BOND else w
                if element in closed:
                    continue
                if best is None or element < best[0]:
                    best = (element, w)
        return best

    @lru_cache(maxsize=None)
    def explore(cluster: FrozenSet[int], closed: FrozenSet[int]) -> Tuple[Tuple[Tuple[int, int], int], ...]:
        step = frontier(cluster, closed)
        if step is None:
            return ()
        element, w = step
        result: Dict[Tuple[int, int], int] = {}
        if distances[w] >= radius:
            result[(1, 0)] = 1
        else:
            for (o, c), n in explore(cluster | {w}, closed):
                result[(o + 1, c)] = result.get((o + 1, c), 0) + n
        for (o, c), n in explore(cluster, closed | {element}):
            result[(o, c + 1)] = result.get((o, c + 1), 0) + n
        return tuple(sorted(result.items()))

    start_open = 1 if mode == Mode.SITE else 0
    if radius == 0:
        return {(start_open, 0): 1}
    leaves = explore(frozenset({v}), frozenset())
    explore.cache_clear()
    return {(o + start_open, c): n for (o, c), n in leaves}


def evaluate_polynomial(poly: ReachPolynomial, p: RationalLike) -> Fraction:
    p = as_fraction(p)
    return sum((n * p ** o * (1 - p) ** c for (o, c), n in poly.items()), Fraction(0))


def _reach_chunk(task) -> np.ndarray:
    g, mode, p, v, radius, seed, start, stop = task
    distances = g.distances_from(v, radius)
    size = g.edge_count if mode == Mode.BOND else g.vertex_count
    outcomes = np.zeros(stop - start, dtype=bool)
    for i, draw in enumerate(range(start, stop)):
        opened = uniforms(size, seed, draw) < p
        outcomes[i] = reaches(g, mode, lambda k: bool(opened[k]), v, distances, radius)
    return outcomes


def monte_carlo_reach(
    g: Graph,
    mode: Union[Mode, str],
    p: Probability,
    v: int,
    radius: int,
    trials: int,
    seed: int,
    jobs: int = 1
) -> MCEstimate:
    """Reach estimate from draws 0..trials-1 of the seeded sampler."""
    mode = Mode(mode)
    _check_radius(radius)
    tasks = [(g, mode, float(p), v, radius, seed, a, b) for a, b in chunk_bounds(trials)]
    outcomes = np.concatenate(map_chunks(_reach_chunk, tasks, jobs)) if tasks else np.zeros(0)
    return MCEstimate.from_outcomes(outcomes, seed)


def reach_probability(
    g: Graph,
    mode: Union[Mode, str],
    p: RationalLike,
    v: int,
    radius: int,
    method: str = "exact",
    trials: int = 0,
    seed: Optional[int] = None,
    cap: Optional[int] = None,
    jobs: int = 1
) -> Union[Fraction, MCEstimate]:
    """Probability that v is joined to graph distance `radius` inside its radius ball.

    Args:
        method: "exact" (rational p) or "mc" (needs trials and seed)

    Raises:
        SizeLimitError: If the exact method exceeds the ball cap
    """
    if method == "exact":
        p = as_fraction(p)
        if not 0 <= p <= 1:
            raise InputError(f"Probability out of range: {p}")
        return evaluate_polynomial(reach_polynomial(g, mode, v, radius, cap), p)
    if method == "mc":
        if seed is None or trials < 1:
            raise InputError("Monte Carlo reach needs a seed and a positive trial count")
        return monte_carlo_reach(g, mode, float(p), v, radius, trials, seed, jobs)
    raise InputError(f"Unknown method {method!r}")


def estimate_pc(
    g: Graph,
    mode: Union[Mode, str],
    v: int,
    radius: int,
    trials: int,
    seed: int,
    tolerance: float = 1e-2,
    threshold: float = 0.5,
    jobs: int = 1
) -> Tuple[float, float]:
    """Bisect p on the Monte Carlo reach estimate crossing `threshold`.

    A finite-size proxy for the critical parameter; every step reuses the
    same seed, so estimates at different p come from coupled samples.
    """
    lo, hi = 0.0, 1.0
    while hi - lo > tolerance:
        mid = (lo + hi) / 2
        if monte_carlo_reach(g, mode, mid, v, radius, trials, seed, jobs).mean >= threshold:
            hi = mid
        else:
            lo = mid
    logger.debug(f"Threshold proxy at radius {radius}: [{lo:.4f}, {hi:.4f}]")
    return lo, hi


def saw_count(g: Graph, v: int, length: int, cap: Optional[int] = None) -> int:
    """Number of self-avoiding paths with `length` edges starting at v.

    Raises:
        SizeLimitError: If length exceeds the cap
    """
    cap = cap if cap is not None else get_settings().saw_length_cap
    if length > cap:
        raise SizeLimitError("self-avoiding path length", length, cap)
    g.neighbours(v)
    visited = {v}

    def extend(u: int, remaining: int) -> int:
        if remaining == 0:
            return 1
        total = 0
        for w in g.neighbours(u):
            if w not in visited:
                visited.add(w)
                total += extend(w, remaining - 1)
                visited.remove(w)
        return total

    return extend(v, length)


def fibre_selection_reach_exact(vm: VertexMap, x: int, radius: int, cap: Optional[int] = None) -> Fraction:
    """Exact reach of x when one uniform vertex per two-element fibre is kept."""
    cap = cap if cap is not None else get_settings().exact_ball_cap
    g = vm.source
    distances = g.distances_from(x, radius)
    fibres = vm.fibres
    for b, fibre in enumerate(fibres):
        if len(fibre) != 2:
            raise InputError(f"Fibre of {b} has {len(fibre)} vertices, expected 2")
    touched = sorted({vm(a) for a in distances})
    if len(touched) > cap:
        raise SizeLimitError("fibre selection ball", len(touched), cap)
    hits = 0
    for picks in itertools.product((0, 1), repeat=len(touched)):
        kept = {fibres[b][pick] for b, pick in zip(touched, picks)}
        if reaches(g, Mode.SITE, lambda a: a in kept, x, distances, radius):
            hits += 1
    return Fraction(hits, 2 ** len(touched))


def site_half_reach_exact(g: Graph, v: int, radius: int, cap: Optional[int] = None) -> Fraction:
    """Exact reach of v under site percolation at 1/2."""
    return evaluate_polynomial(reach_polynomial(g, Mode.SITE, v, radius, cap), Fraction(1, 2))


def fibre_selection_reach_mc(vm: VertexMap, x: int, radius: int, trials: int, seed: int) -> MCEstimate:
    """Reach estimate of x when one uniform vertex per two-element fibre is kept."""
    g = vm.source
    distances = g.distances_from(x, radius)
    fibres = vm.fibres
    if any(len(fibre) != 2 for fibre in fibres):
        raise InputError("Fibre selection needs every fibre to have two vertices")
    outcomes = np.zeros(trials, dtype=bool)
    for draw in range(trials):
        picks = draw_rng(seed, draw).integers(0, 2, size=len(fibres))
        kept = {fibre[int(pick)] for fibre, pick in zip(fibres, picks)}
        outcomes[draw] = reaches(g, Mode.SITE, lambda a: a in kept, x, distances, radius)
    return MCEstimate.from_outcomes(outcomes, seed)


@dataclass
class ReachComparison:
    """Reach from x upstairs against reach from its image downstairs."""
    radius: int
    p: str
    upper: Union[str, Dict]
    lower: Union[str, Dict]
    holds: bool


def compare_exact(
    vm: VertexMap,
    x: int,
    radii: Sequence[int],
    p_grid: Sequence[RationalLike],
    mode: Union[Mode, str] = Mode.BOND,
    cap: Optional[int] = None
) -> List[ReachComparison]:
    """Exact P_L(x reaches r) >= P_S(pi(x) reaches r) on every grid point, zero tolerance."""
    rows = []
    for radius in radii:
        upper_poly = reach_polynomial(vm.source, mode, x, radius, cap)
        lower_poly = reach_polynomial(vm.target, mode, vm(x), radius, cap)
        for p in p_grid:
            upper, lower = evaluate_polynomial(upper_poly, p), evaluate_polynomial(lower_poly, p)
            rows.append(ReachComparison(radius, format_fraction(as_fraction(p)), format_fraction(upper), format_fraction(lower), upper >= lower))
    return rows


def compare_fibre_selection_exact(vm: VertexMap, x: int, radii: Sequence[int], cap: Optional[int] = None) -> List[ReachComparison]:
    """Fibre-selection reach upstairs against site percolation at 1/2 downstairs."""
    rows = []
    for radius in radii:
        upper = fibre_selection_reach_exact(vm, x, radius, cap)
        lower = site_half_reach_exact(vm.target, vm(x), radius, cap)
        rows.append(ReachComparison(radius, "1/2", format_fraction(upper), format_fraction(lower), upper >= lower))
    return rows


def compare_mc(
    vm: VertexMap,
    x: int,
    radius: int,
    p: float,
    trials: int,
    seed: int,
    mode: Union[Mode, str] = Mode.BOND,
    jobs: int = 1,
    sigmas: float = 3.0
) -> ReachComparison:
    """Monte Carlo comparison; passes unless the upper estimate is below by more than `sigmas` combined errors."""
    upper = monte_carlo_reach(vm.source, mode, p, x, radius, trials, seed, jobs)
    lower = monte_carlo_reach(vm.target, mode, p, vm(x), radius, trials, seed, jobs)
    holds = upper.mean + sigmas * combined_error(upper, lower) >= lower.mean
    return ReachComparison(radius, repr(float(p)), upper.to_dict(), lower.to_dict(), holds)


def compare_fibre_selection_mc(
    vm: VertexMap,
    x: int,
    radius: int,
    trials: int,
    seed: int,
    jobs: int = 1,
    sigmas: float = 3.0
) -> ReachComparison:
    """Monte Carlo version of the fibre-selection comparison, with the tolerance of compare_mc."""
    upper = fibre_selection_reach_mc(vm, x, radius, trials, seed)
    lower = monte_carlo_reach(vm.target, Mode.SITE, 0.5, vm(x), radius, trials, seed, jobs)
    holds = upper.mean + sigmas * combined_error(upper, lower) >= lower.mean
    return ReachComparison(radius, "1/2", upper.to_dict(), lower.to_dict(), holds)
