"""Augmented against plain reach on the subdivided graph, with the two-floor cover for reference."""

import logging
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.measure import RationalLike, as_fraction, format_fraction
from ..errors import InputError
from ..percolation.estimation import MCEstimate, chunk_bounds, combined_error, map_chunks
from ..percolation.generators import two_floor_cover
from ..percolation.graph import Graph
from ..percolation.sampling import Mode, PercSample, cluster_of, uniforms
from .cells import CellDecomposition, build_cells
from .clusters import augmented_cluster, open_closure
from .exploration import sample_cells

logger = logging.getLogger(__name__)

COVER_STREAM = 2


def s_p(p: RationalLike, M: int, c: int) -> Fraction:
    """p^(M + c)."""
    return as_fraction(p) ** (M + c)


def max_degree_power(g: Graph, R: int) -> int:
    return g.max_degree ** R


def _reaches(cluster, distances: Dict[int, int], radius: int) -> bool:
    return any(distances.get(v, -1) >= radius for v in cluster)


def _compare_chunk(task) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    cd, cover, p, s, v0, lifted, radius, seed, start, stop = task
    distances = cd.base.distances_from(v0)
    cover_distances = cover.distances_from(lifted)
    plain = np.zeros(stop - start, dtype=bool)
    augmented = np.zeros(stop - start, dtype=bool)
    upstairs = np.zeros(stop - start, dtype=bool)
    for i, draw in enumerate(range(start, stop)):
        sample = sample_cells(cd, p, s, seed, draw)
        plain[i] = _reaches(open_closure(cd, sample.x_open, {v0}), distances, radius)
        augmented[i] = _reaches(augmented_cluster(cd, sample.x_open, sample.y, {v0}), distances, radius)
        cover_open = uniforms(cover.edge_count, seed, draw, COVER_STREAM) < p
        cluster = cluster_of(PercSample(cover, Mode.BOND, cover_open, p, seed, draw), lifted)
        upstairs[i] = _reaches(cluster, cover_distances, radius)
    return plain, augmented, upstairs


@dataclass
class AugCompareRow:
    p: str
    s: str
    plain: Dict[str, Any]
    augmented: Dict[str, Any]
    cover: Dict[str, Any]
    gap_in_errors: float
    coupled_violations: int
    holds: bool


@dataclass
class AugComparison:
    """Reach curves on the plain, augmented and covering models over a p grid."""
    r0: int
    R: int
    M: int
    c: int
    v0: int
    radius: int
    s_p: Dict[str, str]
    rows: List[AugCompareRow]

    @property
    def holds(self) -> bool:
        return all(row.holds for row in self.rows)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def compare_pc_aug(
    g0: Graph,
    r0: int,
    p_grid: Sequence[RationalLike],
    s: RationalLike,
    radius: int,
    trials: int,
    seed: int,
    c: int = 4,
    centres: Optional[Sequence[int]] = None,
    v0: Optional[int] = None,
    jobs: int = 1
) -> AugComparison:
    """Monte Carlo reach from v0 under plain, (p, s)-augmented and covering percolation.

    The plain and augmented clusters are read off the same draw, so the
    augmented reach can never fall below the plain one on any sample; a row
    fails when it does.

    Args:
        g0: Graph before subdivision
        r0: Cell separation radius
        p_grid: Edge probabilities
        s: Cell probability
        radius: Target graph distance from v0 in the subdivided graph
        trials: Draws per grid point
        seed: Base seed
        c: Length of the cycles used to switch floors in the cover
        centres: Explicit cell centres
        v0: Start vertex; defaults to the smallest boundary vertex
        jobs: Worker processes

    Returns:
        The comparison with the s_p value of every grid point
    """
    s = as_fraction(s)
    if trials < 1:
        raise InputError("Comparison needs a positive trial count")
    cd: CellDecomposition = build_cells(g0, r0, centres)
    if v0 is None:
        if not cd.boundary_vertices:
            raise InputError("Decomposition has a single cell and no boundary vertex")
        v0 = min(cd.boundary_vertices)
    cover, _ = two_floor_cover(cd.base)
    lifted = 2 * v0
    M = max_degree_power(cd.base, cd.R)

    rows: List[AugCompareRow] = []
    s_values: Dict[str, str] = {}
    for p in p_grid:
        p = as_fraction(p)
        if not 0 <= p <= 1:
            raise InputError(f"Probability out of range: {p}")
        tasks = [(cd, cover, float(p), float(s), v0, lifted, radius, seed, a, b) for a, b in chunk_bounds(trials)]
        parts = map_chunks(_compare_chunk, tasks, jobs)
        plain = np.concatenate([part[0] for part in parts])
        augmented = np.concatenate([part[1] for part in parts])
        upstairs = np.concatenate([part[2] for part in parts])
        violations = int(np.sum(plain & ~augmented))
        plain_est = MCEstimate.from_outcomes(plain, seed)
        aug_est = MCEstimate.from_outcomes(augmented, seed)
        cover_est = MCEstimate.from_outcomes(upstairs, seed)
        error = combined_error(aug_est, plain_est)
        gap = (aug_est.mean - plain_est.mean) / error if error > 0 else 0.0
        rows.append(AugCompareRow(
            format_fraction(p),
            format_fraction(s),
            plain_est.to_dict(),
            aug_est.to_dict(),
            cover_est.to_dict(),
            gap,
            violations,
            violations == 0,
        ))
        s_values[format_fraction(p)] = format_fraction(s_p(p, M, c))
        logger.info(
            f"p = {format_fraction(p)}: plain {plain_est.mean:.4f}, augmented {aug_est.mean:.4f}, "
            f"cover {cover_est.mean:.4f} ({gap:.2f} errors)"
        )
    return AugComparison(r0, cd.R, M, c, v0, radius, s_values, rows)
