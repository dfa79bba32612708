"""Boundary relations of a cell: exact laws under plain and augmented percolation, and the delta search."""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..config import get_settings
from ..core.domination import dominates
from ..core.measure import FiniteMeasure, RationalLike, Space, as_fraction
from ..errors import InputError, InvariantViolation, PreconditionError, SizeLimitError
from ..percolation.estimation import map_chunks
from .cells import Cell, CellDecomposition

logger = logging.getLogger(__name__)

# Block label of each boundary vertex, numbered in order of first appearance
BoundaryRelation = Tuple[int, ...]

ENUMERATION_CHUNK = 1 << 14


class Variant(str, Enum):
    PLAIN = "plain"
    AUGMENTED = "augmented"


def canonical(labels: Sequence[int]) -> BoundaryRelation:
    """Relabel blocks in order of first appearance."""
    renumber: Dict[int, int] = {}
    return tuple(renumber.setdefault(label, len(renumber)) for label in labels)


def refines(x: BoundaryRelation, y: BoundaryRelation) -> bool:
    """x <= y when every block of x lies inside a block of y."""
    image: Dict[int, int] = {}
    for a, b in zip(x, y):
        if image.setdefault(a, b) != b:
            return False
    return True


def relation_blocks(relation: BoundaryRelation, boundary: Sequence[int]) -> List[List[int]]:
    """The partition as sorted blocks of boundary vertices."""
    blocks: Dict[int, List[int]] = {}
    for label, v in zip(relation, boundary):
        blocks.setdefault(label, []).append(v)
    return sorted(sorted(block) for block in blocks.values())


def relation_space(cell: Cell) -> Space:
    n = len(cell.boundary)
    return Space(n, max(1, n - 1))


@dataclass(frozen=True)
class _CellFrame:
    """Cell-local indices: edge k joins local vertices ends[k]."""
    vertex_count: int
    ends: Tuple[Tuple[int, int], ...]
    boundary: Tuple[int, ...]
    interior_mask: int
    entry_mask: int


def _frame(cd: CellDecomposition, cell: Cell, a: Sequence[int]) -> _CellFrame:
    g = cd.base
    local = {v: i for i, v in enumerate(sorted(cell.vertices))}
    ends = tuple((local[g.edges[e][0]], local[g.edges[e][1]]) for e in cell.edges)
    interior_mask = entry_mask = 0
    sources = set(a)
    for k, e in enumerate(cell.edges):
        u, v = g.edges[e]
        if e in cell.interior_edges:
            interior_mask |= 1 << k
        if (u in sources and v in cell.interior) or (v in sources and u in cell.interior):
            entry_mask |= 1 << k
    return _CellFrame(len(local), ends, tuple(local[v] for v in cell.boundary), interior_mask, entry_mask)


def _check_sources(cell: Cell, a: Sequence[int], variant: Variant) -> None:
    outside = [v for v in a if v not in cell.boundary]
    if outside:
        raise PreconditionError(f"Vertices {outside} are not on the boundary of cell {cell.centre}")
    if variant == Variant.AUGMENTED and not a and cell.boundary:
        raise PreconditionError(f"Augmented relation of cell {cell.centre} needs a nonempty source set")


def _relation_of(frame: _CellFrame, mask: int) -> BoundaryRelation:
    parent = list(range(frame.vertex_count))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for k, (u, v) in enumerate(frame.ends):
        if mask >> k & 1:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
    return canonical([find(b) for b in frame.boundary])


def _boosted(frame: _CellFrame, mask: int) -> bool:
    return mask & frame.interior_mask == frame.interior_mask and bool(mask & frame.entry_mask)


def boundary_relation(
    cd: CellDecomposition,
    cell: Cell,
    x_open: np.ndarray,
    y_bit: bool,
    a: Sequence[int],
    variant: Union[Variant, str]
) -> BoundaryRelation:
    """Partition of the cell boundary by open connectivity inside the cell.

    In the augmented variant the partition collapses to a single block when
    Y is set, the interior is fully open and some open edge enters the
    interior from a vertex of `a`.
    """
    variant = Variant(variant)
    _check_sources(cell, a, variant)
    frame = _frame(cd, cell, a)
    mask = sum(1 << k for k, e in enumerate(cell.edges) if x_open[e])
    if variant == Variant.AUGMENTED and y_bit and _boosted(frame, mask):
        return (0,) * len(cell.boundary)
    return _relation_of(frame, mask)


def _count_chunk(task) -> Tuple[Dict[BoundaryRelation, List[int]], Dict[BoundaryRelation, List[int]]]:
    frame, start, stop = task
    m = len(frame.ends)
    top = (0,) * len(frame.boundary)
    plain: Dict[BoundaryRelation, List[int]] = {}
    boosted: Dict[BoundaryRelation, List[int]] = {}
    for mask in range(start, stop):
        k = bin(mask).count("1")
        relation = _relation_of(frame, mask)
        plain.setdefault(relation, [0] * (m + 1))[k] += 1
        lifted = top if _boosted(frame, mask) else relation
        boosted.setdefault(lifted, [0] * (m + 1))[k] += 1
    return plain, boosted


def _merge(into: Dict[BoundaryRelation, List[int]], part: Dict[BoundaryRelation, List[int]]) -> None:
    for relation, counts in part.items():
        if relation in into:
            into[relation] = [a + b for a, b in zip(into[relation], counts)]
        else:
            into[relation] = list(counts)


@dataclass(frozen=True)
class RelationCounts:
    """Edge configurations of one cell counted by boundary relation and number of open edges.

    `boosted` holds the relation seen when the cell's Y bit is set.
    """
    cell: Cell
    sources: Tuple[int, ...]
    edge_count: int
    plain: Dict[BoundaryRelation, Tuple[int, ...]]
    boosted: Dict[BoundaryRelation, Tuple[int, ...]]

    def law(self, p: RationalLike, s: RationalLike = 0, variant: Union[Variant, str] = Variant.PLAIN) -> FiniteMeasure:
        p, s = as_fraction(p), as_fraction(s)
        if not (0 <= p <= 1 and 0 <= s <= 1):
            raise InputError(f"Parameters out of range: p = {p}, s = {s}")
        variant = Variant(variant)
        powers = [p ** k * (1 - p) ** (self.edge_count - k) for k in range(self.edge_count + 1)]
        weights: Dict[BoundaryRelation, Fraction] = {}
        parts = [(1, self.plain)] if variant == Variant.PLAIN else [(1 - s, self.plain), (s, self.boosted)]
        for share, table in parts:
            if not share:
                continue
            for relation, counts in table.items():
                mass = share * sum((n * w for n, w in zip(counts, powers) if n), Fraction(0))
                weights[relation] = weights.get(relation, Fraction(0)) + mass
        return FiniteMeasure.from_weights(relation_space(self.cell), weights)


def relation_counts(
    cd: CellDecomposition,
    cell: Cell,
    a: Sequence[int] = (),
    cap: Optional[int] = None,
    jobs: int = 1
) -> RelationCounts:
    """Enumerate every edge configuration of the cell once.

    Raises:
        SizeLimitError: If 2^|edges| exceeds the configuration cap
    """
    cap = cap if cap is not None else get_settings().relation_config_cap
    m = len(cell.edges)
    if 2 ** m > cap:
        raise SizeLimitError("cell edge configurations", 2 ** m, cap)
    outside = [v for v in a if v not in cell.boundary]
    if outside:
        raise PreconditionError(f"Vertices {outside} are not on the boundary of cell {cell.centre}")
    frame = _frame(cd, cell, a)
    tasks = [(frame, start, min(start + ENUMERATION_CHUNK, 2 ** m)) for start in range(0, 2 ** m, ENUMERATION_CHUNK)]
    plain: Dict[BoundaryRelation, List[int]] = {}
    boosted: Dict[BoundaryRelation, List[int]] = {}
    for part_plain, part_boosted in map_chunks(_count_chunk, tasks, jobs):
        _merge(plain, part_plain)
        _merge(boosted, part_boosted)
    logger.debug(f"Cell {cell.centre}: {2 ** m} configurations, {len(plain)} plain relations")
    return RelationCounts(
        cell,
        tuple(sorted(a)),
        m,
        {r: tuple(c) for r, c in sorted(plain.items())},
        {r: tuple(c) for r, c in sorted(boosted.items())},
    )


def relation_distribution(
    cd: CellDecomposition,
    cell: Cell,
    p: RationalLike,
    s: RationalLike,
    a: Sequence[int],
    variant: Union[Variant, str],
    cap: Optional[int] = None
) -> FiniteMeasure:
    """Exact law of the boundary relation at (p, s)."""
    variant = Variant(variant)
    _check_sources(cell, a, variant)
    return relation_counts(cd, cell, a, cap).law(p, s, variant)


def relation_dominates(d1: FiniteMeasure, d2: FiniteMeasure) -> bool:
    return dominates(d1, d2, leq=refines).holds


def default_sources(cell: Cell) -> Tuple[int, ...]:
    return cell.boundary[:1]


def max_delta(
    cd: CellDecomposition,
    cell: Cell,
    p: RationalLike,
    s: RationalLike,
    a: Optional[Sequence[int]] = None,
    resolution: Optional[RationalLike] = None,
    min_resolution: Optional[RationalLike] = None,
    counts: Optional[RelationCounts] = None
) -> Fraction:
    """Largest grid step delta such that the plain law at p + delta is dominated by the augmented law at (p, s).

    The grid is scanned from the top; when no multiple of `resolution` works
    the step is halved down to `min_resolution`. Zero means no certificate.

    Raises:
        InvariantViolation: If s > 0 and 0 < p < 1 but no positive step is certified
    """
    settings = get_settings()
    p, s = as_fraction(p), as_fraction(s)
    step = as_fraction(resolution) if resolution is not None else settings.delta_resolution
    floor = as_fraction(min_resolution) if min_resolution is not None else settings.delta_min_resolution
    if step <= 0 or floor <= 0:
        raise InputError("Resolutions must be positive")
    a = tuple(a) if a is not None else default_sources(cell)
    counts = counts or relation_counts(cd, cell, a)
    target = counts.law(p, s, Variant.AUGMENTED)

    for k in range(math.floor((1 - p) / step), 0, -1):
        delta = k * step
        if relation_dominates(counts.law(p + delta), target):
            return delta
    step /= 2
    while step >= floor:
        if p + step <= 1 and relation_dominates(counts.law(p + step), target):
            return step
        step /= 2
    if s > 0 and 0 < p < 1:
        raise InvariantViolation(f"No positive delta certified for cell {cell.centre} at p = {p}, s = {s}")
    return Fraction(0)


def mass_bound(cell: Cell, s: RationalLike, p: RationalLike) -> Fraction:
    """s * eps^|edges| with eps = min(p, 1 - p): mass of the augmented event in the worst configuration."""
    p = as_fraction(p)
    return as_fraction(s) * min(p, 1 - p) ** len(cell.edges)
