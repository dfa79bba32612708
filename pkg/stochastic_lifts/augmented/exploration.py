"""Cell-by-cell exploration of the boundary cluster of a boundary vertex."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Set, Tuple, Union

import numpy as np

from ..core.measure import RationalLike
from ..errors import InputError
from ..percolation.sampling import uniforms
from .cells import CellDecomposition
from .relations import BoundaryRelation, Variant, boundary_relation

logger = logging.getLogger(__name__)

EDGE_STREAM = 0
CELL_STREAM = 1


@dataclass
class CellSample:
    """Edge states of the subdivided graph and one Y bit per cell, from a single seeded draw."""
    x_open: np.ndarray
    y: np.ndarray
    seed: int = 0
    draw: int = 0


def sample_cells(cd: CellDecomposition, p: RationalLike, s: RationalLike, seed: int, draw: int = 0) -> CellSample:
    """Threshold the edge uniforms at p and the cell uniforms at s; raising either only opens more."""
    x_open = uniforms(cd.base.edge_count, seed, draw, EDGE_STREAM) < float(p)
    y = uniforms(len(cd.cells), seed, draw, CELL_STREAM) < float(s)
    return CellSample(x_open, y, seed, draw)


@dataclass
class ExplorationTrace:
    """Final boundary cluster, plus the cells in reveal order with the relation each revealed."""
    cluster: Set[int]
    revealed: List[int] = field(default_factory=list)
    relations: Dict[int, BoundaryRelation] = field(default_factory=dict)
    frozen_sources: Dict[int, Tuple[int, ...]] = field(default_factory=dict)


def explore_sample(
    cd: CellDecomposition,
    v0: int,
    sample: CellSample,
    variant: Union[Variant, str] = Variant.PLAIN
) -> ExplorationTrace:
    """Reveal cells in ascending centre order, always the first unexplored one touching the cluster.

    The relation of a cell is computed once, against the cluster as it stands
    when the cell is revealed, and never recomputed. After each reveal the
    cluster absorbs every boundary vertex related to one of its members in
    an explored cell, until nothing changes.

    Raises:
        InputError: If v0 is not a boundary vertex
    """
    variant = Variant(variant)
    if v0 not in cd.boundary_vertices:
        raise InputError(f"Vertex {v0} is not on the boundary of any cell")
    cluster = {v0}
    trace = ExplorationTrace(cluster)
    while True:
        pick = next(
            (i for i, cell in enumerate(cd.cells)
             if i not in trace.relations and cluster.intersection(cell.boundary)),
            None,
        )
        if pick is None:
            break
        cell = cd.cells[pick]
        sources = tuple(sorted(cluster.intersection(cell.boundary)))
        trace.revealed.append(pick)
        trace.frozen_sources[pick] = sources
        trace.relations[pick] = boundary_relation(cd, cell, sample.x_open, bool(sample.y[pick]), sources, variant)
        _saturate(cd, cluster, trace.relations)
    logger.debug(f"Explored {len(trace.revealed)} cells from {v0}; cluster has {len(cluster)} boundary vertices")
    return trace


def _saturate(cd: CellDecomposition, cluster: Set[int], relations: Dict[int, BoundaryRelation]) -> None:
    changed = True
    while changed:
        changed = False
        for i, relation in relations.items():
            boundary = cd.cells[i].boundary
            hit = {label for label, v in zip(relation, boundary) if v in cluster}
            for label, v in zip(relation, boundary):
                if label in hit and v not in cluster:
                    cluster.add(v)
                    changed = True


def explore(
    cd: CellDecomposition,
    v0: int,
    p: RationalLike,
    s: RationalLike,
    seed: int,
    variant: Union[Variant, str] = Variant.PLAIN,
    draw: int = 0
) -> Set[int]:
    """Boundary vertices the exploration from v0 ends with, on the seeded draw."""
    return explore_sample(cd, v0, sample_cells(cd, p, s, seed, draw), variant).cluster
