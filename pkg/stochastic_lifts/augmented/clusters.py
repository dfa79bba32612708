"""Augmented clusters: open-edge closure plus whole-cell absorption through Y-open cells."""

import logging
from typing import Iterable, Set

import numpy as np

from ..errors import InputError
from .cells import Cell, CellDecomposition

logger = logging.getLogger(__name__)


def _check_sample(cd: CellDecomposition, x_open: np.ndarray, y: np.ndarray) -> None:
    if len(x_open) != cd.base.edge_count:
        raise InputError(f"Edge sample has {len(x_open)} entries, expected {cd.base.edge_count}")
    if len(y) != len(cd.cells):
        raise InputError(f"Cell sample has {len(y)} entries, expected {len(cd.cells)}")


def interior_open(cell: Cell, x_open: np.ndarray) -> bool:
    return all(x_open[e] for e in cell.interior_edges)


def opens_into(cd: CellDecomposition, cell: Cell, x_open: np.ndarray, sources: Iterable[int]) -> bool:
    """Whether some open edge joins a vertex of `sources` on the boundary to the interior."""
    g = cd.base
    for v in sources:
        if v not in cell.vertices or v in cell.interior:
            continue
        for w in g.neighbours(v):
            if w in cell.interior and x_open[g.edge_id(v, w)]:
                return True
    return False


def open_closure(cd: CellDecomposition, x_open: np.ndarray, start: Set[int]) -> Set[int]:
    g = cd.base
    seen = set(start)
    stack = list(start)
    while stack:
        u = stack.pop()
        for w in g.neighbours(u):
            if w not in seen and x_open[g.edge_id(u, w)]:
                seen.add(w)
                stack.append(w)
    return seen


def augmented_cluster(cd: CellDecomposition, x_open: np.ndarray, y: np.ndarray, a: Iterable[int]) -> Set[int]:
    """Smallest vertex set containing `a` that is closed under both absorption rules.

    An open edge drags its far endpoint in. A cell whose Y bit is set and whose
    interior edges are all open is absorbed whole as soon as the set holds a
    boundary vertex of it joined by an open edge to its interior.

    Args:
        cd: Cell decomposition of the subdivided graph
        x_open: Boolean state of every edge of the subdivided graph
        y: Boolean Y bit of every cell, in cell order
        a: Starting vertices
    """
    _check_sample(cd, x_open, y)
    cluster = open_closure(cd, x_open, set(a))
    candidates = [cell for cell, bit in zip(cd.cells, y) if bit and interior_open(cell, x_open)]
    changed = True
    while changed:
        changed = False
        for cell in candidates:
            if cell.vertices <= cluster:
                continue
            if opens_into(cd, cell, x_open, cluster.intersection(cell.boundary)):
                cluster = open_closure(cd, x_open, cluster | cell.vertices)
                changed = True
    return cluster
