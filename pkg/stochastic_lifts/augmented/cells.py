"""Edge subdivision and centre-indexed cell decompositions of the subdivided graph."""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from ..errors import InputError, InvariantViolation
from ..percolation.generators import cycle_graph, torus_graph
from ..percolation.graph import Graph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Subdivision:
    """g with a midpoint inserted on every edge; the midpoint of edge e is vertex V + e."""
    original: Graph
    graph: Graph

    def midpoint(self, edge_id: int) -> int:
        return self.original.vertex_count + edge_id

    def is_midpoint(self, v: int) -> bool:
        return v >= self.original.vertex_count

    def edge_of(self, midpoint: int) -> Tuple[int, int]:
        return self.original.edges[midpoint - self.original.vertex_count]


def subdivide(g: Graph) -> Subdivision:
    """Each edge {u, v} becomes the path u - m - v through a fresh midpoint m."""
    n = g.vertex_count
    edges = []
    for e, (u, v) in enumerate(g.edges):
        edges.append((u, n + e))
        edges.append((v, n + e))
    return Subdivision(g, Graph(n + g.edge_count, tuple(edges)))


def maximal_separated(g: Graph, d: int) -> List[int]:
    """Greedy maximal set of vertices at pairwise distance at least d, in vertex order."""
    if d < 1:
        raise InputError(f"Separation must be at least 1, got {d}")
    chosen: List[int] = []
    blocked: Set[int] = set()
    for v in range(g.vertex_count):
        if v in blocked:
            continue
        chosen.append(v)
        blocked.update(g.distances_from(v, d - 1))
    return chosen


@dataclass(frozen=True)
class Cell:
    centre: int
    vertices: FrozenSet[int]
    interior: FrozenSet[int]
    boundary: Tuple[int, ...]
    edges: Tuple[int, ...]
    interior_edges: Tuple[int, ...]


@dataclass
class CellDecomposition:
    """Cells of the subdivided graph indexed by ascending centre.

    `clipped` lists centres whose cells are exempt from the outer radius
    inclusion, which happens when the centres were given explicitly and are
    not maximal.
    """
    subdivision: Subdivision
    r0: int
    cells: List[Cell]
    clipped: FrozenSet[int] = frozenset()
    owner: Dict[int, int] = field(default_factory=dict)

    @property
    def base(self) -> Graph:
        return self.subdivision.graph

    @property
    def r(self) -> int:
        return 2 * self.r0

    @property
    def R(self) -> int:
        return 4 * self.r0 + 1

    @property
    def centres(self) -> Tuple[int, ...]:
        return tuple(cell.centre for cell in self.cells)

    @property
    def boundary_vertices(self) -> FrozenSet[int]:
        return frozenset(v for cell in self.cells for v in cell.boundary)

    def cells_containing(self, v: int) -> List[int]:
        return [i for i, cell in enumerate(self.cells) if v in cell.vertices]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "r0": self.r0,
            "r": self.r,
            "R": self.R,
            "vertex_count": self.base.vertex_count,
            "cells": [
                {
                    "centre": cell.centre,
                    "vertices": sorted(cell.vertices),
                    "interior": sorted(cell.interior),
                    "boundary": list(cell.boundary),
                    "edges": list(cell.edges),
                }
                for cell in self.cells
            ],
            "clipped": sorted(self.clipped),
        }


def _voronoi(g: Graph, centres: Sequence[int]) -> Dict[int, int]:
    """Nearest centre of every vertex; ties go to the smaller centre."""
    owner: Dict[int, int] = {}
    best: Dict[int, int] = {}
    for c in sorted(centres):
        for v, dist in g.distances_from(c).items():
            if v not in best or dist < best[v]:
                best[v], owner[v] = dist, c
    missing = [v for v in range(g.vertex_count) if v not in owner]
    if missing:
        raise InputError(f"Vertices {missing[:5]} are not reachable from any centre")
    return owner


def build_cells(g0: Graph, r0: int, centres: Optional[Sequence[int]] = None) -> CellDecomposition:
    """Voronoi cells around (2 r0 + 1)-separated centres, moved to the subdivided graph.

    A cell holds the vertices of its Voronoi cell and the midpoints of every
    edge touching them; its boundary is made of the midpoints it shares with
    a neighbouring cell.

    Args:
        g0: Graph before subdivision
        r0: Separation radius, r0 >= 1
        centres: Explicit centres; defaults to the greedy maximal separated set

    Raises:
        InputError: If explicit centres are too close
        InvariantViolation: If the decomposition fails its audit
    """
    if r0 < 1:
        raise InputError(f"r0 must be at least 1, got {r0}")
    separation = 2 * r0 + 1
    if centres is None:
        centres = maximal_separated(g0, separation)
        maximal = True
    else:
        centres = sorted(set(centres))
        for i, u in enumerate(centres):
            for v in centres[i + 1:]:
                dist = g0.distance(u, v)
                if dist is not None and dist < separation:
                    raise InputError(f"Centres {u} and {v} are at distance {dist} < {separation}")
        maximal = centres == maximal_separated_completion(g0, separation, centres)

    sub = subdivide(g0)
    sigma = sub.graph
    owner = _voronoi(g0, centres)
    cells: List[Cell] = []
    for c in sorted(centres):
        core = {v for v, o in owner.items() if o == c}
        vertices = set(core)
        for e, (u, v) in enumerate(g0.edges):
            if u in core or v in core:
                vertices.add(sub.midpoint(e))
        boundary = tuple(sorted(v for v in vertices if any(w not in vertices for w in sigma.neighbours(v))))
        interior = frozenset(vertices - set(boundary))
        edges = tuple(i for i, (a, b) in enumerate(sigma.edges) if a in vertices and b in vertices)
        interior_edges = tuple(i for i in edges if set(sigma.edges[i]) <= interior)
        cells.append(Cell(c, frozenset(vertices), interior, boundary, edges, interior_edges))

    clipped = frozenset() if maximal else frozenset(centres)
    cd = CellDecomposition(sub, r0, cells, clipped, owner)
    violations = audit_cells(cd)
    if violations:
        raise InvariantViolation(f"Cell decomposition fails its audit: {violations[0]}")
    logger.debug(f"Built {len(cells)} cells on {sigma.vertex_count} vertices (r0 = {r0})")
    return cd


def maximal_separated_completion(g: Graph, d: int, start: Sequence[int]) -> List[int]:
    """`start` extended greedily, in vertex order, to a maximal d-separated set."""
    chosen = sorted(start)
    blocked: Set[int] = set()
    for v in chosen:
        blocked.update(g.distances_from(v, d - 1))
    for v in range(g.vertex_count):
        if v not in blocked:
            chosen.append(v)
            blocked.update(g.distances_from(v, d - 1))
    return sorted(chosen)


def audit_cells(cd: CellDecomposition) -> List[str]:
    """Violations of the decomposition invariants; clipped cells skip the outer radius check."""
    sigma = cd.base
    violations: List[str] = []
    seen: Dict[int, int] = {}
    for cell in cd.cells:
        for e in cell.edges:
            if e in seen:
                violations.append(f"edge {e} lies in the cells of {seen[e]} and {cell.centre}")
            seen[e] = cell.centre
    missing = sorted(set(range(sigma.edge_count)) - set(seen))
    if missing:
        violations.append(f"edges {missing[:5]} lie in no cell")
    for cell in cd.cells:
        if not sigma.is_connected_within(cell.interior):
            violations.append(f"interior of cell {cell.centre} is disconnected")
        distances = sigma.distances_from(cell.centre)
        inner = {v for v, dist in distances.items() if dist <= cd.r}
        if not inner <= cell.interior:
            violations.append(f"ball of radius {cd.r} around {cell.centre} leaves the interior")
        if cell.centre not in cd.clipped:
            far = [v for v in cell.vertices if distances.get(v, cd.R + 1) > cd.R]
            if far:
                violations.append(f"cell {cell.centre} reaches beyond radius {cd.R}: {sorted(far)[:5]}")
    return violations


def centre_table(cd: CellDecomposition) -> List[Dict[str, Any]]:
    """One row per vertex of the subdivided graph: its cells and whether it is a boundary vertex."""
    boundary = cd.boundary_vertices
    rows = []
    for v in range(cd.base.vertex_count):
        rows.append({
            "vertex": v,
            "midpoint": cd.subdivision.is_midpoint(v),
            "centres": [cd.cells[i].centre for i in cd.cells_containing(v)],
            "boundary": v in boundary,
        })
    return rows


@dataclass(frozen=True)
class CellFixture:
    """A base graph with its cell parameters; `floor_switch` is the cycle length used to change floors in the cover."""
    graph: Graph
    r0: int = 1
    centres: Optional[Tuple[int, ...]] = None
    floor_switch: int = 4

    def build(self) -> CellDecomposition:
        return build_cells(self.graph, self.r0, self.centres)


def pendant_ring() -> Graph:
    """C6 with the pendant path 0 - 6 - 7 - 8."""
    return Graph(9, ((0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (0, 6), (6, 7), (7, 8)))


def cell_fixtures() -> Dict[str, CellFixture]:
    """Small cell decompositions whose relation laws are cheap to enumerate.

    "torus12" is the one-dimensional torus of side 12.
    """
    return {
        "ring6": CellFixture(cycle_graph(6)),
        "torus12": CellFixture(torus_graph((12,))),
        "pendant": CellFixture(pendant_ring(), centres=(0, 3, 8)),
    }
