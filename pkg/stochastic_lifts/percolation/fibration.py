"""Fibrations of graphs, path lifting and the edge-to-vertex transform."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Set, Tuple

from ..errors import InputError, InvariantViolation, PathLiftError
from .graph import Graph, VertexMap

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FibrationCheck:
    """`counterexample` is a vertex x of the source and a neighbour v of its image with no lift."""
    holds: bool
    counterexample: Optional[Tuple[int, int]] = None

    def __bool__(self) -> bool:
        return self.holds


def is_fibration(vm: VertexMap) -> FibrationCheck:
    """Check surjectivity and that every edge at pi(x) lifts to an edge at x."""
    if not vm.is_surjective():
        missing = sorted(set(range(vm.target.vertex_count)) - set(vm.mapping))
        raise InputError(f"Vertex map is not surjective; missing {missing}")
    for x in range(vm.source.vertex_count):
        images = {vm(y) for y in vm.source.neighbours(x)}
        for v in vm.target.neighbours(vm(x)):
            if v not in images:
                return FibrationCheck(False, (x, v))
    return FibrationCheck(True)


def star_graph(g: Graph) -> Graph:
    """One vertex per edge of g, adjacent when the edges share an endpoint."""
    edges = []
    for v in range(g.vertex_count):
        incident = sorted(g.incident_edges(v))
        for i, e in enumerate(incident):
            for f in incident[i + 1:]:
                edges.append((e, f))
    return Graph(g.edge_count, tuple(sorted(edges)))


def projected_edges(vm: VertexMap) -> List[int]:
    """Ids of the source edges whose endpoints map to adjacent target vertices."""
    return [
        i for i, (u, v) in enumerate(vm.source.edges)
        if vm.target.has_edge(vm(u), vm(v))
    ]


def star_graph_pi(vm: VertexMap) -> Tuple[Graph, Graph, VertexMap]:
    """The edge graphs of both sides, keeping only source edges that project onto edges.

    Vertex i of the source edge graph is the i-th kept edge, in edge-id order.

    Raises:
        InvariantViolation: If vm is a fibration but the induced map is not
    """
    kept = projected_edges(vm)
    position = {e: i for i, e in enumerate(kept)}
    edges = []
    for v in range(vm.source.vertex_count):
        incident = sorted(e for e in vm.source.incident_edges(v) if e in position)
        for i, e in enumerate(incident):
            for f in incident[i + 1:]:
                edges.append((position[e], position[f]))
    source_star = Graph(len(kept), tuple(sorted(edges)))
    target_star = star_graph(vm.target)
    mapping = tuple(
        vm.target.edge_id(vm(u), vm(v))
        for u, v in (vm.source.edges[e] for e in kept)
    )
    induced = VertexMap(source_star, target_star, mapping)
    if vm.is_surjective() and induced.is_surjective() and is_fibration(vm) and not is_fibration(induced):
        raise InvariantViolation("Edge graph map of a fibration is not a fibration")
    return source_star, target_star, induced


def lift_path_smallest(vm: VertexMap, path: Sequence[int], start: Optional[int] = None) -> Tuple[int, ...]:
    """Lift a path of the target greedily, always moving to the smallest admissible neighbour.

    Args:
        vm: Vertex map, normally a fibration
        path: Vertices of a path in the target
        start: First vertex of the lift; defaults to the smallest preimage of path[0]

    Raises:
        PathLiftError: If no neighbour lies over the next vertex
    """
    if not path:
        raise InputError("Empty path")
    for a, b in zip(path, path[1:]):
        if not vm.target.has_edge(a, b):
            raise InputError(f"{a} and {b} are not adjacent in the target")
    if start is None:
        preimage = vm.fibre(path[0])
        if not preimage:
            raise PathLiftError(0, path[0])
        start = preimage[0]
    elif vm(start) != path[0]:
        raise InputError(f"Start {start} does not lie over {path[0]}")
    lifted = [start]
    for step, v in enumerate(path[1:], start=1):
        options = [y for y in vm.source.neighbours(lifted[-1]) if vm(y) == v]
        if not options:
            raise PathLiftError(step, v)
        lifted.append(options[0])
    return tuple(lifted)


def bond_cluster_edges(g: Graph, v: int, open_edges: Set[int]) -> Set[int]:
    """Open edges reachable from v through open edges."""
    seen_vertices, seen_edges, stack = {v}, set(), [v]
    while stack:
        u = stack.pop()
        for w in g.neighbours(u):
            e = g.edge_id(u, w)
            if e in open_edges:
                seen_edges.add(e)
                if w not in seen_vertices:
                    seen_vertices.add(w)
                    stack.append(w)
    return seen_edges


def star_transform_bijection(g: Graph, v: int, open_edges: Set[int]) -> Tuple[bool, Set[int], Set[int]]:
    """Compare the open-edge cluster of v with the open-vertex clusters of its open edges in the edge graph.

    Returns:
        Whether both edge sets agree, followed by the bond-side and the site-side sets
    """
    bond_side = bond_cluster_edges(g, v, open_edges)
    star = star_graph(g)
    site_side: Set[int] = set()
    stack = [e for e in g.incident_edges(v) if e in open_edges]
    site_side.update(stack)
    while stack:
        e = stack.pop()
        for f in star.neighbours(e):
            if f in open_edges and f not in site_side:
                site_side.add(f)
                stack.append(f)
    return bond_side == site_side, bond_side, site_side
