"""Immutable simple graphs with stable vertex and edge numbering."""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Set, Tuple

import networkx as nx

from ..errors import InputError

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


@dataclass(frozen=True)
class Graph:
    """A simple undirected graph on vertices 0..vertex_count-1.

    Edges are stored as (u, v) with u < v; the position of an edge in
    `edges` is its id. Neighbour lists are sorted.
    """
    vertex_count: int
    edges: Tuple[Edge, ...]
    adjacency: Tuple[Tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    edge_index: Dict[Edge, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.vertex_count < 0:
            raise InputError(f"Negative vertex count {self.vertex_count}")
        normalized: List[Edge] = []
        index: Dict[Edge, int] = {}
        neighbours: List[List[int]] = [[] for _ in range(self.vertex_count)]
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise InputError(f"Loop at vertex {u}")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise InputError(f"Edge {(u, v)} has an unknown endpoint")
            key = (min(u, v), max(u, v))
            if key in index:
                raise InputError(f"Multiple edge {key}")
            index[key] = len(normalized)
            normalized.append(key)
            neighbours[u].append(v)
            neighbours[v].append(u)
        object.__setattr__(self, "edges", tuple(normalized))
        object.__setattr__(self, "edge_index", index)
        object.__setattr__(self, "adjacency", tuple(tuple(sorted(n)) for n in neighbours))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def neighbours(self, v: int) -> Tuple[int, ...]:
        if not 0 <= v < self.vertex_count:
            raise InputError(f"Unknown vertex {v}")
        return self.adjacency[v]

    @property
    def max_degree(self) -> int:
        return max((len(n) for n in self.adjacency), default=0)

    def edge_id(self, u: int, v: int) -> int:
        try:
            return self.edge_index[(min(u, v), max(u, v))]
        except KeyError:
            raise InputError(f"No edge between {u} and {v}") from None

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edge_index

    def incident_edges(self, v: int) -> Tuple[int, ...]:
        return tuple(self.edge_id(v, w) for w in self.neighbours(v))

    @cached_property
    def nx_graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.vertex_count))
        g.add_edges_from(self.edges)
        return g

    def distances_from(self, v: int, cutoff: Optional[int] = None) -> Dict[int, int]:
        """Graph distances from v, up to `cutoff` if given."""
        self.neighbours(v)
        return dict(nx.single_source_shortest_path_length(self.nx_graph, v, cutoff=cutoff))

    def distance(self, u: int, v: int) -> Optional[int]:
        """Graph distance, None if disconnected."""
        try:
            return nx.shortest_path_length(self.nx_graph, u, v)
        except nx.NetworkXNoPath:
            return None

    def ball(self, v: int, radius: int) -> Set[int]:
        return set(self.distances_from(v, radius))

    def is_connected_within(self, vertices: Iterable[int]) -> bool:
        """Whether the subgraph induced on `vertices` is connected (empty counts as connected)."""
        vertices = list(vertices)
        if not vertices:
            return True
        return nx.is_connected(self.nx_graph.subgraph(vertices))


@dataclass(frozen=True)
class VertexMap:
    """A map from the vertices of `source` to those of `target`."""
    source: Graph
    target: Graph
    mapping: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "mapping", tuple(int(x) for x in self.mapping))
        if len(self.mapping) != self.source.vertex_count:
            raise InputError(f"Map has {len(self.mapping)} entries for {self.source.vertex_count} vertices")
        if any(not 0 <= x < self.target.vertex_count for x in self.mapping):
            raise InputError("Map leaves the target vertex set")

    def __call__(self, x: int) -> int:
        return self.mapping[x]

    def is_surjective(self) -> bool:
        return set(self.mapping) == set(range(self.target.vertex_count))

    def fibre(self, v: int) -> Tuple[int, ...]:
        """Preimage of v, in increasing order."""
        return tuple(x for x, image in enumerate(self.mapping) if image == v)

    @property
    def fibres(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(self.fibre(v) for v in range(self.target.vertex_count))


def read_graph(path: str) -> Graph:
    """Read the "V E" header followed by E lines "u v" (0-based)."""
    try:
        with open(path) as f:
            lines = [line.split() for line in f if line.strip()]
    except OSError as e:
        raise InputError(f"Cannot read graph file {path}: {e}") from e
    try:
        vertex_count, edge_count = (int(t) for t in lines[0])
        edges = [(int(u), int(v)) for u, v in lines[1:]]
    except (IndexError, ValueError) as e:
        raise InputError(f"Malformed graph file {path}: {e}") from e
    if len(edges) != edge_count:
        raise InputError(f"Graph file {path} announces {edge_count} edges, has {len(edges)}")
    return Graph(vertex_count, tuple(edges))


def write_graph(g: Graph, path: str) -> str:
    with open(path, "w") as f:
        f.write(f"{g.vertex_count} {g.edge_count}\n")
        for u, v in g.edges:
            f.write(f"{u} {v}\n")
    logger.info(f"Saved graph to {path}")
    return path
