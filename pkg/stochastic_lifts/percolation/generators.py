"""Built-in graphs and fibred graph pairs."""

import itertools
from typing import Dict, List, Sequence, Tuple

from ..errors import InputError
from .graph import Edge, Graph, VertexMap


def path_graph(n: int) -> Graph:
    """Path on n vertices 0 - 1 - ... - (n-1)."""
    if n < 1:
        raise InputError("A path needs at least one vertex")
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def ray_graph(length: int) -> Graph:
    """Finite ray from vertex 0 with `length` edges."""
    return path_graph(length + 1)


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise InputError("A simple cycle needs at least three vertices")
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple(itertools.combinations(range(n), 2)))


def claw_graph(leaves: int) -> Graph:
    """The star K_{1,leaves} with centre 0."""
    return Graph(leaves + 1, tuple((0, i) for i in range(1, leaves + 1)))


def box_index(coords: Sequence[int], dims: Sequence[int]) -> int:
    """Row-major index of a box lattice vertex."""
    index = 0
    for c, d in zip(coords, dims):
        index = index * d + c
    return index


def box_graph(dims: Sequence[int], periodic: bool = False) -> Graph:
    """Box lattice [0, d1) x ... x [0, dk) with nearest-neighbour edges.

    With `periodic`, opposite faces are glued; every side must then have
    length at least 3 to keep the graph simple.
    """
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise InputError(f"Bad box dimensions {dims}")
    if periodic and any(d < 3 for d in dims):
        raise InputError("Periodic sides need length at least 3")
    edges = set()
    for coords in itertools.product(*(range(d) for d in dims)):
        u = box_index(coords, dims)
        for axis, d in enumerate(dims):
            step = list(coords)
            if coords[axis] + 1 < d:
                step[axis] += 1
            elif periodic:
                step[axis] = 0
            else:
                continue
            v = box_index(step, dims)
            edges.add((min(u, v), max(u, v)))
    count = 1
    for d in dims:
        count *= d
    return Graph(count, tuple(sorted(edges)))


def torus_graph(dims: Sequence[int]) -> Graph:
    return box_graph(dims, periodic=True)


def ladder_graph(n: int) -> Graph:
    """Two paths of length n - 1 joined by rungs; vertex (i, side) is 2 * i + side."""
    return product_graph(path_graph(n), path_graph(2))[0]


def product_graph(g: Graph, h: Graph) -> Tuple[Graph, VertexMap]:
    """Vertices (u, x) numbered u * |H| + x, adjacent iff they move in exactly one factor.

    Returns the product and its projection onto the first factor.
    """
    size = h.vertex_count
    edges: List[Edge] = []
    for u, v in g.edges:
        for x in range(size):
            edges.append((u * size + x, v * size + x))
    for u in range(g.vertex_count):
        for x, y in h.edges:
            edges.append((u * size + x, u * size + y))
    product = Graph(g.vertex_count * size, tuple(sorted(edges)))
    projection = VertexMap(product, g, tuple(u for u in range(g.vertex_count) for _ in range(size)))
    return product, projection


def cycle_product(g: Graph, m: int) -> Tuple[Graph, VertexMap]:
    return product_graph(g, cycle_graph(m))


def two_floor_cover(g: Graph) -> Tuple[Graph, VertexMap]:
    """g x K2: two copies of g joined vertex by vertex, projected onto g."""
    return product_graph(g, path_graph(2))


def box_projection(dims: Sequence[int]) -> VertexMap:
    """Forget the last coordinate of a box lattice."""
    dims = tuple(dims)
    if len(dims) < 2:
        raise InputError("Need at least two dimensions to project")
    big, small = box_graph(dims), box_graph(dims[:-1])
    mapping = [0] * big.vertex_count
    for coords in itertools.product(*(range(d) for d in dims)):
        mapping[box_index(coords, dims)] = box_index(coords[:-1], dims[:-1])
    return VertexMap(big, small, tuple(mapping))


def cycle_cover(n: int, k: int) -> VertexMap:
    """C_{nk} wrapped k times around C_n, i -> i mod n."""
    return VertexMap(cycle_graph(n * k), cycle_graph(n), tuple(i % n for i in range(n * k)))


def pendant_cycle_cover() -> VertexMap:
    """C6 with the paths 0-6-7 and 3-8-9, mapped onto C3 with the path 0-3-4."""
    big = Graph(10, ((0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (0, 6), (6, 7), (3, 8), (8, 9)))
    small = Graph(5, ((0, 1), (1, 2), (0, 2), (0, 3), (3, 4)))
    return VertexMap(big, small, (0, 1, 2, 0, 1, 2, 3, 4, 3, 4))


def fixture_pairs() -> Dict[str, Tuple[VertexMap, int]]:
    """Fibred graph pairs with the probe vertex used for reach comparisons."""
    box_cover = two_floor_cover(box_graph((3, 3)))[1]
    return {
        "pendant_cycle": (pendant_cycle_cover(), 0),
        "two_floor_box": (box_cover, 0),
        "box3_to_box2": (box_projection((3, 3, 3)), 0),
    }


GENERATORS = {
    "path": lambda args: path_graph(*args),
    "ray": lambda args: ray_graph(*args),
    "cycle": lambda args: cycle_graph(*args),
    "complete": lambda args: complete_graph(*args),
    "claw": lambda args: claw_graph(*args),
    "ladder": lambda args: ladder_graph(*args),
    "box": lambda args: box_graph(args),
    "torus": lambda args: torus_graph(args),
}


def graph_from_spec(spec: str) -> Graph:
    """Build a graph from "name:a,b,..." such as "box:5,5" or "cycle:6"."""
    name, _, raw = spec.partition(":")
    if name not in GENERATORS:
        raise InputError(f"Unknown graph generator {name!r}; known: {sorted(GENERATORS)}")
    try:
        args = [int(t) for t in raw.split(",")] if raw else []
    except ValueError as e:
        raise InputError(f"Bad graph arguments in {spec!r}") from e
    try:
        return GENERATORS[name](args)
    except TypeError as e:
        raise InputError(f"Wrong number of arguments in {spec!r}") from e
