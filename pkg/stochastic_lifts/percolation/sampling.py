"""Seeded percolation samples and open clusters."""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, Set, Union

import numpy as np

from ..core.measure import FiniteMeasure, Space
from ..errors import InputError
from .graph import Graph, VertexMap

logger = logging.getLogger(__name__)

Probability = Union[Fraction, float]


class Mode(str, Enum):
    BOND = "bond"
    SITE = "site"


def draw_rng(seed: int, draw: int, stream: int = 0) -> np.random.Generator:
    """Generator for one draw, derived from (seed, draw, stream) only."""
    return np.random.default_rng(np.random.SeedSequence([seed, draw, stream]))


@dataclass(frozen=True)
class PercSample:
    """Open edges (bond mode) or open vertices (site mode) of one draw."""
    graph: Graph
    mode: Mode
    open: np.ndarray = field(compare=False, repr=False)
    p: Probability
    seed: int
    draw: int

    def __post_init__(self):
        expected = self.graph.edge_count if self.mode == Mode.BOND else self.graph.vertex_count
        if len(self.open) != expected:
            raise InputError(f"{self.mode.value} sample has {len(self.open)} entries, expected {expected}")

    def is_open(self, index: int) -> bool:
        return bool(self.open[index])


def _check_probability(p: Probability) -> None:
    if not 0 <= p <= 1:
        raise InputError(f"Probability out of range: {p}")


def uniforms(size: int, seed: int, draw: int, stream: int = 0) -> np.ndarray:
    """The uniforms behind a draw; thresholding them at p couples samples across p."""
    return draw_rng(seed, draw, stream).random(size)


def sample_percolation(g: Graph, mode: Union[Mode, str], p: Probability, seed: int, draw: int) -> PercSample:
    """Open each edge or vertex independently with probability p.

    The sample is a deterministic function of (seed, draw); for fixed seed
    and draw, raising p only opens more elements.
    """
    mode = Mode(mode)
    _check_probability(p)
    size = g.edge_count if mode == Mode.BOND else g.vertex_count
    opened = uniforms(size, seed, draw) < float(p)
    return PercSample(g, mode, opened, p, seed, draw)


def cluster_of(sample: PercSample, v: int) -> Set[int]:
    """Vertices joined to v by open edges (bond) or open vertices (site)."""
    g = sample.graph
    g.neighbours(v)
    if sample.mode == Mode.SITE and not sample.is_open(v):
        return set()
    seen, stack = {v}, [v]
    while stack:
        u = stack.pop()
        for w in g.neighbours(u):
            if w in seen:
                continue
            if sample.mode == Mode.BOND:
                passable = sample.is_open(g.edge_id(u, w))
            else:
                passable = sample.is_open(w)
            if passable:
                seen.add(w)
                stack.append(w)
    return seen


def _pair_fibres(vm: VertexMap):
    fibres = vm.fibres
    for v, fibre in enumerate(fibres):
        if len(fibre) != 2:
            raise InputError(f"Fibre of {v} has {len(fibre)} vertices, expected 2")
    return fibres


def fibre_selection_sample(vm: VertexMap, seed: int, draw: int = 0) -> PercSample:
    """Keep exactly one vertex of each two-element fibre, chosen uniformly and independently."""
    fibres = _pair_fibres(vm)
    picks = draw_rng(seed, draw).integers(0, 2, size=len(fibres))
    opened = np.zeros(vm.source.vertex_count, dtype=bool)
    for fibre, pick in zip(fibres, picks):
        opened[fibre[int(pick)]] = True
    return PercSample(vm.source, Mode.SITE, opened, Fraction(1, 2), seed, draw)


def fibre_selection_law(vm: VertexMap) -> FiniteMeasure:
    """Exact law of the kept-vertex indicator vector."""
    fibres = _pair_fibres(vm)
    share = Fraction(1, 2 ** len(fibres))
    weights: Dict = {}
    for picks in itertools.product((0, 1), repeat=len(fibres)):
        x = [0] * vm.source.vertex_count
        for fibre, pick in zip(fibres, picks):
            x[fibre[pick]] = 1
        weights[tuple(x)] = share
    return FiniteMeasure(Space(vm.source.vertex_count, 1), weights)
