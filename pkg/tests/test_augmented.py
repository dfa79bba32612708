"""Tests for subdivided cells, augmented clusters, boundary relations and the delta search."""

from fractions import Fraction

import numpy as np
import pytest

from stochastic_lifts.augmented.cells import (
    audit_cells,
    build_cells,
    cell_fixtures,
    centre_table,
    maximal_separated,
    subdivide,
)
from stochastic_lifts.augmented.clusters import augmented_cluster, open_closure
from stochastic_lifts.augmented.comparison import compare_pc_aug, max_degree_power, s_p
from stochastic_lifts.augmented.exploration import CellSample, explore, explore_sample, sample_cells
from stochastic_lifts.augmented.relations import (
    Variant,
    boundary_relation,
    canonical,
    mass_bound,
    max_delta,
    refines,
    relation_blocks,
    relation_counts,
    relation_distribution,
    relation_dominates,
)
from stochastic_lifts.core.measure import point_mass
from stochastic_lifts.errors import InputError, PreconditionError, SizeLimitError
from stochastic_lifts.percolation.generators import box_graph, cycle_graph, graph_from_spec, path_graph
from stochastic_lifts.percolation.graph import Graph

HALF = Fraction(1, 2)


@pytest.fixture(scope="module")
def pendant():
    """Cells around 0, 3 and 8; boundaries (10, 13, 16), (10, 13) and (16,)."""
    return cell_fixtures()["pendant"].build()


@pytest.fixture(scope="module")
def ring():
    return cell_fixtures()["torus12"].build()


def open_except(cd, closed, y):
    """Every edge of the subdivided graph open but the given (u, v) pairs."""
    x_open = np.ones(cd.base.edge_count, dtype=bool)
    for u, v in closed:
        x_open[cd.base.edge_id(u, v)] = False
    return CellSample(x_open, np.array(y, dtype=bool))


class TestCells:
    """Test suite for subdivision and cell decompositions."""

    def test_subdivide(self):
        """Test the vertex and edge counts of subdivided graphs."""
        assert subdivide(path_graph(2)).graph == Graph(3, ((0, 2), (1, 2)))
        hexagon = subdivide(cycle_graph(3)).graph
        assert (hexagon.vertex_count, hexagon.edge_count, hexagon.max_degree) == (6, 6, 2)
        box = box_graph((3, 3))
        sub = subdivide(box)
        assert sub.graph.vertex_count == box.vertex_count + box.edge_count
        assert sub.graph.edge_count == 2 * box.edge_count
        assert sub.edge_of(sub.midpoint(4)) == box.edges[4]

    def test_maximal_separated(self):
        """Test the greedy separated set."""
        assert maximal_separated(path_graph(5), 3) == [0, 3]
        assert maximal_separated(path_graph(4), 1) == [0, 1, 2, 3]
        with pytest.raises(InputError):
            maximal_separated(path_graph(4), 0)

    def test_pendant_layout(self, pendant):
        """Test the cells of the pendant fixture."""
        assert pendant.centres == (0, 3, 8)
        assert [cell.boundary for cell in pendant.cells] == [(10, 13, 16), (10, 13), (16,)]
        assert [len(cell.edges) for cell in pendant.cells] == [9, 6, 3]
        assert (pendant.r, pendant.R) == (2, 5)
        assert not pendant.clipped

    def test_box_corners_are_clipped(self):
        """Test four corner centres on a 5x5 box."""
        cd = build_cells(graph_from_spec("box:5,5"), 1, centres=[0, 4, 20, 24])
        assert len(cd.cells) == 4
        assert cd.clipped == frozenset({0, 4, 20, 24})
        assert sum(len(cell.edges) for cell in cd.cells) == cd.base.edge_count
        assert audit_cells(cd) == []

    def test_single_vertex(self):
        """Test the decomposition of a graph without edges."""
        cd = build_cells(Graph(1, ()), 1)
        assert len(cd.cells) == 1
        assert cd.cells[0].edges == ()

    def test_close_centres_refused(self):
        """Test that explicit centres must be separated."""
        with pytest.raises(InputError) as exc_info:
            build_cells(cycle_graph(6), 1, centres=[0, 1])
        assert "distance 1" in str(exc_info.value)

    @pytest.mark.parametrize("spec", ["path:9", "cycle:7", "ladder:6", "box:4,4", "torus:5,5"])
    @pytest.mark.parametrize("r0", [1, 2])
    def test_audit_passes(self, spec, r0):
        """Test the decomposition invariants on generated graphs."""
        cd = build_cells(graph_from_spec(spec), r0)
        assert audit_cells(cd) == []
        assert sum(len(cell.edges) for cell in cd.cells) == cd.base.edge_count

    def test_centre_table(self, pendant):
        """Test the per-vertex assignment rows."""
        rows = centre_table(pendant)
        assert len(rows) == pendant.base.vertex_count
        assert rows[16] == {"vertex": 16, "midpoint": True, "centres": [0, 8], "boundary": True}
        assert rows[0]["centres"] == [0]
        assert pendant.to_dict()["R"] == 5


class TestAugmentedCluster:
    """Test suite for the closure under open edges and cell absorption."""

    def test_absorption_is_one_sided(self, pendant):
        """Test that 16 joins the cluster of 10 while 10 stays out of the cluster of 16."""
        sample = open_except(pendant, [(1, 10), (6, 16)], [1, 0, 0])
        from_10 = augmented_cluster(pendant, sample.x_open, sample.y, {10})
        from_16 = augmented_cluster(pendant, sample.x_open, sample.y, {16})
        assert pendant.cells[0].vertices <= from_10
        assert 16 in from_10
        assert 10 not in from_16

    def test_no_cells_means_open_cluster(self, ring):
        """Test that with every Y bit off the closure is the open cluster."""
        for seed in range(20):
            sample = sample_cells(ring, HALF, 0, seed)
            assert augmented_cluster(ring, sample.x_open, sample.y, {1}) == open_closure(ring, sample.x_open, {1})

    def test_all_open(self, pendant):
        """Test that all open edges give the whole graph."""
        sample = open_except(pendant, [], [0, 0, 0])
        assert augmented_cluster(pendant, sample.x_open, sample.y, {0}) == set(range(pendant.base.vertex_count))

    @pytest.mark.parametrize("seed", range(30))
    def test_monotone(self, ring, seed):
        """Test that more open edges, more Y bits and more sources never shrink the cluster."""
        low = sample_cells(ring, Fraction(2, 5), Fraction(3, 10), seed)
        high = sample_cells(ring, Fraction(3, 5), Fraction(7, 10), seed)
        assert np.all(high.x_open >= low.x_open) and np.all(high.y >= low.y)
        small = augmented_cluster(ring, low.x_open, low.y, {1})
        large = augmented_cluster(ring, high.x_open, high.y, {1, 20})
        assert small <= large

    def test_sample_size_checked(self, pendant):
        """Test that samples of the wrong length are refused."""
        with pytest.raises(InputError):
            augmented_cluster(pendant, np.ones(3, dtype=bool), np.zeros(3, dtype=bool), {0})


class TestRelations:
    """Test suite for boundary relations and their exact laws."""

    def test_partition_helpers(self):
        """Test canonical labels, refinement and blocks."""
        assert canonical((5, 5, 2)) == (0, 0, 1)
        assert refines((0, 1, 2), (0, 0, 1))
        assert not refines((0, 0, 1), (0, 1, 2))
        assert relation_blocks((0, 1, 0), (10, 13, 16)) == [[10, 16], [13]]

    def test_boundary_relation(self, pendant):
        """Test the plain partition and its augmented collapse."""
        cell = pendant.cells[0]
        closed = np.zeros(pendant.base.edge_count, dtype=bool)
        assert boundary_relation(pendant, cell, closed, True, (10,), "plain") == (0, 1, 2)
        sample = open_except(pendant, [(1, 10), (6, 16)], [1, 0, 0])
        assert boundary_relation(pendant, cell, sample.x_open, True, (10,), Variant.AUGMENTED) == (0, 1, 2)
        assert boundary_relation(pendant, cell, sample.x_open, True, (10, 13), Variant.AUGMENTED) == (0, 0, 0)
        assert boundary_relation(pendant, cell, sample.x_open, False, (10, 13), Variant.AUGMENTED) == (0, 1, 2)

    def test_path_cell_law(self, pendant):
        """Test that both ends of a six-edge path are joined with probability p^6."""
        law = relation_distribution(pendant, pendant.cells[1], HALF, 0, (), "plain")
        assert law[(0, 0)] == Fraction(1, 64)
        assert law[(0, 1)] == Fraction(63, 64)

    def test_extreme_p(self, pendant):
        """Test point masses at p = 0 and p = 1."""
        cell = pendant.cells[0]
        assert relation_distribution(pendant, cell, 1, 0, (), "plain") == point_mass((0, 0, 0), 2)
        assert relation_distribution(pendant, cell, 0, 0, (), "plain") == point_mass((0, 1, 2), 2)

    def test_sources_checked(self, pendant):
        """Test that sources must sit on the boundary, and exist in the augmented variant."""
        with pytest.raises(PreconditionError):
            relation_distribution(pendant, pendant.cells[1], HALF, 1, (), "augmented")
        with pytest.raises(PreconditionError):
            relation_distribution(pendant, pendant.cells[1], HALF, 1, (11,), "plain")

    def test_configuration_cap(self, pendant):
        """Test the enumeration cap."""
        with pytest.raises(SizeLimitError):
            relation_counts(pendant, pendant.cells[1], cap=4)

    def test_counts_law_range(self, pendant):
        """Test that the counts refuse parameters outside [0, 1]."""
        with pytest.raises(InputError):
            relation_counts(pendant, pendant.cells[1]).law(Fraction(3, 2))

    @pytest.mark.parametrize("name", ["ring6", "torus12", "pendant"])
    def test_augmented_dominates_plain(self, name):
        """Test that at equal p the augmented law sits above the plain one in every cell."""
        cd = cell_fixtures()[name].build()
        for cell in cd.cells:
            sources = cell.boundary[:1]
            plain = relation_distribution(cd, cell, HALF, 0, sources, "plain")
            assert relation_dominates(plain, plain)
            if sources:
                assert relation_dominates(plain, relation_distribution(cd, cell, HALF, HALF, sources, "augmented"))

    def test_large_step_not_dominated(self, pendant):
        """Test that fully open edges are not dominated by the augmented path cell at 1/2."""
        counts = relation_counts(pendant, pendant.cells[1], (10,))
        assert not relation_dominates(counts.law(1), counts.law(HALF, 1, "augmented"))


class TestMaxDelta:
    """Test suite for the certified delta."""

    @pytest.mark.parametrize("name", ["ring6", "torus12", "pendant"])
    @pytest.mark.parametrize("p", [Fraction(1, 4), HALF, Fraction(3, 4)])
    def test_positive_on_fixture_cells(self, name, p):
        """Test that a positive step is certified in every fixture cell."""
        cd = cell_fixtures()[name].build()
        for cell in cd.cells:
            if cell.boundary:
                assert max_delta(cd, cell, p, 1) > 0

    def test_zero_without_cells(self, pendant):
        """Test that no step is certified when s = 0 on a crossing cell."""
        assert max_delta(pendant, pendant.cells[1], HALF, 0) == 0

    def test_reuses_counts(self, pendant):
        """Test that precomputed counts give the same step."""
        cell = pendant.cells[1]
        counts = relation_counts(pendant, cell, (10,))
        assert max_delta(pendant, cell, HALF, HALF, (10,), counts=counts) == max_delta(pendant, cell, HALF, HALF, (10,))

    def test_mass_bound(self, pendant):
        """Test the mass of the augmented event in the worst configuration."""
        assert mass_bound(pendant.cells[1], 1, HALF) == Fraction(1, 64)


class TestExploration:
    """Test suite for the cell-by-cell exploration."""

    def test_sources_are_frozen(self, pendant):
        """Test that a cell keeps the relation computed against the cluster at its reveal."""
        sample = open_except(pendant, [(1, 10), (6, 16)], [1, 0, 0])
        trace = explore_sample(pendant, 10, sample, "augmented")
        assert trace.revealed == [0, 1]
        assert trace.frozen_sources[0] == (10,)
        assert trace.relations[0] == (0, 1, 2)
        assert trace.cluster == {10, 13}
        assert 16 in augmented_cluster(pendant, sample.x_open, sample.y, {10})

    def test_all_closed(self, pendant):
        """Test that nothing is added when every edge is closed."""
        assert explore(pendant, 10, 0, 0, seed=1) == {10}

    def test_start_must_be_boundary(self, pendant):
        """Test that a centre is refused as start vertex."""
        with pytest.raises(InputError):
            explore(pendant, 0, HALF, 0, seed=1)

    @pytest.mark.parametrize("name", ["torus12", "pendant"])
    def test_plain_matches_cluster(self, name):
        """Test the plain exploration against the open cluster on the boundary."""
        cd = cell_fixtures()[name].build()
        v0 = min(cd.boundary_vertices)
        for seed in range(200):
            sample = sample_cells(cd, HALF, 0, seed)
            expected = open_closure(cd, sample.x_open, {v0}) & cd.boundary_vertices
            assert explore_sample(cd, v0, sample).cluster == expected

    @pytest.mark.parametrize("name", ["torus12", "pendant"])
    def test_augmented_inside_cluster(self, name):
        """Test that the augmented exploration stays inside the augmented cluster."""
        cd = cell_fixtures()[name].build()
        v0 = min(cd.boundary_vertices)
        for seed in range(200):
            sample = sample_cells(cd, Fraction(3, 5), HALF, seed)
            found = explore_sample(cd, v0, sample, "augmented").cluster
            assert found <= augmented_cluster(cd, sample.x_open, sample.y, {v0}) & cd.boundary_vertices

    @pytest.mark.slow
    def test_oracles_thousand_seeds(self, ring):
        """Test both oracle cross-checks over a thousand seeds."""
        v0 = min(ring.boundary_vertices)
        for seed in range(1000):
            sample = sample_cells(ring, HALF, HALF, seed)
            assert explore_sample(ring, v0, sample).cluster == open_closure(ring, sample.x_open, {v0}) & ring.boundary_vertices
            found = explore_sample(ring, v0, sample, "augmented").cluster
            assert found <= augmented_cluster(ring, sample.x_open, sample.y, {v0})


class TestComparison:
    """Test suite for the Monte Carlo reach comparison."""

    def test_s_p(self):
        """Test p^(M + c)."""
        assert s_p(HALF, 16, 4) == Fraction(1, 2 ** 20)
        assert max_degree_power(cycle_graph(5), 3) == 8

    def test_no_cells_equals_plain(self):
        """Test that s = 0 reproduces the plain curve on shared draws."""
        g0 = cell_fixtures()["ring6"].graph
        result = compare_pc_aug(g0, 1, [Fraction(2, 5), Fraction(4, 5)], 0, radius=3, trials=300, seed=4)
        for row in result.rows:
            assert row.plain == row.augmented
            assert row.coupled_violations == 0
        assert result.holds

    def test_augmented_never_below(self):
        """Test coupled monotonicity on the one-dimensional torus."""
        g0 = cell_fixtures()["torus12"].graph
        result = compare_pc_aug(g0, 1, [Fraction(3, 4)], 1, radius=6, trials=400, seed=11)
        row = result.rows[0]
        assert row.coupled_violations == 0
        assert row.augmented["mean"] >= row.plain["mean"]
        assert result.M == 2 ** 5
        assert "3/4" in result.s_p

    def test_needs_trials(self):
        """Test that zero trials are refused."""
        with pytest.raises(InputError):
            compare_pc_aug(cycle_graph(6), 1, [HALF], 1, radius=2, trials=0, seed=0)

    @pytest.mark.slow
    def test_gap_on_torus(self):
        """Test that full cells lift the reach curve by more than three combined errors."""
        g0 = cell_fixtures()["torus12"].graph
        result = compare_pc_aug(g0, 1, [Fraction(17, 20)], 1, radius=8, trials=10000, seed=11, jobs=2)
        assert result.rows[0].gap_in_errors > 3
