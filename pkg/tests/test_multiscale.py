import math

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from stoqlab import multiscale as ms
from stoqlab.lattice import Region


def test_cube_points_examples():
    assert ms.cube_points(ms.Cube(0, (3, 3), 2)).points == ((3, 3),)
    assert [p[0] for p in ms.cube_points(ms.Cube(1, (0,), 1))] == [-1, 0, 1]
    assert [p[0] for p in ms.cube_points(ms.Cube(2, (1,), 1))] == [0, 1, 2, 3, 4]


def test_cover_singleton():
    r = Region.of([(4, -2)])
    for n in range(4):
        assert len(ms.minimal_cover(r, n).cubes) == 1
        assert len(ms.minimal_cover(r, n, mode="exact").cubes) == 1


def test_exact_cover_interval():
    r = Region.of([(x,) for x in range(5)])
    c = ms.minimal_cover(r, 1, mode="exact")
    assert len(c.cubes) == 2
    assert c.covers()


def test_cover_inside_one_cube():
    r = Region.of([(0, 0), (1, 1), (-1, 0)])
    assert len(ms.minimal_cover(r, 1).cubes) == 1
    assert len(ms.minimal_cover(r, 1, mode="exact").cubes) == 1


def test_unknown_cover_mode():
    with pytest.raises(ValueError):
        ms.minimal_cover(Region.of([(0,)]), 1, mode="fast")


def test_cover_graph_edges():
    r = Region.of([(0,)])
    assert ms.cover_graph(ms.minimal_cover(r, 0), 1.0, 1.0).number_of_edges() == 0
    r2 = Region.of([(0,), (2,)])
    c = ms.Cover(0, [ms.Cube(0, (0,), 1), ms.Cube(0, (2,), 1)], r2)
    assert ms.cube_distance(*c.cubes) == 2
    assert ms.cover_graph(c, 2.0, 1.0).number_of_edges() == 1
    assert ms.cover_graph(c, 1.0, 1.0).number_of_edges() == 0


def test_total_volume_examples():
    assert ms.total_volume(Region.of([(0, 0)]), 1) == 1
    # diameter 1 gives zero scales above C_0 (decision ledger), so only |C_0| = 2 counts
    assert ms.total_volume(Region.of([(0,), (1,)]), 1) == 2


@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=1, max_size=15), st.integers(1, 2))
def test_total_volume_at_least_size(pts, rr):
    r = Region.of(pts)
    assert ms.total_volume(r, rr) >= len(r)


@given(st.lists(st.tuples(st.integers(-6, 6), st.integers(-6, 6)), min_size=1, max_size=20), st.integers(0, 3))
def test_greedy_cover_covers(pts, n):
    r = Region.of(pts)
    c = ms.minimal_cover(r, n)
    assert c.covers()
    assert len(c.cubes) <= len(r)


def test_cover_connected_graph_examples():
    g = nx.Graph()
    g.add_node(0)
    assert ms.cover_connected_graph(g, 3) == [{0}]
    path = nx.path_graph(4)
    parts = ms.cover_connected_graph(path, 2)
    assert len(parts) <= 2 and all(ms.check_graph_cover(path, parts, 2).values())
    star = nx.star_graph(5)
    parts = ms.cover_connected_graph(star, 2)
    assert len(parts) <= 3 and all(ms.check_graph_cover(star, parts, 2).values())


@given(st.integers(1, 40), st.integers(1, 6), st.integers(0, 10_000))
def test_cover_connected_graph_random(n, k, seed):
    g = nx.random_labeled_tree(n, seed=seed) if hasattr(nx, "random_labeled_tree") else nx.random_tree(n, seed=seed)
    g.add_edges_from(nx.gnm_random_graph(n, n // 2, seed=seed).edges)
    parts = ms.cover_connected_graph(g, k)
    assert all(ms.check_graph_cover(g, parts, k).values())


def test_count_subordinated_examples():
    big = ms.Cover(2, [ms.Cube(2, (0, 0), 2)], Region.of([(0, 0)]))
    assert ms.count_subordinated(big, 0, 0) == 0
    # one 5x5 cube holds 25 unit cubes and 9 width-3 cubes with even-integer bounds
    assert ms.count_subordinated(big, 1, 0) == 25
    n1 = sum(1 for x in range(-2, 3) for y in range(-2, 3)
             if all(-2 <= b[0] and b[1] <= 2 for b in ms.Cube(1, (x, y), 2).bounds()))
    assert ms.count_subordinated(big, 1, 1) == n1


def test_count_subordinated_entropy_bound():
    big = ms.Cover(2, [ms.Cube(2, (0, 0), 2)], Region.of([(0, 0)]))
    c = ms.subordination_constant(2, 1)
    for v in (1, 2, 3):
        assert ms.count_subordinated(big, v, 0) <= math.exp(c * v)
