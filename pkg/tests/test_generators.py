import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wardrop_electric.generators import (
    GeneratorSpec, LA_LINKS, central_link, cube_grid, double_tree, double_tree_roots, example1,
    grid_with_deletions, la_highway, random_connected_graph, random_series_parallel,
    resistor_view, ring, square_grid, wheatstone,
)
from wardrop_electric.netcore import prune, validate
from wardrop_electric.wardrop import AffineGame, GeneralGame


@pytest.mark.parametrize("side", [3, 5, 41])
def test_square_grid_counts(side):
    game = square_grid(side)
    assert game.network.node_count == side**2
    assert game.network.link_count == 2 * side * (side - 1)
    assert validate(game.network) == []
    assert prune(game.network).link_count == game.network.link_count


def test_central_link_is_horizontal_through_the_middle():
    i, j = central_link(41)
    assert (i // 41, i % 41) == (20, 20) and j == i + 1
    i, j = central_link(40)
    assert (j // 40, j % 40) == (20, 20) and j == i + 1
    with pytest.raises(ValueError):
        square_grid(2)


def test_cube_grid_counts():
    game = cube_grid(4)
    assert game.network.node_count == 64
    assert game.network.link_count == 3 * 16 * 3


def test_ring_has_two_arms_to_the_antipode():
    game = ring(10)
    assert game.network.destination == 5
    assert game.network.link_count == 10
    assert resistor_view(game).degree.tolist() == [2.0] * 10


def test_double_tree_shape():
    rn = double_tree(3)
    size = 2**4 - 1
    assert rn.node_count == 2 * size
    assert len(rn.resistor_links) == 2 * (size - 1) + 1
    assert double_tree_roots(3) == (0, size)
    assert rn.weight(0, size) == 1.0


def test_small_named_games():
    w = wheatstone()
    assert w.network.links == ((0, 1), (0, 1)) and w.b.tolist() == [1.0, 1.5]
    e = example1()
    assert e.a.tolist() == [3.0, 2.0, 1.0] and e.m == 3.0


def test_highway_topology_and_draws():
    game = la_highway()
    assert isinstance(game, GeneralGame)
    assert game.network.node_count == 17 and game.network.link_count == len(LA_LINKS) == 28
    assert prune(game.network).link_count == 28
    a = np.array([t.a for t in la_highway(seed=4).delay])
    assert np.all((0.5 <= a) & (a <= 1.5))
    assert [t.a for t in la_highway(seed=4).delay] == [t.a for t in la_highway(seed=4).delay]
    assert all(t.degree == 4 for t in game.delay)


@given(st.integers(0, 10_000), st.integers(1, 6))
@settings(max_examples=40, deadline=None)
def test_series_parallel_generator_is_deterministic_and_valid(seed, depth):
    g1, g2 = random_series_parallel(seed, depth), random_series_parallel(seed, depth)
    assert g1.network == g2.network and np.array_equal(g1.a, g2.a) and g1.m == g2.m
    assert validate(g1.network) == []
    assert not np.any(g1.b)


@given(st.integers(0, 10_000), st.integers(2, 80))
@settings(max_examples=40, deadline=None)
def test_random_graph_is_connected(seed, n):
    rn = random_connected_graph(seed, n)
    assert rn.node_count == n and rn.is_connected()
    assert len(rn.resistor_links) >= n - 1


def test_grid_deletions_keep_connectivity():
    rn = grid_with_deletions(3, 10, p=0.3)
    assert rn.is_connected()
    assert len(rn.resistor_links) == 180 - int(0.3 * 180)


def test_generator_spec():
    assert isinstance(GeneratorSpec("square_grid", {"side": 3}).build(), AffineGame)
    a = GeneratorSpec("random_series_parallel", {"depth": 3}).build(seed=5)
    b = random_series_parallel(5, 3)
    assert a.network == b.network
    auto = GeneratorSpec("la_highway", {"seed": "auto"}).build(seed=2)
    assert [t.a for t in auto.delay] == [t.a for t in la_highway(seed=2).delay]
    with pytest.raises(ValueError):
        GeneratorSpec("torus").build()
