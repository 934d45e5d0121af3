import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from wardrop_electric.errors import Unreachable
from wardrop_electric.generators import double_tree, double_tree_roots, random_connected_graph, resistor_view, ring, square_grid, central_link
from wardrop_electric.localres import local_index, resistance_bounds, short_at_distance
from wardrop_electric.resistor import ResistorNet, effective_resistances
from wardrop_electric.walks import (
    HittingQuery, double_tree_lower_closed_form, double_tree_lower_recursion, gap_rhs, hit_before,
    hitting_probabilities, return_escape, shell, term1, term2,
)
import scipy.sparse as sp


def triangle():
    W = np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]], float)
    return ResistorNet(sp.csr_matrix(W))


def test_query_validation():
    with pytest.raises(ValueError):
        HittingQuery(0, [1], [1])
    with pytest.raises(ValueError):
        HittingQuery(0, [], [])
    assert HittingQuery(0, 3, [4, 5]).target_b == frozenset({4, 5})


def test_triangle_escape_probability():
    # step to j directly (1/2) or via k, which then hits j first half the time
    assert return_escape(triangle(), 0, 1) == pytest.approx(0.75)
    assert hit_before(triangle(), HittingQuery(2, [0], [1])) == pytest.approx(0.5)


@given(st.integers(0, 10_000), st.integers(4, 25))
@settings(max_examples=25, deadline=None)
def test_hitting_probabilities_match_value_iteration(seed, n):
    rn = random_connected_graph(seed, n)
    A, B = [0, n - 1], [1]
    h = hitting_probabilities(rn, A, B)
    np.testing.assert_allclose(h, oracles.value_iteration_hit(rn.conductance, A, B), atol=1e-9)


@given(st.integers(0, 10_000), st.integers(3, 30))
@settings(max_examples=25, deadline=None)
def test_escape_probability_identity(seed, n):
    rn = random_connected_graph(seed, n)
    exact = effective_resistances(rn)
    for i, j in rn.resistor_links[:6]:
        assert 1 / (rn.degree[i] * return_escape(rn, i, j)) == pytest.approx(exact[(i, j)], rel=1e-9)


def test_unreachable_targets():
    W = sp.csr_matrix(np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], float))
    rn = ResistorNet(W)
    assert np.isnan(hitting_probabilities(rn, [2], [3])[0])
    with pytest.raises(Unreachable):
        hit_before(rn, HittingQuery(0, [2], [3]))
    with pytest.raises(Unreachable):
        return_escape(rn, 0, 2)


@pytest.mark.parametrize("d", range(1, 11))
def test_shorted_ring_shell_probabilities(d):
    # gambler's ruin on the loop i - arm - s - arm - j of 2d+2 unit steps
    n = 24
    rn = resistor_view(ring(n))
    s = short_at_distance(rn, (0, 1), d)
    h = hitting_probabilities(s, [local_index(s, 0)], [local_index(s, 1)])
    assert h[local_index(s, n - d)] == pytest.approx((d + 2) / (2 * d + 2), abs=1e-12)
    assert h[local_index(s, 1 + d)] == pytest.approx(d / (2 * d + 2), abs=1e-12)


def test_ring_terms_closed_forms():
    rn = resistor_view(ring(24))
    for d in (1, 2, 3, 5):
        assert term1(rn, (0, 1), d) == pytest.approx(1 / (d + 1))
        assert term2(rn, (0, 1), d) == pytest.approx(d / (2 * d + 2))
        assert sorted(shell(rn, (0, 1), d).tolist()) == [1 + d, 24 - d]


@given(st.integers(0, 10_000), st.integers(4, 25), st.integers(1, 3))
@settings(max_examples=30, deadline=None)
def test_gap_rhs_bounds_gap(seed, n, d):
    rn = random_connected_graph(seed, n)
    for l in rn.resistor_links[:6]:
        assert resistance_bounds(rn, l, d).gap <= gap_rhs(rn, l, d) + 1e-10


def test_grid_terms_shrink_with_distance():
    rn = resistor_view(square_grid(31))
    l = central_link(31)
    t1 = [term1(rn, l, d) for d in (1, 3, 6)]
    t2 = [term2(rn, l, d) for d in (1, 3, 6)]
    assert t1[0] > t1[1] > t1[2]
    assert t2[0] > t2[1] > t2[2]


def test_double_tree_terms_do_not_vanish():
    rn = double_tree(9)
    l = double_tree_roots(9)
    assert all(term1(rn, l, d) > 0.45 for d in (2, 4, 6))


def test_double_tree_lower_forms_agree():
    for d in range(1, 15):
        assert double_tree_lower_recursion(d) == pytest.approx(double_tree_lower_closed_form(d), rel=1e-14)
    assert double_tree_lower_closed_form(1) == pytest.approx(3 / 5)
    assert 1 - double_tree_lower_closed_form(40) == pytest.approx(1 / 3)


def test_empty_shell_gives_zero():
    rn = triangle()
    assert term1(rn, (0, 1), 3) == 0.0
    assert gap_rhs(rn, (0, 1), 3) == 0.0


def test_terms_do_not_depend_on_truncation_radius():
    small, large = resistor_view(square_grid(41)), resistor_view(square_grid(81))
    for d in (2, 5):
        for f in (term1, term2):
            assert f(small, central_link(41), d) == pytest.approx(f(large, central_link(81), d), abs=1e-6)
    t_small, t_large = double_tree(9), double_tree(12)
    for d in (2, 4):
        assert term1(t_small, double_tree_roots(9), d) == pytest.approx(term1(t_large, double_tree_roots(12), d), abs=1e-6)
