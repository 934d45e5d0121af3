import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from wardrop_electric.errors import Disconnected, ZeroFlowLink
from wardrop_electric.generators import example1, la_highway, random_connected_graph, random_series_parallel
from wardrop_electric.resistor import (
    ResistorNet, effective_resistance, effective_resistances, from_affine, from_nonlinear,
    greens_function, solve_voltage, spanning_tree_centrality,
)
from wardrop_electric.wardrop import solve_affine, solve_convex


def test_example1_network_aggregates_parallel_links():
    rn = from_affine(example1())
    W = rn.conductance.toarray()
    assert W[0, 1] == pytest.approx(1 / 3 + 1 / 2)
    assert W[1, 2] == pytest.approx(1.0)
    assert rn.resistor_link(0) == rn.resistor_link(1) == (0, 1)


def test_voltage_currents_reproduce_affine_equilibrium_with_zero_offsets():
    # with b = 0 the equilibrium flow is the electrical current
    game = random_series_parallel(11, 4)
    eq = solve_affine(game)
    rn = from_affine(game)
    volt = solve_voltage(rn, 0, 1, game.m)
    np.testing.assert_allclose([volt.y[e] for e in range(game.network.link_count)], eq.f, atol=1e-10)


@given(st.integers(0, 10_000), st.integers(3, 7))
@settings(max_examples=25, deadline=None)
def test_resistance_matches_spanning_tree_count(seed, n):
    rn = random_connected_graph(seed, n, extra=min(3, n))
    i, j = rn.resistor_links[seed % len(rn.resistor_links)]
    assert effective_resistance(rn, (i, j)) == pytest.approx(oracles.spanning_tree_resistance(rn.conductance, i, j), rel=1e-10)


@given(st.integers(0, 10_000), st.integers(3, 40))
@settings(max_examples=25, deadline=None)
def test_batched_resistances_match_pseudo_inverse(seed, n):
    rn = random_connected_graph(seed, n)
    exact = effective_resistances(rn, block=7)
    for l in rn.resistor_links[:10]:
        assert exact[l] == pytest.approx(oracles.pinv_resistance(rn.conductance, *l), rel=1e-9)


@given(st.integers(0, 10_000), st.integers(3, 30))
@settings(max_examples=25, deadline=None)
def test_centrality_lies_in_unit_interval_and_sums_to_n_minus_one(seed, n):
    rn = random_connected_graph(seed, n)
    exact = effective_resistances(rn)
    shares = [exact[l] * rn.weight(*l) for l in rn.resistor_links]
    assert all(0 < s <= 1 + 1e-12 for s in shares)
    assert sum(shares) == pytest.approx(n - 1)   # Foster's theorem


def test_spanning_tree_centrality_is_one_on_bridges():
    game = example1()
    rn = from_affine(game)
    assert spanning_tree_centrality(rn, 2) == pytest.approx(1.0)
    assert spanning_tree_centrality(rn, 0) == pytest.approx(1.2 / 3)


def test_greens_function_matches_power_series():
    rn = random_connected_graph(5, 8)
    G = greens_function(rn, 3)
    ref, keep = oracles.truncated_green(rn.conductance, 3)
    np.testing.assert_allclose(G[np.ix_(keep, keep)], ref, atol=1e-8)
    assert not G[3].any() and not G[:, 3].any()


def test_nonlinear_surrogate_uses_flow_over_delay():
    game = la_highway(m=4.0, seed=0)
    eq = solve_convex(game)
    rn = from_nonlinear(eq, game)
    tau = game.tau(eq.f)
    for e, r in rn.link_resistance.items():
        assert r == pytest.approx(tau[e] / eq.f[e])


def test_nonlinear_surrogate_rejects_zero_flow_links():
    game = la_highway(m=4.0, seed=0)
    eq = solve_convex(game)
    eq.f[5] = 0.0
    with pytest.raises(ZeroFlowLink):
        from_nonlinear(eq, game, links=[5])


def test_disconnected_pairs_raise():
    W = sp.csr_matrix(np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 2], [0, 0, 2, 0]], float))
    rn = ResistorNet(W)
    with pytest.raises(Disconnected):
        effective_resistance(rn, (0, 3))
    with pytest.raises(Disconnected):
        greens_function(rn, 0)


def test_invalid_conductance_rejected():
    with pytest.raises(ValueError):
        ResistorNet(sp.csr_matrix(np.array([[0, 1], [2, 0]], float)))
    with pytest.raises(ValueError):
        ResistorNet(sp.csr_matrix(np.array([[0, -1], [-1, 0]], float)))
