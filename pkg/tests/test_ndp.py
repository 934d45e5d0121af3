import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wardrop_electric.errors import Degenerate, LinkUnsupported
from wardrop_electric.generators import example1, la_highway, random_series_parallel, square_grid, wheatstone
from wardrop_electric.localres import ResistanceBounds, resistance_bounds
from wardrop_electric.ndp import (
    Intervention, InterventionCostModel, LinearCost, algorithm1, algorithm1_nonlinear,
    check_assumption1, coarse_error_bound, delta_cost_derivative, delta_cost_electrical,
    delta_cost_exact, electrical_gain, electrical_sweep, error_bound, exact_sweep,
    optimize_single_link, ranking,
)
from wardrop_electric.resistor import effective_resistances, from_affine, solve_voltage
from wardrop_electric.wardrop import Equilibrium, solve_affine


def corrected_example1(u, a1=3.0, a2=2.0, a3=1.0, m=3.0):
    return (
        m**2 * a1 * a2**2 * u / ((a1 + a2) * (a1 + (1 + u) * a2)),
        m**2 * a1**2 * a2 * u / ((a1 + a2) * ((1 + u) * a1 + a2)),
        a3 * m**2 * u / (1 + u),
    )


@pytest.mark.parametrize("u", [0.25, 0.5, 1.0, 2.0, 4.0, 8.0])
def test_example1_exact_drops(u):
    game = example1()
    eq = solve_affine(game)
    got = [delta_cost_exact(game, Intervention(e, u), eq)[0] for e in range(3)]
    np.testing.assert_allclose(got, corrected_example1(u), rtol=1e-10)


def test_example1_electrical_values():
    game = example1()
    eq = solve_affine(game)
    rn = from_affine(game)
    volt = solve_voltage(rn, 0, 2, game.m)
    r = effective_resistances(rn)
    gains = [delta_cost_electrical(game, eq, volt, r[rn.resistor_link(e)], Intervention(e, 1.0)) for e in range(3)]
    np.testing.assert_allclose(gains, [108 / 35, 4.05, 4.5], rtol=1e-12)
    derivs = [delta_cost_derivative(game, eq, volt, e) for e in range(3)]
    np.testing.assert_allclose(derivs, [4.32, 6.48, 9.0], rtol=1e-12)


def test_electrical_gain_limits():
    assert electrical_gain(2.0, 1.0, 1.0, 0.5, 0.0) == 0.0
    # u -> infinity: a f y / (r / a)
    assert electrical_gain(2.0, 1.5, 1.5, 0.5, 1e12) == pytest.approx(2 * 1.5 * 1.5 * 4, rel=1e-9)


@given(st.integers(0, 10_000), st.integers(2, 5), st.floats(0.05, 20))
@settings(max_examples=30, deadline=None)
def test_closed_form_is_exact_without_offsets(seed, depth, u):
    game = random_series_parallel(seed, depth)
    eq = solve_affine(game)
    rn = from_affine(game)
    volt = solve_voltage(rn, 0, 1, game.m)
    r = effective_resistances(rn)
    for e in range(game.network.link_count):
        exact, changed = delta_cost_exact(game, Intervention(e, u), eq)
        assert not changed
        approx = delta_cost_electrical(game, eq, volt, r[rn.resistor_link(e)], Intervention(e, u))
        assert approx == pytest.approx(exact, rel=1e-8, abs=1e-10)


@given(st.integers(0, 10_000), st.integers(2, 4), st.floats(0.05, 20), st.integers(1, 3))
@settings(max_examples=30, deadline=None)
def test_error_bounds_hold_and_coarse_is_looser(seed, depth, u, d):
    game = random_series_parallel(seed, depth)
    eq = solve_affine(game)
    rn = from_affine(game)
    volt = solve_voltage(rn, 0, 1, game.m)
    for e in range(game.network.link_count):
        b = resistance_bounds(rn, rn.resistor_link(e), d)
        a, f, y = float(game.a[e]), float(eq.f[e]), volt.y[e]
        rel, floor = error_bound(a, f, y, u, b, rn.w_star)
        exact = delta_cost_exact(game, Intervention(e, u), eq)[0]
        approx = delta_cost_electrical(game, eq, volt, b, Intervention(e, u))
        assert abs(exact - approx) / exact <= rel + 1e-9
        assert exact >= floor * (1 - 1e-9)
        assert coarse_error_bound(a, u, b, rn.w_star) >= rel - 1e-15


def test_unused_links_rejected_or_zero():
    game = wheatstone(b=(1.0, 3.0))
    eq = solve_affine(game)
    rn = from_affine(game, eq.support_complement)
    volt = solve_voltage(rn, 0, 1, game.m)
    with pytest.raises(LinkUnsupported):
        delta_cost_electrical(game, eq, volt, 1.0, Intervention(1, 1.0))
    assert delta_cost_derivative(game, eq, volt, 1) == 0.0
    # scaling the slope of an idle link never lowers its offset, so it stays idle
    assert check_assumption1(game, Intervention(1, 50.0), eq)


def test_assumption1_fails_when_improvement_empties_a_link():
    game = wheatstone()
    eq = solve_affine(game)
    assert check_assumption1(game, Intervention(0, 0.5), eq)
    assert not check_assumption1(game, Intervention(0, 2.0), eq)


def test_degenerate_link_detected():
    game = wheatstone(b=(1.0, 2.0))   # link 2 sits exactly at the threshold
    eq = solve_affine(game)
    rn = from_affine(game)
    volt = solve_voltage(rn, 0, 1, game.m)
    with pytest.raises(Degenerate):
        delta_cost_derivative(game, eq, volt, 0)


def test_cost_model_validation():
    with pytest.raises(ValueError):
        InterventionCostModel(alpha=-1.0)
    with pytest.raises(ValueError):
        InterventionCostModel(h=lambda u: u + 1.0)
    model = InterventionCostModel(alpha=1.0, h={2: LinearCost(5.0)})
    assert model.cost_for(2)(1.0) == 5.0 and model.cost_for(0)(1.0) == 1.0


def test_single_link_optimum_linear_cost():
    b = ResistanceBounds((0, 1), 1, 0.5, 0.5)
    model = InterventionCostModel(alpha=1.0, h=LinearCost(1.0), u_max=100.0)
    # K = a f y = 4, k = r / a = 0.5: u* = (sqrt(K / alpha c) - 1) / k = 2
    assert optimize_single_link(0, 2.0, 2.0, 1.0, b, model) == pytest.approx(2.0)
    assert optimize_single_link(0, 0.5, 0.5, 1.0, b, model) == 0.0
    assert optimize_single_link(0, 2.0, 2.0, 1.0, b, InterventionCostModel(u_max=7.0)) == 7.0


def test_single_link_optimum_nonlinear_cost_beats_grid():
    b = ResistanceBounds((0, 1), 1, 0.4, 0.6)
    model = InterventionCostModel(alpha=0.3, h=lambda u: u**2, u_max=10.0)
    u = optimize_single_link(0, 2.0, 2.0, 1.0, b, model)

    def obj(v):
        return electrical_gain(1.0, 2.0, 2.0, 0.5, v) - 0.3 * v**2

    grid = np.linspace(0, 10, 20001)
    assert obj(u) >= max(obj(v) for v in grid) - 1e-9


def test_algorithm1_on_example1():
    game = example1()
    assert algorithm1(game, InterventionCostModel(u_max=10.0), None).chosen_link == 1
    assert algorithm1(game, InterventionCostModel(u_max=0.5), None).chosen_link == 2
    res = algorithm1(game, InterventionCostModel(alpha=1.0, u_max=10.0), 1)
    assert not res.approximate
    assert len(res.per_link_table) == 3
    best = max(res.per_link_table, key=lambda row: row.objective)
    assert res.chosen_link == best.link and res.objective == pytest.approx(best.objective)


def test_algorithm1_local_bounds_on_grid():
    game = square_grid(11)
    res = algorithm1(game, InterventionCostModel(alpha=0.5, u_max=20.0), 3)
    assert res.chosen_link is not None
    assert all(row.r_lower <= row.r_upper for row in res.per_link_table)


def test_nonlinear_pipeline_is_flagged_approximate():
    game = la_highway(m=4.0, seed=1)
    res = algorithm1_nonlinear(game, InterventionCostModel(u_max=3.0), 2)
    assert res.approximate
    assert res.chosen_link is not None


def test_sweeps_and_ranking():
    game = example1()
    approx = electrical_sweep(game, 0.5)
    exact = exact_sweep(game, 0.5)
    assert ranking(exact) == ranking(approx) == [2, 1, 0]
    assert ranking({0: 1.0, 1: 1.0, 2: 0.5}) == [0, 1, 2]
