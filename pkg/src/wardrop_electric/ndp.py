"""Single-link network design: where to improve one link, and by how much.

An intervention ``u`` on link ``e`` divides its congestion slope by
``1 + u``. For affine games whose equilibrium support does not move, the
resulting drop in social cost has the closed form

    dC = a_e f_e y_e / (1/u + r_e / a_e)

where ``y`` is the current through the associated resistor network when
``m`` units are pushed from origin to destination and ``r_e`` is the
effective resistance across the link. Algorithm 1 replaces ``r_e`` by the
midpoint of local cut/short bounds.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import Degenerate, LinkUnsupported
from .localres import ResistanceBounds, scan_all_links
from .resistor import (
    ResistorNet,
    VoltageSolution,
    effective_resistances,
    from_affine,
    from_nonlinear,
    solve_voltage,
)
from .wardrop import (
    SUPPORT_RTOL,
    AffineGame,
    Equilibrium,
    GeneralGame,
    solve_affine,
    solve_convex,
)

log = logging.getLogger(__name__)

TIE_RTOL = 1e-12


@dataclass(frozen=True)
class Intervention:
    link: int
    magnitude: float

    def __post_init__(self):
        if not self.magnitude >= 0:
            raise ValueError("intervention magnitude must be nonnegative")


@dataclass(frozen=True)
class LinearCost:
    """``h(u) = c u``."""

    c: float = 1.0

    def __post_init__(self):
        if self.c < 0:
            raise ValueError("linear cost coefficient must be nonnegative")

    def __call__(self, u):
        return self.c * u


@dataclass
class InterventionCostModel:
    """Trade-off ``alpha`` and intervention costs ``h_e``.

    ``h`` is one callable shared by every link, or a mapping from link id
    to callable (links not listed fall back to ``default``).
    """

    alpha: float = 0.0
    h: Callable | dict = field(default_factory=LinearCost)
    u_max: float = 100.0
    default: Callable = field(default_factory=LinearCost)

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if not self.u_max > 0:
            raise ValueError("u_max must be positive")
        funcs = self.h.values() if isinstance(self.h, dict) else [self.h]
        grid = np.linspace(0.0, self.u_max, 33)
        for func in [*funcs, self.default]:
            vals = np.array([func(x) for x in grid])
            if abs(vals[0]) > 0:
                raise ValueError("intervention cost must vanish at u = 0")
            if np.any(np.diff(vals) < -1e-12 * max(1.0, np.abs(vals).max())):
                raise ValueError("intervention cost must be nondecreasing")

    def cost_for(self, e: int) -> Callable:
        if isinstance(self.h, dict):
            return self.h.get(e, self.default)
        return self.h


# --------------------------------------------------------------------------
# closed forms


def electrical_gain(a_e: float, f_e: float, y_e: float, r_e: float, u: float) -> float:
    """``a f y / (1/u + r/a)``, written to stay finite at ``u = 0``."""
    if u == 0:
        return 0.0
    return float(a_e * f_e * y_e * u / (1.0 + u * r_e / a_e))


def _r_value(r) -> float:
    if isinstance(r, ResistanceBounds):
        return r.midpoint
    return float(r)


def _slope(game, eq: Equilibrium, e: int) -> float:
    if isinstance(game, AffineGame):
        return float(game.a[e])
    f = float(eq.f[e])
    return float(game.tau(eq.f)[e] / f)


def delta_cost_electrical(game, eq: Equilibrium, volt: VoltageSolution, r_e, iv: Intervention) -> float:
    """Cost drop predicted by the resistor network for intervention ``iv``.

    ``r_e`` is an exact resistance or a :class:`ResistanceBounds` (midpoint
    used). For general games the slope is the surrogate ``tau(f)/f``.
    """
    e = iv.link
    if e in eq.support_complement:
        raise LinkUnsupported(f"link {e} carries no flow at equilibrium")
    if iv.magnitude == 0:
        return 0.0
    return electrical_gain(_slope(game, eq, e), float(eq.f[e]), volt.y[e], _r_value(r_e), iv.magnitude)


def _solve(game, initial=None) -> Equilibrium:
    if isinstance(game, AffineGame):
        return solve_affine(game)
    return solve_convex(game, initial=initial)


def delta_cost_exact(game, iv: Intervention, eq: Equilibrium | None = None) -> tuple[float, bool]:
    """``C(0) - C(u)`` by re-solving the equilibrium, plus whether the
    set of unused links changed."""
    if eq is None:
        eq = _solve(game)
    if iv.magnitude == 0:
        return 0.0, False
    after = _solve(game.improved(iv.link, iv.magnitude), initial=eq.f)
    return eq.social_cost - after.social_cost, after.support_complement != eq.support_complement


def check_assumption1(game, iv: Intervention, eq: Equilibrium | None = None) -> bool:
    """True when the intervention leaves the set of unused links unchanged."""
    return not delta_cost_exact(game, iv, eq)[1]


def delta_cost_derivative(game, eq: Equilibrium, volt: VoltageSolution, e: int) -> float:
    """Slope of the cost drop at ``u = 0``: ``a_e f_e y_e``, or 0 on unused links."""
    f, lam = np.asarray(eq.f), np.asarray(eq.lam)
    f_tol = SUPPORT_RTOL * game.m
    lam_tol = 1e-8 * max(1.0, float(np.nanmax(np.abs(eq.gamma))))
    degenerate = np.flatnonzero((f <= f_tol) & (lam <= lam_tol))
    if len(degenerate):
        raise Degenerate(f"links {degenerate.tolist()} have zero flow and zero multiplier")
    if lam[e] > lam_tol:
        return 0.0
    return float(_slope(game, eq, e) * f[e] * volt.y[e])


def error_bound(a_e: float, f_e: float, y_e: float, u_e: float, bounds: ResistanceBounds, w_star: float):
    """Guaranteed relative accuracy of the midpoint estimate, and a floor on
    the true gain.

    Returns ``(relative_bound, gain_floor)``.
    """
    if not u_e > 0:
        raise ValueError("error bound needs a positive intervention")
    eps = (bounds.upper - bounds.lower) / a_e
    relative = eps / (2.0 * (1.0 / u_e + (bounds.upper + bounds.lower) / (2.0 * a_e)))
    floor = a_e * f_e * y_e * u_e / (1.0 + u_e * bounds.upper / a_e)
    return float(relative), float(floor)


def coarse_error_bound(a_e: float, u_e: float, bounds: ResistanceBounds, w_star: float) -> float:
    """Looser relative bound that only needs the maximum degree."""
    eps = (bounds.upper - bounds.lower) / a_e
    return float(eps / (2.0 * (1.0 / u_e + 1.0 / (w_star * a_e))))


# --------------------------------------------------------------------------
# choosing u for one link


def optimize_single_link(e: int, f_e: float, y_e: float, a_e: float, bounds, model: InterventionCostModel) -> float:
    """Maximize ``a f y / (1/u + r/a) - alpha h_e(u)`` over ``[0, u_max]``.

    With linear ``h`` the stationary point is explicit; otherwise a bounded
    scalar search is run and compared against the two endpoints.
    """
    r = _r_value(bounds)
    K = a_e * f_e * y_e
    k = r / a_e
    h = model.cost_for(e)
    if K <= 0:
        return 0.0
    if model.alpha == 0:
        return float(model.u_max)
    if isinstance(h, LinearCost):
        ac = model.alpha * h.c
        if ac == 0:
            return float(model.u_max)
        if K <= ac:
            return 0.0
        return float(min(model.u_max, (np.sqrt(K / ac) - 1.0) / k))

    def objective(u):
        return K * u / (1.0 + k * u) - model.alpha * h(u)

    res = minimize_scalar(lambda u: -objective(u), bounds=(0.0, model.u_max), method="bounded",
                          options={"xatol": 1e-8})
    candidates = [0.0, float(res.x), float(model.u_max)]
    values = [objective(u) for u in candidates]
    return candidates[int(np.argmax(values))]


# --------------------------------------------------------------------------
# Algorithm 1


@dataclass
class LinkEstimate:
    link: int
    tail: int
    head: int
    flow: float
    current: float
    slope: float
    r_lower: float
    r_upper: float
    u_opt: float
    gain: float
    objective: float
    relative_bound: float
    gain_floor: float
    supported: bool = True
    assumption_ok: bool | None = None


@dataclass
class NdpResult:
    chosen_link: int | None
    chosen_magnitude: float
    objective: float
    per_link_table: list
    approximate: bool = False


def _resistance_table(rn: ResistorNet, d: int | None, jobs: int) -> dict:
    if d is None:
        exact = effective_resistances(rn)
        return {l: ResistanceBounds(l, 0, r, r, r) for l, r in exact.items()}
    return scan_all_links(rn, d, jobs=jobs)


def _pipeline(game, eq: Equilibrium, rn: ResistorNet, model, d, jobs, check, approximate) -> NdpResult:
    net = game.network
    volt = solve_voltage(rn, net.origin, net.destination, game.m)
    table = _resistance_table(rn, d, jobs)
    rows = []
    best, best_val = None, -np.inf
    for e in range(net.link_count):
        t, h = net.links[e]
        if e not in rn.link_map:
            rows.append(LinkEstimate(e, t, h, float(eq.f[e]), 0.0, float("nan"), float("nan"),
                                     float("nan"), 0.0, 0.0, 0.0, 0.0, 0.0, supported=False))
            continue
        a_e = rn.link_resistance[e]
        f_e = float(eq.f[e])
        y_e = volt.y[e]
        bounds = table[rn.resistor_link(e)]
        u = optimize_single_link(e, f_e, y_e, a_e, bounds, model)
        gain = electrical_gain(a_e, f_e, y_e, bounds.midpoint, u)
        obj = gain - model.alpha * model.cost_for(e)(u)
        rel, floor = error_bound(a_e, f_e, y_e, u, bounds, rn.w_star) if u > 0 else (0.0, 0.0)
        ok = check_assumption1(game, Intervention(e, u), eq) if check and u > 0 else None
        rows.append(LinkEstimate(e, t, h, f_e, y_e, a_e, bounds.lower, bounds.upper, u, gain, obj,
                                 rel, floor, True, ok))
        if best is None or obj > best_val + TIE_RTOL * max(1.0, abs(best_val)):
            best, best_val = e, obj
    chosen = rows[best] if best is not None else None
    return NdpResult(
        best,
        chosen.u_opt if chosen else 0.0,
        float(best_val) if chosen else 0.0,
        rows,
        approximate,
    )


def algorithm1(
    game: AffineGame,
    model: InterventionCostModel,
    d: int | None,
    jobs: int = 1,
    check_assumption: bool = False,
    eq: Equilibrium | None = None,
) -> NdpResult:
    """Pick the link and magnitude with the best estimated net gain.

    ``d=None`` uses exact effective resistances instead of local bounds.
    Unused links are reported with zero gain and never chosen.
    """
    if eq is None:
        eq = solve_affine(game)
    rn = from_affine(game, eq.support_complement)
    return _pipeline(game, eq, rn, model, d, jobs, check_assumption, approximate=False)


def algorithm1_nonlinear(
    game: GeneralGame,
    model: InterventionCostModel,
    d: int | None,
    jobs: int = 1,
    eq: Equilibrium | None = None,
) -> NdpResult:
    """Same pipeline on the surrogate network ``W = f / tau(f)``.

    Slopes are replaced by ``tau(f)/f``; links without flow are left out.
    The output is a heuristic estimate and is flagged as approximate.
    """
    if isinstance(game, AffineGame):
        game = game.as_general()
    if eq is None:
        eq = solve_convex(game)
    rn = from_nonlinear(eq, game)
    return _pipeline(game, eq, rn, model, d, jobs, False, approximate=True)


# --------------------------------------------------------------------------
# fixed-magnitude sweeps


def electrical_sweep(game, u: float, d: int | None = None, eq: Equilibrium | None = None, jobs: int = 1) -> dict:
    """Estimated cost drop of ``u`` on each link (unused links map to 0)."""
    if eq is None:
        eq = _solve(game)
    if isinstance(game, AffineGame):
        rn = from_affine(game, eq.support_complement)
    else:
        rn = from_nonlinear(eq, game)
    volt = solve_voltage(rn, game.network.origin, game.network.destination, game.m)
    table = _resistance_table(rn, d, jobs)
    out = {}
    for e in range(game.network.link_count):
        if e not in rn.link_map:
            out[e] = 0.0
            continue
        out[e] = electrical_gain(rn.link_resistance[e], float(eq.f[e]), volt.y[e],
                                 table[rn.resistor_link(e)].midpoint, u)
    return out


def exact_sweep(game, u: float, eq: Equilibrium | None = None) -> dict:
    """Cost drop of ``u`` on each link by re-solving the equilibrium."""
    if eq is None:
        eq = _solve(game)
    return {e: delta_cost_exact(game, Intervention(e, u), eq)[0] for e in range(game.network.link_count)}


def ranking(gains: dict) -> list[int]:
    """Links sorted by decreasing gain, ties toward the smaller id."""
    return sorted(gains, key=lambda e: (-gains[e], e))
