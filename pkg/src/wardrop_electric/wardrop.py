"""Wardrop equilibria of single-commodity routing games in link-flow space.

Affine games are solved by an active-set iteration on the linear KKT
system; general (strictly increasing) delays by Frank-Wolfe with exact line
search, finished by an active-set Newton polish on the detected support.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy import integrate

from . import netcore
from .errors import (
    InconsistentMultipliers,
    NotConverged,
    NotSeriesParallel,
    SingularSystem,
)
from .linalg import SPDSolver
from .netcore import DirectedNetwork

log = logging.getLogger(__name__)

SUPPORT_RTOL = 1e-8


# --------------------------------------------------------------------------
# delay functions


@dataclass(frozen=True)
class PolynomialDelay:
    """``tau(f) = a * f**degree + b``."""

    a: float
    b: float
    degree: int = 1

    def __call__(self, f):
        return self.a * np.power(f, self.degree) + self.b

    def derivative(self, f):
        return self.degree * self.a * np.power(f, self.degree - 1)

    def primitive(self, f):
        return self.a * np.power(f, self.degree + 1) / (self.degree + 1) + self.b * f

    def improved(self, u: float) -> PolynomialDelay:
        return PolynomialDelay(self.a / (1.0 + u), self.b, self.degree)


@dataclass(frozen=True)
class ImprovedDelay:
    """Congestion part of an arbitrary delay divided by ``1 + u``."""

    base: Callable[[float], float]
    u: float

    def __call__(self, f):
        t0 = self.base(0.0)
        return t0 + (self.base(f) - t0) / (1.0 + self.u)

    def derivative(self, f):
        return _derivative(self.base, f) / (1.0 + self.u)

    def improved(self, u: float) -> ImprovedDelay:
        # (1 + u1)(1 + u2) - 1
        return ImprovedDelay(self.base, self.u + u + self.u * u)


def _derivative(func, x: float) -> float:
    if hasattr(func, "derivative"):
        return float(func.derivative(x))
    h = 1e-6 * max(1.0, abs(x))
    if x - h < 0:
        return (func(x + h) - func(x)) / h
    return (func(x + h) - func(x - h)) / (2 * h)


def _primitive(func, x: float) -> float:
    if hasattr(func, "primitive"):
        return float(func.primitive(x))
    value, _ = integrate.quad(func, 0.0, x, epsabs=1e-10)
    return value


# --------------------------------------------------------------------------
# games and equilibria


@dataclass(frozen=True)
class AffineGame:
    """Routing game with ``tau_e(f) = a_e f + b_e`` and throughput ``m``."""

    network: DirectedNetwork
    a: np.ndarray
    b: np.ndarray
    m: float

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).copy()
        b = np.asarray(self.b, dtype=float).copy()
        if a.shape != (self.network.link_count,) or b.shape != a.shape:
            raise ValueError("a and b need one entry per link")
        if np.any(a <= 0):
            raise ValueError("slopes a_e must be positive")
        if np.any(b < 0):
            raise ValueError("free-flow times b_e must be nonnegative")
        if not self.m > 0:
            raise ValueError("throughput must be positive")
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "m", float(self.m))

    @property
    def nu(self) -> np.ndarray:
        return _nu(self.network, self.m)

    def tau(self, f) -> np.ndarray:
        return self.a * np.asarray(f, dtype=float) + self.b

    def free_flow(self) -> np.ndarray:
        return self.b.copy()

    def improved(self, e: int, u: float) -> AffineGame:
        a = self.a.copy()
        a[e] = a[e] / (1.0 + u)
        return AffineGame(self.network, a, self.b, self.m)

    def as_general(self) -> GeneralGame:
        return GeneralGame(
            self.network,
            tuple(PolynomialDelay(a, b, 1) for a, b in zip(self.a, self.b)),
            self.m,
        )


@dataclass(frozen=True)
class GeneralGame:
    """Routing game with arbitrary nonnegative strictly increasing delays."""

    network: DirectedNetwork
    delay: tuple
    m: float

    def __post_init__(self):
        object.__setattr__(self, "delay", tuple(self.delay))
        object.__setattr__(self, "m", float(self.m))
        if len(self.delay) != self.network.link_count:
            raise ValueError("one delay function per link required")
        if not self.m > 0:
            raise ValueError("throughput must be positive")
        samples = np.linspace(0.0, self.m, 7)
        for e, tau in enumerate(self.delay):
            vals = np.array([tau(x) for x in samples])
            if np.any(vals < 0) or np.any(np.diff(vals) <= 0):
                raise ValueError(f"delay of link {e} is not nonnegative and strictly increasing")

    @property
    def nu(self) -> np.ndarray:
        return _nu(self.network, self.m)

    def tau(self, f) -> np.ndarray:
        return np.array([t(x) for t, x in zip(self.delay, np.asarray(f, dtype=float))])

    def tau_prime(self, f) -> np.ndarray:
        return np.array([_derivative(t, x) for t, x in zip(self.delay, f)])

    def free_flow(self) -> np.ndarray:
        return np.array([t(0.0) for t in self.delay])

    def beckmann(self, f) -> float:
        return float(sum(_primitive(t, x) for t, x in zip(self.delay, f)))

    def improved(self, e: int, u: float) -> GeneralGame:
        delays = list(self.delay)
        tau = delays[e]
        delays[e] = tau.improved(u) if hasattr(tau, "improved") else ImprovedDelay(tau, u)
        return GeneralGame(self.network, delays, self.m)


def _nu(network: DirectedNetwork, m: float) -> np.ndarray:
    nu = np.zeros(network.node_count)
    nu[network.origin] += m
    nu[network.destination] -= m
    return nu


@dataclass
class Equilibrium:
    f: np.ndarray
    gamma: np.ndarray
    lam: np.ndarray
    support_complement: frozenset = field(default_factory=frozenset)
    social_cost: float = 0.0

    @property
    def used(self) -> np.ndarray:
        """Mask of links outside the support complement."""
        mask = np.ones(len(self.f), dtype=bool)
        mask[list(self.support_complement)] = False
        return mask


# --------------------------------------------------------------------------
# shared linear-algebra pieces


def _support_component(network: DirectedNetwork, support: np.ndarray) -> np.ndarray:
    """Nodes connected to the destination through support links (undirected)."""
    n = network.node_count
    adj = [[] for _ in range(n)]
    for e in np.flatnonzero(support):
        t, h = network.links[e]
        adj[t].append(h)
        adj[h].append(t)
    seen = np.zeros(n, dtype=bool)
    seen[network.destination] = True
    stack = [network.destination]
    while stack:
        node = stack.pop()
        for nb in adj[node]:
            if not seen[nb]:
                seen[nb] = True
                stack.append(nb)
    return seen


def _affine_kkt(network: DirectedNetwork, a, b, m, support):
    """Solve the linear KKT system on ``support`` with gamma_d = 0.

    Returns ``(f, gamma, in_component)`` where ``f`` is zero off the
    support, and ``gamma`` is defined (not NaN) on nodes connected to the
    destination through support links.
    """
    support = np.asarray(support, dtype=bool)
    comp = _support_component(network, support)
    if not comp[network.origin]:
        raise SingularSystem("support does not connect origin and destination")
    tails, heads = network.tails, network.heads
    active = support & comp[tails] & comp[heads]
    nodes = np.flatnonzero(comp & (np.arange(network.node_count) != network.destination))
    index = -np.ones(network.node_count, dtype=int)
    index[nodes] = np.arange(len(nodes))

    es = np.flatnonzero(active)
    ti, hi = index[tails[es]], index[heads[es]]
    g = 1.0 / a[es]
    rows, cols, vals = [], [], []
    for r, c, w in ((ti, ti, g), (hi, hi, g), (ti, hi, -g), (hi, ti, -g)):
        ok = (r >= 0) & (c >= 0)
        rows.append(r[ok])
        cols.append(c[ok])
        vals.append(w[ok])
    Q = sp.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(nodes), len(nodes)),
    )
    rhs = np.zeros(len(nodes))
    rhs[index[network.origin]] += m
    bo = b[es] / a[es]
    np.add.at(rhs, ti[ti >= 0], bo[ti >= 0])
    np.add.at(rhs, hi[hi >= 0], -bo[hi >= 0])
    gamma = np.full(network.node_count, np.nan)
    gamma[nodes] = SPDSolver(Q).solve(rhs)
    gamma[network.destination] = 0.0
    f = np.zeros(network.link_count)
    f[es] = (gamma[tails[es]] - gamma[heads[es]] - b[es]) / a[es]
    return f, gamma, comp


def node_potentials(network: DirectedNetwork, costs: np.ndarray) -> np.ndarray:
    """Cheapest cost from each node to the destination (``inf`` if none)."""
    n = network.node_count
    incoming = [[] for _ in range(n)]
    for e, (t, h) in enumerate(network.links):
        incoming[h].append((t, costs[e]))
    dist = np.full(n, np.inf)
    dist[network.destination] = 0.0
    heap = [(0.0, network.destination)]
    while heap:
        dval, node = heapq.heappop(heap)
        if dval > dist[node]:
            continue
        for t, c in incoming[node]:
            nd = dval + c
            if nd < dist[t]:
                dist[t] = nd
                heapq.heappush(heap, (nd, t))
    return dist


def _all_or_nothing(network: DirectedNetwork, costs: np.ndarray, m: float) -> np.ndarray:
    """Put the whole throughput on one cheapest origin-destination path."""
    n = network.node_count
    outgoing = [[] for _ in range(n)]
    for e, (t, h) in enumerate(network.links):
        outgoing[t].append((h, e))
    dist = np.full(n, np.inf)
    pred = -np.ones(n, dtype=int)
    dist[network.origin] = 0.0
    heap = [(0.0, network.origin)]
    while heap:
        dval, node = heapq.heappop(heap)
        if dval > dist[node]:
            continue
        for h, e in outgoing[node]:
            nd = dval + costs[e]
            if nd < dist[h]:
                dist[h] = nd
                pred[h] = e
                heapq.heappush(heap, (nd, h))
    s = np.zeros(network.link_count)
    node = network.destination
    while node != network.origin:
        e = pred[node]
        s[e] = m
        node = network.links[e][0]
    return s


def _multipliers(network, tau_f, gamma):
    gamma = np.where(np.isfinite(gamma), gamma, 0.0)
    return tau_f + gamma[network.heads] - gamma[network.tails], gamma


def _complement(f, lam, m, lam_scale):
    eps_f = SUPPORT_RTOL * m
    eps_l = SUPPORT_RTOL * max(1.0, lam_scale)
    return frozenset(int(e) for e in np.flatnonzero((f < eps_f) & (lam > eps_l)))


# --------------------------------------------------------------------------
# solvers


def solve_affine(game: AffineGame) -> Equilibrium:
    """Active-set solve of the affine KKT system.

    Starts from the full link set; while some flow is negative, the most
    negative link leaves the support. Once flows are nonnegative, a link
    outside the support with negative multiplier re-enters. Falls back to
    :func:`solve_convex` after ``E**2`` iterations or on a singular system.
    """
    net = game.network
    E = net.link_count
    m = game.m
    support = np.ones(E, dtype=bool)
    neg_tol = 1e-12 * max(1.0, m)
    try:
        for _ in range(max(E * E, 1)):
            f, gamma, comp = _affine_kkt(net, game.a, game.b, m, support)
            fs = np.where(support, f, np.inf)
            worst = int(np.argmin(fs))
            if fs[worst] < -neg_tol:
                support[worst] = False
                continue
            f = np.clip(f, 0.0, None)
            tau_f = game.tau(f)
            pot = node_potentials(net, tau_f)
            gamma = np.where(comp, gamma, pot)
            lam, gamma = _multipliers(net, tau_f, gamma)
            lam[support] = 0.0
            lam_tol = 1e-10 * max(1.0, abs(gamma[net.origin]))
            out = np.where(~support, lam, np.inf)
            worst = int(np.argmin(out))
            if out[worst] < -lam_tol:
                support[worst] = True
                continue
            lam = np.clip(lam, 0.0, None)
            break
        else:
            log.warning("active set did not settle; falling back to convex solver")
            return solve_convex(game.as_general())
    except SingularSystem:
        log.warning("singular KKT system on candidate support; falling back to convex solver")
        return solve_convex(game.as_general())
    C = float(f @ tau_f)
    return Equilibrium(f, gamma, lam, _complement(f, lam, m, gamma[net.origin]), C)


def _line_search(game, f, direction) -> float:
    """Exact step on the Beckmann objective by bisection on its derivative."""

    def slope(t):
        return float(game.tau(f + t * direction) @ direction)

    if slope(1.0) <= 0:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if slope(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-15:
            break
    return 0.5 * (lo + hi)


def _relative_gap(game, f) -> float:
    costs = game.tau(f)
    s = _all_or_nothing(game.network, costs, game.m)
    total = float(costs @ f)
    return float(costs @ (f - s)) / max(total, 1e-300)


def _newton_polish(game: GeneralGame, f: np.ndarray, max_iter: int = 200):
    """Active-set Newton started from the support of ``f``; ``None`` if singular.

    Each step solves the affine KKT system of the linearized delays on the
    current support. Links whose target flow turns negative are dropped;
    once the step stalls, an excluded link whose reduced cost is negative
    re-enters.
    """
    net, m = game.network, game.m
    support = f > SUPPORT_RTOL * m
    x = np.where(support, f, 0.0)
    for _ in range(max_iter):
        d = game.tau_prime(x)
        slope = np.where(support & (d > 0), d, np.maximum(d, 1e-12 * max(1.0, float(d.max(initial=0.0)))))
        offset = game.tau(x) - slope * x
        try:
            target, gamma_s, comp = _affine_kkt(net, slope, offset, m, support)
        except SingularSystem:
            return None
        step = target - x
        # longest feasible step: stop where the first link runs dry
        neg = np.flatnonzero(support & (step < 0))
        t_feas, blocking = 1.0, None
        if len(neg):
            ratios = -x[neg] / step[neg]
            k = int(np.argmin(ratios))
            if ratios[k] < 1.0:
                t_feas, blocking = float(ratios[k]), int(neg[k])
        obj = game.beckmann(x)
        t = t_feas
        while t > 1e-10 and game.beckmann(x + t * step) > obj + 1e-14 * max(1.0, abs(obj)):
            t *= 0.5
        x = x + t * step
        if blocking is not None and t == t_feas:
            x[blocking] = 0.0
            support[blocking] = False
            continue
        if np.max(np.abs(t * step)) <= 1e-11 * max(1.0, m):
            # reduced costs from the support's own potentials; shortest-path
            # potentials would make every excluded link look nonnegative
            tau_x = game.tau(x)
            gamma = np.where(comp, gamma_s, node_potentials(net, tau_x))
            reduced = tau_x + gamma[net.heads] - gamma[net.tails]
            reduced = np.where(support | ~np.isfinite(reduced), np.inf, reduced)
            worst = int(np.argmin(reduced))
            if reduced[worst] < -1e-11 * max(1.0, abs(float(gamma[net.origin]))):
                support[worst] = True
                continue
            break
    # the caller checks the equilibrium gap, so a stalled iterate is still useful
    return np.clip(x, 0.0, None)


def solve_convex(
    game,
    tol: float = 1e-10,
    max_iter: int = 20_000,
    initial: np.ndarray | None = None,
    polish_every: int = 25,
) -> Equilibrium:
    """Frank-Wolfe on the Beckmann potential with a Newton finish.

    Convergence is certified by the relative Frank-Wolfe duality gap
    ``tau(f).(f - s) / tau(f).f`` where ``s`` is the all-or-nothing flow
    at current costs.
    """
    if isinstance(game, AffineGame):
        game = game.as_general()
    net, m = game.network, game.m
    if initial is None:
        f = _all_or_nothing(net, game.free_flow(), m)
    else:
        f = np.asarray(initial, dtype=float).copy()
    gap = np.inf
    for it in range(1, max_iter + 1):
        costs = game.tau(f)
        s = _all_or_nothing(net, costs, m)
        total = float(costs @ f)
        gap = float(costs @ (f - s)) / max(total, 1e-300)
        if gap <= tol:
            break
        if it % polish_every == 0 or gap < 1e-4:
            polished = _newton_polish(game, f)
            if polished is not None and _relative_gap(game, polished) <= tol:
                f = polished
                gap = _relative_gap(game, f)
                break
        step = _line_search(game, f, s - f)
        f = f + step * (s - f)
    else:
        raise NotConverged(f"Frank-Wolfe relative gap {gap:.3e} > {tol:.1e} after {max_iter} iterations")
    tau_f = game.tau(f)
    gamma = node_potentials(net, tau_f)
    lam, gamma = _multipliers(net, tau_f, gamma)
    lam = np.clip(lam, 0.0, None)
    C = float(f @ tau_f)
    return Equilibrium(f, gamma, lam, _complement(f, lam, m, gamma[net.origin]), C)


# --------------------------------------------------------------------------
# diagnostics


def social_cost(eq: Equilibrium, game, rtol: float = 1e-8) -> float:
    """Total travel time, checked against ``m (gamma_o - gamma_d)``."""
    net = game.network
    direct = float(eq.f @ game.tau(eq.f))
    via_gamma = game.m * (eq.gamma[net.origin] - eq.gamma[net.destination])
    if abs(direct - via_gamma) > 10 * rtol * max(1.0, abs(direct)):
        raise InconsistentMultipliers(f"sum f tau(f) = {direct!r} but m*(gamma_o - gamma_d) = {via_gamma!r}")
    return direct


def kkt_residual(eq: Equilibrium, game) -> float:
    net = game.network
    f, lam = np.asarray(eq.f, float), np.asarray(eq.lam, float)
    gamma = np.where(np.isfinite(eq.gamma), eq.gamma, 0.0)
    stationarity = game.tau(f) + gamma[net.heads] - gamma[net.tails] - lam
    conservation = game.nu - netcore.incidence(net) @ f
    parts = [
        np.abs(stationarity),
        np.abs(conservation),
        np.abs(lam * f),
        np.clip(-lam, 0.0, None),
        np.clip(-f, 0.0, None),
    ]
    return float(max(np.max(p, initial=0.0) for p in parts))


def min_throughput(game: AffineGame) -> tuple[np.ndarray, float]:
    """Per-link throughput above which that link's flow is nonnegative.

    Uses the full-support closed form ``(b_e - a_e [K Q^-1 K^T b]_e) /
    delta_v_e`` with ``delta_v`` the voltage drop under unit injection.
    Returns ``(per_link, overall)`` with ``overall = max(0, max per_link)``.
    """
    net = game.network
    if not netcore.is_series_parallel(net):
        raise NotSeriesParallel("throughput threshold is only guaranteed on series-parallel networks")
    E = net.link_count
    if not np.any(game.b):
        return np.zeros(E), 0.0
    support = np.ones(E, dtype=bool)
    # unit injection with b = 0 gives the voltages v/m
    _, v_unit, _ = _affine_kkt(net, game.a, np.zeros(E), 1.0, support)
    # zero throughput with the free-flow terms gives Q^-1 K^T b
    _, z, _ = _affine_kkt(net, game.a, game.b, 0.0, support)
    dv = v_unit[net.tails] - v_unit[net.heads]
    dz = z[net.tails] - z[net.heads]
    per_link = (game.b - dz) / dv
    return per_link, max(0.0, float(np.max(per_link)))


__all__ = [
    "AffineGame",
    "GeneralGame",
    "Equilibrium",
    "PolynomialDelay",
    "ImprovedDelay",
    "solve_affine",
    "solve_convex",
    "social_cost",
    "kkt_residual",
    "min_throughput",
    "node_potentials",
]
