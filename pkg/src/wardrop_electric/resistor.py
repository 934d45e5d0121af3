"""Associated resistor networks: construction, voltages, effective resistance."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import Disconnected, ZeroFlowLink
from .linalg import SPDSolver, laplacian
from .wardrop import SUPPORT_RTOL, AffineGame, Equilibrium, GeneralGame


@dataclass(frozen=True, eq=False)
class ResistorNet:
    """Undirected weighted graph given by a symmetric conductance matrix.

    ``link_map`` sends a transport link id to its oriented endpoints
    ``(tail, head)`` and ``link_resistance`` to the resistance that link
    contributes (``a_e``, or a surrogate for nonlinear games). ``labels``
    records original node ids when the net was carved out of a bigger one
    (``-1`` marks a shorted supernode).
    """

    conductance: sp.csr_matrix
    link_map: dict = field(default_factory=dict)
    link_resistance: dict = field(default_factory=dict)
    labels: np.ndarray | None = None

    def __post_init__(self):
        W = sp.csr_matrix(self.conductance, dtype=float)
        W.eliminate_zeros()
        W.sort_indices()
        if W.shape[0] != W.shape[1]:
            raise ValueError("conductance matrix must be square")
        if W.nnz and (W.data < 0).any():
            raise ValueError("conductances must be nonnegative")
        if W.diagonal().any():
            raise ValueError("conductance matrix must have a zero diagonal")
        if abs(W - W.T).max() > 1e-12 * max(1.0, abs(W).max() if W.nnz else 1.0):
            raise ValueError("conductance matrix must be symmetric")
        object.__setattr__(self, "conductance", W)

    @property
    def node_count(self) -> int:
        return self.conductance.shape[0]

    @cached_property
    def degree(self) -> np.ndarray:
        return np.asarray(self.conductance.sum(axis=1)).ravel()

    @property
    def w_star(self) -> float:
        return float(self.degree.max())

    @cached_property
    def resistor_links(self) -> list[tuple[int, int]]:
        upper = sp.triu(self.conductance, k=1).tocoo()
        return sorted(zip(upper.row.tolist(), upper.col.tolist()))

    @cached_property
    def laplacian(self) -> sp.csr_matrix:
        return laplacian(self.conductance)

    def weight(self, i: int, j: int) -> float:
        return float(self.conductance[i, j])

    def resistor_link(self, e: int) -> tuple[int, int]:
        """M(e): unordered endpoints of transport link ``e`` as a sorted pair."""
        t, h = self.link_map[e]
        return (t, h) if t < h else (h, t)

    @cached_property
    def components(self) -> np.ndarray:
        _, labels = connected_components(self.conductance, directed=False)
        return labels

    def is_connected(self) -> bool:
        return len(set(self.components.tolist())) <= 1


def from_conductance(W, labels=None) -> ResistorNet:
    return ResistorNet(sp.csr_matrix(W), labels=None if labels is None else np.asarray(labels))


def _aggregate(node_count, entries) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for t, h, g in entries:
        rows += [t, h]
        cols += [h, t]
        vals += [g, g]
    return sp.csr_matrix((vals, (rows, cols)), shape=(node_count, node_count))


def from_affine(game: AffineGame, support_complement=frozenset()) -> ResistorNet:
    """Conductance ``W_ij = sum 1/a_e`` over in-scope links between i and j."""
    net = game.network
    excluded = set(support_complement)
    keep = [e for e in range(net.link_count) if e not in excluded]
    entries = [(*net.links[e], 1.0 / game.a[e]) for e in keep]
    rn = ResistorNet(
        _aggregate(net.node_count, entries),
        {e: net.links[e] for e in keep},
        {e: float(game.a[e]) for e in keep},
    )
    comp = rn.components
    if comp[net.origin] != comp[net.destination]:
        raise Disconnected("in-scope links do not connect origin and destination")
    return rn


def from_nonlinear(eq: Equilibrium, game: GeneralGame, links=None) -> ResistorNet:
    """Conductance ``f_e / tau_e(f_e)`` aggregated over links carrying flow.

    ``links`` defaults to every link with flow above the support tolerance;
    passing a zero-flow link explicitly raises :class:`ZeroFlowLink`.
    """
    net = game.network
    f = np.asarray(eq.f, dtype=float)
    eps = SUPPORT_RTOL * game.m
    if links is None:
        links = [e for e in range(net.link_count) if f[e] > eps]
    else:
        bad = [e for e in links if f[e] <= eps]
        if bad:
            raise ZeroFlowLink(f"links {bad} carry no flow")
    tau = game.tau(f)
    surrogate = {e: float(tau[e] / f[e]) for e in links}
    entries = [(*net.links[e], 1.0 / surrogate[e]) for e in links]
    rn = ResistorNet(
        _aggregate(net.node_count, entries),
        {e: net.links[e] for e in links},
        surrogate,
    )
    comp = rn.components
    if comp[net.origin] != comp[net.destination]:
        raise Disconnected("flow-carrying links do not connect origin and destination")
    return rn


@dataclass
class VoltageSolution:
    v: np.ndarray
    y: dict
    injected: tuple

    def drop(self, rn: ResistorNet, e: int) -> float:
        t, h = rn.link_map[e]
        return float(self.v[t] - self.v[h])


def _component_solve(rn: ResistorNet, source: int, sink: int, current: float) -> np.ndarray:
    comp = rn.components
    if comp[source] != comp[sink]:
        raise Disconnected(f"nodes {source} and {sink} are not connected")
    nodes = np.flatnonzero(comp == comp[sink])
    nodes = nodes[nodes != sink]
    v = np.zeros(rn.node_count)
    if len(nodes) == 0:
        return v
    L = rn.laplacian[nodes][:, nodes]
    rhs = np.zeros(len(nodes))
    rhs[np.searchsorted(nodes, source)] = current
    v[nodes] = SPDSolver(L).solve(rhs)
    return v


def solve_voltage(rn: ResistorNet, source: int, sink: int, current: float) -> VoltageSolution:
    """Potentials for ``current`` injected at ``source`` and drawn at ``sink``.

    The sink is grounded; nodes in other components are left at zero.
    Currents are reported per transport link via Ohm's law, so parallel
    links split the current in proportion to their conductance.
    """
    if not current > 0:
        raise ValueError("injected current must be positive")
    v = _component_solve(rn, source, sink, current)
    y = {e: float((v[t] - v[h]) / rn.link_resistance[e]) for e, (t, h) in rn.link_map.items()}
    return VoltageSolution(v, y, (source, sink, float(current)))


def effective_resistance(rn: ResistorNet, l) -> float:
    i, j = l
    if i == j:
        return 0.0
    v = _component_solve(rn, i, j, 1.0)
    return float(v[i] - v[j])


def effective_resistances(rn: ResistorNet, links=None, block: int = 256) -> dict:
    """Exact resistance of many node pairs from one factorization per component."""
    links = rn.resistor_links if links is None else [tuple(l) for l in links]
    comp = rn.components
    out = {}
    by_comp: dict[int, list] = {}
    for l in links:
        i, j = l
        if comp[i] != comp[j]:
            raise Disconnected(f"nodes {i} and {j} are not connected")
        by_comp.setdefault(int(comp[i]), []).append(l)
    for c, pairs in by_comp.items():
        nodes = np.flatnonzero(comp == c)
        ground = nodes[-1]
        inner = nodes[:-1]
        pos = -np.ones(rn.node_count, dtype=int)
        pos[inner] = np.arange(len(inner))
        solver = SPDSolver(rn.laplacian[inner][:, inner])
        for start in range(0, len(pairs), block):
            chunk = pairs[start : start + block]
            rhs = np.zeros((len(inner), len(chunk)))
            for k, (i, j) in enumerate(chunk):
                if i != ground:
                    rhs[pos[i], k] += 1.0
                if j != ground:
                    rhs[pos[j], k] -= 1.0
            x = solver.solve(rhs)
            if x.ndim == 1:
                x = x[:, None]
            for k, (i, j) in enumerate(chunk):
                xi = x[pos[i], k] if i != ground else 0.0
                xj = x[pos[j], k] if j != ground else 0.0
                out[(i, j)] = float(xi - xj)
    return out


def spanning_tree_centrality(rn: ResistorNet, e: int, a_e: float | None = None) -> float:
    """``r_{M(e)} / a_e``: share of spanning trees that use transport link ``e``."""
    if a_e is None:
        a_e = rn.link_resistance[e]
    return effective_resistance(rn, rn.resistor_link(e)) / a_e


def greens_function(rn: ResistorNet, killed: int) -> np.ndarray:
    """Green's function of the jump chain killed at ``killed``.

    ``(I - kP)^-1 = L_k^-1 diag(w)`` on the remaining nodes, embedded in an
    N x N matrix with zero row and column at ``killed``. Columns come from
    linear solves against the factorized grounded Laplacian.
    """
    if not rn.is_connected():
        raise Disconnected("Green's function needs a connected network")
    n = rn.node_count
    keep = np.array([k for k in range(n) if k != killed], dtype=int)
    G = np.zeros((n, n))
    if len(keep) == 0:
        return G
    solver = SPDSolver(rn.laplacian[keep][:, keep])
    w = rn.degree[keep]
    block = 512
    for start in range(0, len(keep), block):
        cols = np.arange(start, min(start + block, len(keep)))
        rhs = np.zeros((len(keep), len(cols)))
        rhs[cols, np.arange(len(cols))] = w[cols]
        x = solver.solve(rhs)
        if x.ndim == 1:
            x = x[:, None]
        G[np.ix_(keep, keep[cols])] = x
    return G
