"""Local two-sided bounds on link effective resistance.

Cutting the network at hop distance ``d`` from a link (dropping farther
nodes) can only raise the link's effective resistance; shorting all farther
nodes into one supernode can only lower it. Both constructions read the
graph within ``d + 1`` hops of the link and nothing else.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .linalg import SPDSolver
from .netcore import ball_around_link
from .resistor import ResistorNet

DENSE_LIMIT = 400


@dataclass
class ResistanceBounds:
    link: tuple[int, int]
    d: int
    lower: float
    upper: float
    exact: float | None = None
    epsilon: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.upper + self.lower)


def _neighbourhood(rn: ResistorNet, l, d: int):
    i, j = l
    if d < 1:
        raise ValueError("distance must be at least 1")
    if rn.conductance[i, j] <= 0:
        raise ValueError(f"{l} is not a resistor link")
    dist = ball_around_link(rn.conductance, i, j, d + 1)
    inner = np.array(sorted(k for k, dk in dist.items() if dk <= d), dtype=int)
    has_outer = any(dk == d + 1 for dk in dist.values())
    return inner, has_outer


def _pieces(rn: ResistorNet, l, d: int):
    """Inner block and per-node conductance to the outside for link ``l``."""
    inner, has_outer = _neighbourhood(rn, l, d)
    block = rn.conductance[inner][:, inner]
    to_outer = rn.degree[inner] - np.asarray(block.sum(axis=1)).ravel()
    to_outer[np.abs(to_outer) < 1e-15 * max(1.0, rn.w_star)] = 0.0
    pi = int(np.searchsorted(inner, l[0]))
    pj = int(np.searchsorted(inner, l[1]))
    return inner, block, to_outer, has_outer, pi, pj


def _with_supernode(block: sp.csr_matrix, to_outer: np.ndarray) -> sp.csr_matrix:
    col = sp.csr_matrix(to_outer.reshape(-1, 1))
    return sp.bmat([[block, col], [col.T, None]], format="csr")


def _dense_two_point(W: np.ndarray, i: int, j: int) -> float:
    L = np.diag(W.sum(axis=1)) - W
    L = np.delete(np.delete(L, j, axis=0), j, axis=1)
    ii = i if i < j else i - 1
    rhs = np.zeros(len(L))
    rhs[ii] = 1.0
    return float(np.linalg.solve(L, rhs)[ii])


def _two_point(W: sp.spmatrix, i: int, j: int) -> float:
    """Effective resistance between ``i`` and ``j`` of a connected net."""
    n = W.shape[0]
    if n <= DENSE_LIMIT:
        return _dense_two_point(W.toarray(), i, j)
    keep = np.array([k for k in range(n) if k != j], dtype=int)
    w = np.asarray(W.sum(axis=1)).ravel()
    ii = int(np.searchsorted(keep, i))
    L = sp.csc_matrix(sp.diags(w) - W)[keep][:, keep]
    rhs = np.zeros(n - 1)
    rhs[ii] = 1.0
    return float(SPDSolver(L).solve(rhs)[ii])


def _relabel(rn: ResistorNet, inner: np.ndarray, extra: int = 0):
    pos = {int(k): p for p, k in enumerate(inner)}
    link_map = {}
    link_res = {}
    for e, (t, h) in rn.link_map.items():
        if t in pos and h in pos:
            link_map[e] = (pos[t], pos[h])
            link_res[e] = rn.link_resistance[e]
    base = rn.labels if rn.labels is not None else np.arange(rn.node_count)
    labels = np.concatenate([base[inner], -np.ones(extra, dtype=int)])
    return link_map, link_res, labels


def cut_at_distance(rn: ResistorNet, l, d: int) -> ResistorNet:
    """Network without the nodes farther than ``d`` hops from link ``l``.

    Every kept node reaches ``l`` inside the kept set, so the result is
    connected. ``labels`` maps new node indices back to ``rn``'s.
    """
    inner, block, _, _, _, _ = _pieces(rn, l, d)
    link_map, link_res, labels = _relabel(rn, inner)
    return ResistorNet(block, link_map, link_res, labels)


def short_at_distance(rn: ResistorNet, l, d: int) -> ResistorNet:
    """Network with every node farther than ``d`` hops merged into one node.

    The supernode is appended last (label ``-1``); links among merged nodes
    are dropped. When no node lies beyond ``d`` the cut network is returned.
    """
    inner, block, to_outer, has_outer, _, _ = _pieces(rn, l, d)
    if not has_outer:
        return cut_at_distance(rn, l, d)
    link_map, link_res, labels = _relabel(rn, inner, extra=1)
    return ResistorNet(_with_supernode(block, to_outer), link_map, link_res, labels)


def local_index(rn: ResistorNet, node: int) -> int:
    """Index in a carved network of the original node ``node``."""
    hits = np.flatnonzero(rn.labels == node)
    if len(hits) == 0:
        raise KeyError(node)
    return int(hits[0])


def _links_by_pair(rn: ResistorNet) -> dict:
    pairs: dict = {}
    for e in rn.link_map:
        pairs.setdefault(rn.resistor_link(e), []).append(e)
    return pairs


def resistance_bounds(rn: ResistorNet, l, d: int, exact: float | None = None, _pairs=None) -> ResistanceBounds:
    l = (min(l), max(l))
    inner, block, to_outer, has_outer, pi, pj = _pieces(rn, l, d)
    n = len(inner)
    if n < DENSE_LIMIT:
        dense = block.toarray()
        upper = _dense_two_point(dense, pi, pj)
        lower = upper
        if has_outer:
            shorted = np.zeros((n + 1, n + 1))
            shorted[:n, :n] = dense
            shorted[:n, n] = shorted[n, :n] = to_outer
            lower = _dense_two_point(shorted, pi, pj)
    else:
        upper = _two_point(block, pi, pj)
        lower = _two_point(_with_supernode(block, to_outer), pi, pj) if has_outer else upper
    pairs = _links_by_pair(rn) if _pairs is None else _pairs
    eps = {e: (upper - lower) / rn.link_resistance[e] for e in pairs.get(l, [])}
    return ResistanceBounds(l, d, lower, upper, exact, eps)


def _scan_chunk(args):
    rn, links, d, exact = args
    pairs = _links_by_pair(rn)
    return [
        resistance_bounds(rn, l, d, None if exact is None else exact.get(l), pairs)
        for l in links
    ]


def scan_all_links(rn: ResistorNet, d: int, jobs: int | None = 1, exact: dict | None = None) -> dict:
    """Bounds for every resistor link, keyed by link in sorted order.

    Each link is an independent task; with ``jobs > 1`` the links are split
    across worker processes. The result does not depend on ``jobs``.
    """
    links = rn.resistor_links
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs <= 1 or len(links) < 64:
        results = _scan_chunk((rn, links, d, exact))
    else:
        size = -(-len(links) // (4 * jobs))
        chunks = [links[k : k + size] for k in range(0, len(links), size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = [b for part in pool.map(_scan_chunk, [(rn, c, d, exact) for c in chunks]) for b in part]
    return {b.link: b for b in results}


def average_relative_gap(rn: ResistorNet, d: int, exact: dict, bounds: dict | None = None) -> float:
    """Mean over resistor links of ``(r_upper - r_lower) / r``."""
    if bounds is None:
        bounds = scan_all_links(rn, d)
    links = rn.resistor_links
    return float(np.mean([(bounds[l].upper - bounds[l].lower) / exact[l] for l in links]))
