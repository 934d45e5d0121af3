"""Random-walk quantities on resistor networks.

Everything is computed on the jump chain ``P = diag(w)^-1 W``. Its hitting
probabilities coincide with those of the continuous-time chain with rates
``W``, so holding times never enter. No sampling: each probability is the
solution of an absorbing-boundary linear system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Unreachable
from .linalg import SPDSolver
from .localres import cut_at_distance, local_index, short_at_distance
from .netcore import hop_distance_from_link
from .resistor import ResistorNet


@dataclass(frozen=True)
class HittingQuery:
    """``p_start(T_A < T_B)``."""

    start: int
    target_a: frozenset
    target_b: frozenset

    def __init__(self, start, target_a, target_b):
        a = frozenset(int(x) for x in np.atleast_1d(target_a))
        b = frozenset(int(x) for x in np.atleast_1d(target_b))
        if a & b:
            raise ValueError("target sets must be disjoint")
        if not a | b:
            raise ValueError("at least one target node is required")
        object.__setattr__(self, "start", int(start))
        object.__setattr__(self, "target_a", a)
        object.__setattr__(self, "target_b", b)


def hitting_probabilities(rn: ResistorNet, A, B) -> np.ndarray:
    """``h_k = p_k(T_A < T_B)`` for every node ``k``.

    ``h`` is 1 on ``A``, 0 on ``B`` and harmonic elsewhere. Nodes whose
    component contains no target get ``nan``.
    """
    A = np.array(sorted(set(int(x) for x in A)), dtype=int)
    B = np.array(sorted(set(int(x) for x in B)), dtype=int)
    n = rn.node_count
    h = np.full(n, np.nan)
    h[B] = 0.0
    h[A] = 1.0
    comp = rn.components
    targeted = np.isin(comp, np.unique(comp[np.concatenate([A, B])]))
    free = np.flatnonzero(targeted & ~np.isin(np.arange(n), np.concatenate([A, B])))
    if len(free) == 0:
        return h
    if len(A) == 0:
        h[free] = 0.0
        return h
    W = rn.conductance
    rhs = np.asarray(W[free][:, A].sum(axis=1)).ravel()
    L = rn.laplacian[free][:, free]
    h[free] = SPDSolver(L).solve(rhs)
    return h


def hit_before(rn: ResistorNet, q: HittingQuery) -> float:
    if q.start in q.target_a:
        return 1.0
    if q.start in q.target_b:
        return 0.0
    value = hitting_probabilities(rn, q.target_a, q.target_b)[q.start]
    if np.isnan(value):
        raise Unreachable(f"node {q.start} cannot reach the target sets")
    return float(value)


def return_escape(rn: ResistorNet, i: int, j: int) -> float:
    """``p_i(T_j < T_i^+)``: leave ``i`` and reach ``j`` before coming back."""
    if i == j:
        raise ValueError("endpoints must differ")
    h = hitting_probabilities(rn, [j], [i])
    if np.isnan(h[i]) or rn.components[i] != rn.components[j]:
        raise Unreachable(f"nodes {i} and {j} are not connected")
    row = rn.conductance[i]
    return float(row.data @ h[row.indices] / rn.degree[i])


def shell(rn: ResistorNet, l, d: int) -> np.ndarray:
    """Nodes exactly ``d`` hops from link ``l`` (closest endpoint counts)."""
    dist = hop_distance_from_link(rn.conductance, l[0], l[1])
    return np.flatnonzero(dist == d)


def term1(rn: ResistorNet, l, d: int) -> float:
    """``p_i(T_{N_d} < T_j)`` on the full network."""
    if d < 1:
        raise ValueError("distance must be at least 1")
    i, j = l
    nd = shell(rn, l, d)
    if len(nd) == 0:
        return 0.0
    return hit_before(rn, HittingQuery(i, nd, [j]))


def term2(rn: ResistorNet, l, d: int) -> float:
    """Largest change in ``p_g(T_i < T_j)`` over the shell when cut becomes short."""
    if d < 1:
        raise ValueError("distance must be at least 1")
    i, j = l
    nd = shell(rn, l, d)
    if len(nd) == 0:
        return 0.0
    upper = cut_at_distance(rn, l, d)
    lower = short_at_distance(rn, l, d)
    hu = hitting_probabilities(upper, [local_index(upper, i)], [local_index(upper, j)])
    hl = hitting_probabilities(lower, [local_index(lower, i)], [local_index(lower, j)])
    diffs = [hu[local_index(upper, g)] - hl[local_index(lower, g)] for g in nd]
    return float(max(diffs))


def gap_rhs(rn: ResistorNet, l, d: int) -> float:
    """``w_i / W_ij^2 * Term 1 * Term 2``, an upper bound on ``r^U - r^L``."""
    i, j = l
    t1 = term1(rn, l, d)
    if t1 == 0.0:
        return 0.0
    return float(rn.degree[i] / rn.weight(i, j) ** 2 * t1 * term2(rn, l, d))


def double_tree_lower_closed_form(d: int) -> float:
    """Shorted-at-``d`` resistance of the root link of the infinite double tree."""
    if d < 1:
        raise ValueError("distance must be at least 1")
    return (2 ** (d + 1) - 1) / (2 ** (d + 1) + 2**d - 1)


def double_tree_lower_recursion(d: int) -> float:
    """Same quantity from series/parallel reduction of one shorted half-tree."""
    if d < 1:
        raise ValueError("distance must be at least 1")
    r = 3.0
    for _ in range(d - 1):
        r = 2.0 + r / 2.0
    return 1.0 / (1.0 + 2.0 / r)
