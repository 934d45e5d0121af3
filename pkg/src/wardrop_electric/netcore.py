"""Directed multigraph container and the graph queries built on it."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import NoPath


@dataclass(frozen=True)
class DirectedNetwork:
    """Directed multigraph with a single origin/destination pair.

    Links are kept as an ordered tuple of ``(tail, head)`` pairs; the
    position of a link in that tuple is its id. Parallel links are
    distinct entries.
    """

    node_count: int
    links: tuple[tuple[int, int], ...]
    origin: int
    destination: int

    def __post_init__(self):
        object.__setattr__(
            self, "links", tuple((int(t), int(h)) for t, h in self.links)
        )

    @property
    def link_count(self) -> int:
        return len(self.links)

    @cached_property
    def tails(self) -> np.ndarray:
        return np.array([t for t, _ in self.links], dtype=int)

    @cached_property
    def heads(self) -> np.ndarray:
        return np.array([h for _, h in self.links], dtype=int)

    def subnetwork(self, keep) -> DirectedNetwork:
        """Network restricted to the link ids in ``keep`` (order preserved)."""
        keep = sorted(set(int(e) for e in keep))
        return DirectedNetwork(
            self.node_count, [self.links[e] for e in keep], self.origin, self.destination
        )


def validate(network: DirectedNetwork) -> list[str]:
    problems = []
    n = network.node_count
    if n < 1:
        problems.append("node count must be positive")
    for name, node in (("origin", network.origin), ("destination", network.destination)):
        if not 0 <= node < max(n, 0):
            problems.append(f"{name} {node} out of range")
    if network.origin == network.destination:
        problems.append("origin equals destination")
    for e, (t, h) in enumerate(network.links):
        if not (0 <= t < n and 0 <= h < n):
            problems.append(f"link {e} has an endpoint out of range")
        elif t == h:
            problems.append(f"self-loop at link {e}")
    return problems


def _reach(start: int, adjacency: list[list[int]]) -> np.ndarray:
    seen = np.zeros(len(adjacency), dtype=bool)
    seen[start] = True
    queue = deque([start])
    while queue:
        node = queue.popleft()
        for nxt in adjacency[node]:
            if not seen[nxt]:
                seen[nxt] = True
                queue.append(nxt)
    return seen


def prune(network: DirectedNetwork) -> DirectedNetwork:
    """Drop every link that does not lie on a directed origin-destination path.

    A link (t, h) is on such a path iff t is reachable from the origin and
    the destination is reachable from h.
    """
    n = network.node_count
    forward = [[] for _ in range(n)]
    backward = [[] for _ in range(n)]
    for t, h in network.links:
        forward[t].append(h)
        backward[h].append(t)
    from_origin = _reach(network.origin, forward)
    to_destination = _reach(network.destination, backward)
    if not from_origin[network.destination]:
        raise NoPath(f"destination {network.destination} unreachable from origin {network.origin}")
    keep = [
        e
        for e, (t, h) in enumerate(network.links)
        if from_origin[t] and to_destination[h]
    ]
    return network.subnetwork(keep)


def incidence(network: DirectedNetwork) -> sp.csr_matrix:
    """Node-link incidence: +1 at the tail row, -1 at the head row."""
    E = network.link_count
    cols = np.repeat(np.arange(E), 2)
    rows = np.column_stack([network.tails, network.heads]).ravel()
    vals = np.tile([1.0, -1.0], E)
    return sp.csr_matrix((vals, (rows, cols)), shape=(network.node_count, E))


def reduced_incidence(network: DirectedNetwork) -> sp.csr_matrix:
    """Incidence matrix with the destination row removed."""
    B = incidence(network)
    rows = [n for n in range(network.node_count) if n != network.destination]
    return B[rows]


def is_series_parallel(network: DirectedNetwork, rng: random.Random | None = None) -> bool:
    """True iff repeated series/parallel merges reduce the network to one o->d link.

    ``rng`` randomizes the order in which candidate merges are applied; the
    answer does not depend on it.
    """
    o, d = network.origin, network.destination
    if network.link_count == 0:
        return False
    links = {e: (t, h) for e, (t, h) in enumerate(network.links)}
    next_id = len(links)
    out_links: dict[int, set[int]] = {}
    in_links: dict[int, set[int]] = {}
    for e, (t, h) in links.items():
        out_links.setdefault(t, set()).add(e)
        in_links.setdefault(h, set()).add(e)

    def remove(e):
        t, h = links.pop(e)
        out_links[t].discard(e)
        in_links[h].discard(e)

    def add(t, h):
        nonlocal next_id
        e = next_id
        next_id += 1
        links[e] = (t, h)
        out_links.setdefault(t, set()).add(e)
        in_links.setdefault(h, set()).add(e)

    changed = True
    while changed:
        changed = False
        candidates = []
        by_pair: dict[tuple[int, int], list[int]] = {}
        for e, pair in links.items():
            by_pair.setdefault(pair, []).append(e)
        for pair, es in by_pair.items():
            if len(es) > 1:
                candidates.append(("parallel", es[0], es[1]))
        for node in set(out_links) | set(in_links):
            if node in (o, d):
                continue
            ins = in_links.get(node, set())
            outs = out_links.get(node, set())
            if len(ins) == 1 and len(outs) == 1:
                (e1,), (e2,) = tuple(ins), tuple(outs)
                if e1 != e2:
                    candidates.append(("series", e1, e2))
        if not candidates:
            break
        if rng is not None:
            rng.shuffle(candidates)
        kind, e1, e2 = candidates[0]
        if kind == "parallel":
            t, h = links[e1]
            remove(e1)
            remove(e2)
            add(t, h)
        else:
            t = links[e1][0]
            h = links[e2][1]
            remove(e1)
            remove(e2)
            if t == h:
                # a directed cycle through an interior node
                return False
            add(t, h)
        changed = True
    return len(links) == 1 and next(iter(links.values())) == (o, d)


def undirected_adjacency(network: DirectedNetwork) -> sp.csr_matrix:
    """0/1 adjacency of the undirected view; parallel links collapse."""
    n = network.node_count
    rows = np.concatenate([network.tails, network.heads])
    cols = np.concatenate([network.heads, network.tails])
    A = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    A.data[:] = 1.0
    return A


def ball_around_link(adjacency: sp.csr_matrix, i: int, j: int, radius: int) -> dict[int, int]:
    """Hop distance from {i, j} for every node within ``radius`` hops.

    Breadth-first search that stops after ``radius`` layers, so the cost
    depends only on the neighbourhood and not on the network size.
    """
    indptr, indices = adjacency.indptr, adjacency.indices
    dist = {i: 0, j: 0}
    frontier = [i, j] if i != j else [i]
    for layer in range(1, radius + 1):
        nxt = []
        for node in frontier:
            for nb in indices[indptr[node] : indptr[node + 1]]:
                nb = int(nb)
                if nb not in dist:
                    dist[nb] = layer
                    nxt.append(nb)
        if not nxt:
            break
        frontier = nxt
    return dist


def hop_distance_from_link(adjacency, i: int, j: int) -> np.ndarray:
    """Per-node hop distance to the nearer of ``i`` and ``j``.

    ``adjacency`` may be a sparse matrix or a :class:`DirectedNetwork`
    (whose undirected view is used). Unreachable nodes get ``inf``.
    """
    if isinstance(adjacency, DirectedNetwork):
        adjacency = undirected_adjacency(adjacency)
    adjacency = sp.csr_matrix(adjacency)
    n = adjacency.shape[0]
    found = ball_around_link(adjacency, i, j, n)
    out = np.full(n, np.inf)
    for node, dist in found.items():
        out[node] = dist
    return out
