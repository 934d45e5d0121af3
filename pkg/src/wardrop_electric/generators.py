"""Network constructors: the named examples plus seeded random corpora.

Grids and rings are built as directed networks oriented so that every link
lies on an origin-destination path; with unit slopes their resistor view
is the plain unweighted lattice. Truncations stand in for infinite
networks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .netcore import DirectedNetwork
from .resistor import ResistorNet, from_affine
from .wardrop import AffineGame, GeneralGame, PolynomialDelay


def _unit_game(network: DirectedNetwork, m: float = 1.0) -> AffineGame:
    E = network.link_count
    return AffineGame(network, np.ones(E), np.zeros(E), m)


def square_grid(side: int) -> AffineGame:
    """``side x side`` lattice, links pointing right and down, corner to corner."""
    if side < 3:
        raise ValueError("grid side must be at least 3")
    idx = np.arange(side * side).reshape(side, side)
    links = [(idx[r, c], idx[r, c + 1]) for r in range(side) for c in range(side - 1)]
    links += [(idx[r, c], idx[r + 1, c]) for r in range(side - 1) for c in range(side)]
    return _unit_game(DirectedNetwork(side * side, links, 0, side * side - 1))


def central_link(side: int) -> tuple[int, int]:
    """Horizontal link at the centre of :func:`square_grid`."""
    c = side // 2
    return (c * side + c - 1, c * side + c) if side % 2 == 0 else (c * side + c, c * side + c + 1)


def cube_grid(side: int) -> AffineGame:
    if side < 3:
        raise ValueError("grid side must be at least 3")
    idx = np.arange(side**3).reshape(side, side, side)
    links = []
    for x in range(side):
        for y in range(side):
            for z in range(side):
                if x + 1 < side:
                    links.append((idx[x, y, z], idx[x + 1, y, z]))
                if y + 1 < side:
                    links.append((idx[x, y, z], idx[x, y + 1, z]))
                if z + 1 < side:
                    links.append((idx[x, y, z], idx[x, y, z + 1]))
    return _unit_game(DirectedNetwork(side**3, links, 0, side**3 - 1))


def ring(n: int) -> AffineGame:
    """Cycle on ``n`` nodes; origin 0, destination ``n // 2``, both arcs used."""
    if n < 4:
        raise ValueError("ring needs at least 4 nodes")
    half = n // 2
    links = [(k, k + 1) for k in range(half)]
    links += [((n - k) % n, n - k - 1) for k in range(n - half)]
    return _unit_game(DirectedNetwork(n, links, 0, half))


def resistor_view(game: AffineGame) -> ResistorNet:
    return from_affine(game)


def double_tree(depth: int) -> ResistorNet:
    """Two complete binary trees of ``depth`` levels joined at their roots.

    Nodes of the first tree are numbered in heap order from 0, those of the
    second from ``2**(depth+1) - 1``; the roots are the two endpoints of
    the joining link (see :func:`double_tree_roots`).
    """
    if depth < 2:
        raise ValueError("depth must be at least 2")
    size = 2 ** (depth + 1) - 1
    rows, cols = [], []
    for offset in (0, size):
        for k in range(1, size):
            rows.append(offset + (k - 1) // 2)
            cols.append(offset + k)
    rows.append(0)
    cols.append(size)
    n = 2 * size
    W = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    return ResistorNet(W + W.T)


def double_tree_roots(depth: int) -> tuple[int, int]:
    return 0, 2 ** (depth + 1) - 1


def wheatstone(a=(1.0, 1.0), b=(1.0, 1.5), m: float = 1.0) -> AffineGame:
    """Two parallel origin-destination links."""
    return AffineGame(DirectedNetwork(2, [(0, 1), (0, 1)], 0, 1), a, b, m)


def example1(a=(3.0, 2.0, 1.0), m: float = 3.0, b=(0.0, 0.0, 0.0)) -> AffineGame:
    """Parallel pair o->n followed by a single link n->d (nodes o=0, n=1, d=2)."""
    return AffineGame(DirectedNetwork(3, [(0, 1), (0, 1), (1, 2)], 0, 2), a, b, m)


# Highway graph: 17 junctions, links l1..l28 as drawn, origin 1, destination 17
# (one-based in the drawing, zero-based here).
LA_LINKS = [
    (1, 2), (2, 3), (3, 4), (4, 5), (1, 6), (6, 7), (7, 8), (8, 9), (9, 13),
    (2, 7), (3, 8), (3, 9), (4, 9), (5, 14), (6, 10), (10, 11), (10, 15),
    (7, 10), (8, 11), (9, 12), (11, 12), (12, 13), (13, 14), (11, 15),
    (13, 17), (14, 17), (15, 16), (16, 17),
]


def la_highway_network() -> DirectedNetwork:
    return DirectedNetwork(17, [(t - 1, h - 1) for t, h in LA_LINKS], 0, 16)


LA_DRAW_RANGES = {"a": (0.5, 1.5), "b": (0.5, 1.5)}


def la_highway(a=None, b=None, m: float = 1.0, degree: int = 4, seed: int | None = None) -> GeneralGame:
    """Highway topology with ``tau_e = a_e f**degree + b_e`` delays.

    Defaults ``a = 1``, ``b = 0`` are placeholders. With ``seed`` given,
    missing parameters are drawn uniformly from ``LA_DRAW_RANGES``.
    """
    net = la_highway_network()
    E = net.link_count
    rng = np.random.default_rng(seed) if seed is not None else None
    if a is None:
        a = np.ones(E) if rng is None else rng.uniform(*LA_DRAW_RANGES["a"], size=E)
    if b is None:
        b = np.zeros(E) if rng is None else rng.uniform(*LA_DRAW_RANGES["b"], size=E)
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    return GeneralGame(net, [PolynomialDelay(ae, be, degree) for ae, be in zip(a, b)], m)


def random_series_parallel(
    seed: int,
    depth: int,
    a_range=(0.5, 2.0),
    b_range=(0.0, 0.0),
    m_range=(0.5, 5.0),
) -> AffineGame:
    """Random recursive series/parallel composition.

    ``depth`` bounds the nesting; ``depth=1`` is a single link.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    rng = np.random.default_rng(seed)
    counter = [2]
    links: list[tuple[int, int]] = []

    def build(src, dst, level):
        if level == 1 or (level < depth and rng.random() < 0.25):
            links.append((src, dst))
            return
        left = level - 1
        right = int(rng.integers(1, level))
        if rng.random() < 0.5:
            mid = counter[0]
            counter[0] += 1
            build(src, mid, left)
            build(mid, dst, right)
        else:
            build(src, dst, left)
            build(src, dst, right)

    build(0, 1, depth)
    net = DirectedNetwork(counter[0], links, 0, 1)
    E = net.link_count
    a = rng.uniform(*a_range, size=E)
    b = rng.uniform(*b_range, size=E) if b_range[1] > b_range[0] else np.full(E, float(b_range[0]))
    m = float(rng.uniform(*m_range))
    return AffineGame(net, a, b, m)


def random_connected_graph(seed: int, n: int, extra: int | None = None, weight_range=(0.2, 5.0)) -> ResistorNet:
    """Random spanning tree plus ``extra`` random chords, random conductances."""
    rng = np.random.default_rng(seed)
    if extra is None:
        extra = int(rng.integers(0, 2 * n))
    edges = set()
    order = rng.permutation(n)
    for k in range(1, n):
        u = int(order[k])
        v = int(order[rng.integers(0, k)])
        edges.add((min(u, v), max(u, v)))
    tries = 0
    while len(edges) < n - 1 + extra and tries < 20 * (extra + 1):
        u, v = (int(x) for x in rng.integers(0, n, size=2))
        tries += 1
        if u != v:
            edges.add((min(u, v), max(u, v)))
    edges = sorted(edges)
    w = rng.uniform(*weight_range, size=len(edges))
    rows = [u for u, _ in edges]
    cols = [v for _, v in edges]
    W = sp.csr_matrix((w, (rows, cols)), shape=(n, n))
    return ResistorNet(W + W.T)


def grid_with_deletions(seed: int, side: int, p: float = 0.15) -> ResistorNet:
    """Unit square grid with a fraction ``p`` of links removed, keeping it connected."""
    rng = np.random.default_rng(seed)
    game = square_grid(side)
    W = from_affine(game).conductance.tolil()
    edges = [(t, h) for t, h in game.network.links]
    rng.shuffle(edges)
    target = int(p * len(edges))
    removed = 0
    from scipy.sparse.csgraph import connected_components

    for t, h in edges:
        if removed >= target:
            break
        W[t, h] = W[h, t] = 0.0
        if connected_components(W.tocsr(), directed=False)[0] > 1:
            W[t, h] = W[h, t] = 1.0
            continue
        removed += 1
    return ResistorNet(W.tocsr())


@dataclass
class GeneratorSpec:
    kind: str
    params: dict = field(default_factory=dict)

    KINDS = (
        "square_grid", "cube_grid", "ring", "double_tree", "wheatstone",
        "example1", "la_highway", "random_series_parallel",
    )

    def build(self, seed: int | None = None):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        params = dict(self.params)
        if self.kind == "random_series_parallel":
            params.setdefault("seed", 0 if seed is None else seed)
        if self.kind == "la_highway" and params.get("seed") == "auto":
            params["seed"] = 0 if seed is None else seed
        return globals()[self.kind](**params)
