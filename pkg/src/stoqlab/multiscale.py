"""Dyadic cube covers, cover graphs, total volume and spanning-tree covering."""
from __future__ import annotations

import itertools
import json
import math
from collections import deque
from dataclasses import dataclass
import networkx as nx
import numpy as np

from .lattice import Region, diameter


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True, order=True)
class Cube:
    scale: int
    center: tuple
    dim: int

    def bounds(self) -> list[tuple[int, int]]:
        if self.scale == 0:
            return [(c, c) for c in self.center]
        h = 2 ** (self.scale - 1)
        return [(h * c - h, h * c + h) for c in self.center]

    def contains(self, p) -> bool:
        return all(lo <= x <= hi for x, (lo, hi) in zip(p, self.bounds()))


def cube_points(c: Cube) -> Region:
    rngs = [range(lo, hi + 1) for lo, hi in c.bounds()]
    return Region.of(itertools.product(*rngs), c.dim)


def cube_distance(a: Cube, b: Cube) -> int:
    tot = 0
    for (l1, h1), (l2, h2) in zip(a.bounds(), b.bounds()):
        tot += max(0, l2 - h1, l1 - h2)
    return tot


def _candidate_centers(p, n):
    if n == 0:
        return [tuple(p)]
    h = 2 ** (n - 1)
    axes = [range(-((-x + h) // h), (x + h) // h + 1) for x in p]
    # -((-x+h)//h) = ceil((x-h)/h)
    return list(itertools.product(*axes))


@dataclass
class Cover:
    scale: int
    cubes: list
    target: Region

    def to_json(self) -> str:
        return json.dumps({"scale": self.scale, "centers": [list(c.center) for c in self.cubes]})

    def covers(self) -> bool:
        return all(any(c.contains(p) for c in self.cubes) for p in self.target)


def _coverage(r: Region, n: int):
    cov: dict[tuple, set] = {}
    for i, p in enumerate(r.points):
        for x in _candidate_centers(p, n):
            cov.setdefault(x, set()).add(i)
    return cov


def greedy_cover(r: Region, n: int) -> list[Cube]:
    if len(r) == 0:
        raise ValueError("empty region")
    if n == 0:
        return [Cube(0, p, r.dim) for p in r.points]
    cov = _coverage(r, n)
    uncovered = set(range(len(r)))
    chosen = []
    while uncovered:
        best, best_gain = None, -1
        for x in sorted(cov):
            g = len(cov[x] & uncovered)
            if g > best_gain:
                best, best_gain = x, g
        chosen.append(Cube(n, best, r.dim))
        uncovered -= cov.pop(best)
    return chosen


def exact_cover(r: Region, n: int, max_nodes: int = 200_000) -> list[Cube]:
    """Minimum-cardinality cover by branch and bound."""
    if len(r) == 0:
        raise ValueError("empty region")
    if n == 0:
        return [Cube(0, p, r.dim) for p in r.points]
    cov = {x: frozenset(s) for x, s in _coverage(r, n).items()}
    by_point: dict[int, list] = {}
    for x, s in cov.items():
        for i in s:
            by_point.setdefault(i, []).append(x)
    for i in by_point:
        by_point[i].sort(key=lambda x: (-len(cov[x]), x))
    best = greedy_cover(r, n)
    best_centers = [c.center for c in best]
    maxcov = max(len(s) for s in cov.values())
    nodes = 0

    def rec(uncovered: frozenset, chosen: list):
        nonlocal best_centers, nodes
        nodes += 1
        if nodes > max_nodes:
            raise BudgetExceeded("exact cover exceeded node budget")
        if not uncovered:
            if len(chosen) < len(best_centers):
                best_centers = list(chosen)
            return
        if len(chosen) + math.ceil(len(uncovered) / maxcov) >= len(best_centers):
            return
        i = min(uncovered)
        for x in by_point[i]:
            chosen.append(x)
            rec(uncovered - cov[x], chosen)
            chosen.pop()

    rec(frozenset(range(len(r))), [])
    return [Cube(n, x, r.dim) for x in sorted(best_centers)]


def minimal_cover(r: Region, n: int, mode: str = "greedy", max_nodes: int = 200_000) -> Cover:
    if mode == "greedy":
        cubes = greedy_cover(r, n)
    elif mode == "exact":
        cubes = exact_cover(r, n, max_nodes)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return Cover(n, cubes, r)


def graph_threshold(M: float, a: float, d: int, n: int) -> float:
    return M * d ** a * 2.0 ** (a * n)


def cover_graph(c: Cover, M: float, a: float) -> nx.Graph:
    if M <= 0 or a < 1:
        raise ValueError("need M > 0 and a >= 1")
    g = nx.Graph()
    g.add_nodes_from(range(len(c.cubes)))
    thr = graph_threshold(M, a, c.target.dim, c.scale)
    lo = np.array([[b[0] for b in cube.bounds()] for cube in c.cubes])
    hi = np.array([[b[1] for b in cube.bounds()] for cube in c.cubes])
    for i in range(len(c.cubes)):
        gap = np.maximum(0, np.maximum(lo[i + 1:] - hi[i], lo[i] - hi[i + 1:])).sum(axis=1)
        for j in np.nonzero(gap <= thr)[0]:
            g.add_edge(i, i + 1 + int(j))
    return g


def cover_components(c: Cover, M: float, a: float) -> list[list[int]]:
    """Connected components of the cover graph, each sorted, ordered by first index."""
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components

    k = len(c.cubes)
    if k == 1:
        return [[0]]
    thr = graph_threshold(M, a, c.target.dim, c.scale)
    pts = c.target.array()
    if thr >= int((pts.max(axis=0) - pts.min(axis=0)).sum()):
        # every pair of cubes meets the target, so every gap is below the target's extent
        return [list(range(k))]
    lo = np.array([[b[0] for b in cube.bounds()] for cube in c.cubes])
    hi = np.array([[b[1] for b in cube.bounds()] for cube in c.cubes])
    gap = np.maximum(0, np.maximum(lo[:, None, :] - hi[None, :, :], lo[None, :, :] - hi[:, None, :])).sum(-1)
    _, lab = connected_components(csr_matrix(gap <= thr), directed=False)
    comps: dict[int, list[int]] = {}
    for i, l in enumerate(lab):
        comps.setdefault(int(l), []).append(i)
    return sorted(comps.values())


def n_scales(r: Region, rr: int) -> int:
    dm = diameter(r)
    if dm <= 1:
        return 0
    return math.ceil(math.log(dm) / math.log(2 ** rr) - 1e-12)


def total_volume(r: Region, rr: int) -> int:
    if len(r) == 0:
        raise ValueError("empty region")
    if rr < 1:
        raise ValueError("rr must be >= 1")
    return sum(len(greedy_cover(r, rr * n)) for n in range(n_scales(r, rr) + 1))


def cover_connected_graph(g: nx.Graph, k: int) -> list[set]:
    """Cover a connected graph by at most ceil(|v|/k) connected sets of size <= 2k.

    BFS spanning tree from the smallest vertex; repeatedly take the deepest
    vertex u whose live subtree has >= k vertices. If that subtree has <= 2k
    vertices it is cut off whole; otherwise child subtrees (each < k) are
    grouped into chunks of size >= k and cut together with u, which stays.
    Every cut removes >= k vertices, and the final remainder has <= 2k.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if g.number_of_nodes() == 0 or not nx.is_connected(g):
        raise ValueError("graph must be nonempty and connected")
    key = lambda v: (str(type(v)), v) if isinstance(v, (int, tuple, str)) else (str(type(v)), repr(v))
    root = min(g.nodes, key=key)
    parent, depth, order = {root: None}, {root: 0}, [root]
    dq = deque([root])
    while dq:
        u = dq.popleft()
        for w in sorted(g.neighbors(u), key=key):
            if w not in parent:
                parent[w], depth[w] = u, depth[u] + 1
                order.append(w)
                dq.append(w)
    children = {u: [] for u in order}
    for u in order[1:]:
        children[parent[u]].append(u)
    alive = set(order)

    def subtree(u):
        out, st = [], [u]
        while st:
            x = st.pop()
            out.append(x)
            st.extend(c for c in children[x] if c in alive)
        return out

    parts = []
    while len(alive) > 2 * k:
        size = {}
        for u in reversed(order):
            if u in alive:
                size[u] = 1 + sum(size[c] for c in children[u] if c in alive)
        u = next(x for x in sorted(order, key=lambda x: -depth[x]) if x in alive and size[x] >= k)
        if size[u] <= 2 * k:
            part = set(subtree(u))
            parts.append(part)
            alive -= part
            continue
        chunk = set()
        for c in children[u]:
            if c not in alive:
                continue
            chunk |= set(subtree(c))
            if len(chunk) >= k:
                parts.append(chunk | {u})
                alive -= chunk
                chunk = set()
    if alive:
        parts.append(set(alive))
    return parts


def check_graph_cover(g: nx.Graph, parts: list[set], k: int) -> dict:
    n = g.number_of_nodes()
    covered = set().union(*parts) if parts else set()
    return {
        "count": len(parts) <= math.ceil(n / k),
        "connected": all(nx.is_connected(g.subgraph(p)) for p in parts),
        "size": all(len(p) <= 2 * k for p in parts),
        "coverage": covered == set(g.nodes),
    }


def subordination_constant(d: int, rr: int) -> float:
    return (2 * d + 1) * math.log(2) + d * math.log(2 ** (rr + 1) - 1)


def count_subordinated(cover_m: Cover, v_n: int, n: int, max_work: int = 2_000_000) -> int:
    """Number of v_n-element collections of n-cubes to which cover_m is a minimal cover."""
    if v_n <= 0:
        return 0
    if n >= cover_m.scale:
        raise ValueError("n must be below the scale of cover_m")
    dim = cover_m.target.dim
    union = set()
    for c in cover_m.cubes:
        union |= cube_points(c).as_set()
    cands = set()
    for p in union:
        for x in _candidate_centers(p, n):
            cb = Cube(n, x, dim)
            if cube_points(cb).as_set() <= union:
                cands.add(cb)
    cands = sorted(cands)
    total = math.comb(len(cands), v_n)
    if total > max_work:
        raise BudgetExceeded(f"{total} collections exceed the work budget")
    m = len(cover_m.cubes)
    pts_of = {c: cube_points(c).as_set() for c in cands}
    count = 0
    for combo in itertools.combinations(cands, v_n):
        u = set().union(*(pts_of[c] for c in combo))
        reg = Region.of(u, dim)
        if not all(any(c.contains(p) for c in cover_m.cubes) for p in u):
            continue
        if len(exact_cover(reg, cover_m.scale)) == m:
            count += 1
    return count
