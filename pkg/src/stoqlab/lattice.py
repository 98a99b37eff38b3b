"""Geometry on Z^d: l1 distances, balls, spheres, components, boundaries, holes."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree
from scipy.special import comb

Point = tuple


@dataclass(frozen=True)
class Region:
    """Finite subset of Z^d with points stored in lexicographic order."""

    points: tuple
    dim: int

    @classmethod
    def of(cls, pts: Iterable[Sequence[int]], dim: int | None = None) -> "Region":
        pts = sorted({tuple(int(c) for c in p) for p in pts})
        if dim is None:
            if not pts:
                raise ValueError("dimension required for an empty region")
            dim = len(pts[0])
        for p in pts:
            if len(p) != dim:
                raise ValueError(f"point {p} is not in dimension {dim}")
        return cls(tuple(pts), dim)

    @classmethod
    def box(cls, shape: Sequence[int], origin: Sequence[int] | None = None) -> "Region":
        origin = tuple(origin) if origin is not None else (0,) * len(shape)
        pts = itertools.product(*[range(o, o + s) for o, s in zip(origin, shape)])
        return cls.of(pts, len(shape))

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, p):
        return tuple(p) in self.as_set()

    def as_set(self) -> frozenset:
        s = self.__dict__.get("_set")
        if s is None:
            s = frozenset(self.points)
            object.__setattr__(self, "_set", s)
        return s

    def array(self) -> np.ndarray:
        if not self.points:
            return np.zeros((0, self.dim), dtype=np.int64)
        return np.asarray(self.points, dtype=np.int64)

    def union(self, other: "Region") -> "Region":
        return Region.of(self.as_set() | other.as_set(), self.dim)

    def minus(self, other: "Region") -> "Region":
        return Region.of(self.as_set() - other.as_set(), self.dim)

    def intersect(self, other: "Region") -> "Region":
        return Region.of(self.as_set() & other.as_set(), self.dim)

    def issubset(self, other: "Region") -> bool:
        return self.as_set() <= other.as_set()

    def to_json(self) -> str:
        return json.dumps([list(p) for p in self.points])

    @classmethod
    def from_json(cls, text: str, dim: int | None = None) -> "Region":
        return cls.of(json.loads(text), dim)


def _check_dims(p, q):
    if len(p) != len(q):
        raise ValueError(f"dimension mismatch: {len(p)} vs {len(q)}")


def l1_distance(p: Sequence[int], q: Sequence[int]) -> int:
    _check_dims(p, q)
    return int(sum(abs(a - b) for a, b in zip(p, q)))


def ball(center: Sequence[int], radius: int) -> Region:
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    d = len(center)
    rng = range(-radius, radius + 1)
    pts = [tuple(c + o for c, o in zip(center, off))
           for off in itertools.product(rng, repeat=d)
           if sum(abs(o) for o in off) <= radius]
    return Region.of(pts, d)


def sphere_count(d: int, n: int) -> int:
    """Number of points of Z^d at l1 distance exactly n from the origin (s_d(0) = 1)."""
    if d < 1 or n < 0:
        raise ValueError("need d >= 1 and n >= 0")
    if n == 0:
        return 1
    # choose k coordinates to vanish; the other d-k are nonzero with signs
    total = 0
    for k in range(max(0, d - n), d):
        total += 2 ** (d - k) * int(comb(d, k, exact=True)) * int(comb(n - 1, d - k - 1, exact=True))
    return total


def sphere_count_brute(d: int, n: int) -> int:
    rng = range(-n, n + 1)
    return sum(1 for off in itertools.product(rng, repeat=d) if sum(map(abs, off)) == n)


def sphere_lower_const(d: int) -> float:
    """c_d with c_d n^{d-1} <= s_d(n), for d >= 2."""
    return 2.0 * (d - 1) ** (d - 1)


def sphere_upper_const(d: int) -> float:
    return math.exp(-1.0) * (2 * math.e + 1) ** d


def diam_const(d: int) -> float:
    """k_d with diam(L) >= k_d |L|^{1/d}."""
    return (math.e * d) ** (1.0 / d) / (2.0 * (2 * math.e + 1))


def _neighbors(p):
    for i in range(len(p)):
        for s in (-1, 1):
            q = list(p)
            q[i] += s
            yield tuple(q)


def _grid(points: np.ndarray, margin: int):
    lo = points.min(axis=0) - margin
    hi = points.max(axis=0) + margin
    grid = np.zeros(tuple(hi - lo + 1), dtype=bool)
    grid[tuple((points - lo).T)] = True
    return grid, lo


def connected_components(r: Region) -> list[Region]:
    """Nearest-neighbour connected components, ordered by their smallest point."""
    if len(r) == 0:
        return []
    grid, lo = _grid(r.array(), 0)
    lab, n = ndimage.label(grid, structure=ndimage.generate_binary_structure(r.dim, 1))
    pts = r.array()
    ids = lab[tuple((pts - lo).T)]
    comps = [Region.of(map(tuple, pts[ids == k]), r.dim) for k in range(1, n + 1)]
    comps.sort(key=lambda c: c.points[0])
    return comps


def boundaries(r: Region) -> tuple[Region, int]:
    """Inner boundary and the number of nearest-neighbour edges leaving r."""
    s = r.as_set()
    inner, edges = [], 0
    for p in r.points:
        out = sum(1 for q in _neighbors(p) if q not in s)
        edges += out
        if out:
            inner.append(p)
    return Region.of(inner, r.dim), edges


def outer_boundary(r: Region) -> Region:
    s = r.as_set()
    return Region.of({q for p in r.points for q in _neighbors(p) if q not in s}, r.dim)


@dataclass(frozen=True)
class RegionDecomposition:
    interior_components: tuple
    volume: Region

    @property
    def interior(self) -> Region:
        pts = set()
        for c in self.interior_components:
            pts |= c.as_set()
        return Region.of(pts, self.volume.dim)


def decompose(r: Region, bounding_margin: int = 1) -> RegionDecomposition:
    """Holes of r (bounded complement components) and the filled volume V(r)."""
    if bounding_margin < 1:
        raise ValueError("bounding_margin must be >= 1")
    if len(r) == 0:
        return RegionDecomposition((), r)
    grid, lo = _grid(r.array(), bounding_margin)
    lab, n = ndimage.label(~grid, structure=ndimage.generate_binary_structure(r.dim, 1))
    border = set()
    for ax in range(r.dim):
        border |= set(np.unique(np.take(lab, 0, axis=ax)).tolist())
        border |= set(np.unique(np.take(lab, -1, axis=ax)).tolist())
    holes = []
    for k in range(1, n + 1):
        if k in border:
            continue
        idx = np.argwhere(lab == k) + lo
        holes.append(Region.of(map(tuple, idx), r.dim))
    holes.sort(key=lambda c: c.points[0])
    vol = set(r.as_set())
    for h in holes:
        vol |= h.as_set()
    return RegionDecomposition(tuple(holes), Region.of(vol, r.dim))


def complement_components(r: Region, bounding_margin: int = 1) -> list[Region]:
    """All complement components inside the inflated box; the first one is the unbounded one."""
    grid, lo = _grid(r.array(), bounding_margin)
    lab, n = ndimage.label(~grid, structure=ndimage.generate_binary_structure(r.dim, 1))
    corner = lab[(0,) * r.dim]
    out = []
    for k in [corner] + [k for k in range(1, n + 1) if k != corner]:
        idx = np.argwhere(lab == k) + lo
        out.append((k == corner, Region.of(map(tuple, idx), r.dim)))
    return out


def diameter(r: Region) -> int:
    if len(r) == 0:
        raise ValueError("diameter of an empty region")
    a = r.array()
    best = 0
    # l1 diameter via the 2^{d-1} sign patterns
    for signs in itertools.product((1, -1), repeat=r.dim - 1):
        s = np.array((1,) + signs)
        proj = a @ s
        best = max(best, int(proj.max() - proj.min()))
    return best


def set_distance(a: Region, b: Region) -> int:
    if len(a) == 0 or len(b) == 0:
        raise ValueError("distance to an empty region")
    if len(a) * len(b) <= 4096:
        x, y = a.array(), b.array()
        return int(np.abs(x[:, None, :] - y[None, :, :]).sum(-1).min())
    tree = cKDTree(b.array())
    dist, _ = tree.query(a.array(), k=1, p=1)
    return int(round(dist.min()))
