"""Incorrect points, (M,a,r)-partitions, labels, interiors and contour erasure."""
from __future__ import annotations

import itertools
import json
import math
from functools import lru_cache
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.special import zeta

from . import lattice as lt
from .lattice import Region
from .multiscale import (BudgetExceeded, Cover, cover_components, cube_points, greedy_cover,
                         total_volume)


@dataclass(frozen=True)
class SpinConfig:
    region: Region
    values: tuple
    outside: int = -1

    def __post_init__(self):
        if len(self.values) != len(self.region):
            raise ValueError("one value per region point required")
        if self.outside not in (1, -1) or any(v not in (1, -1) for v in self.values):
            raise ValueError("spins must be +1 or -1")

    @classmethod
    def from_map(cls, region: Region, f, outside: int = -1) -> "SpinConfig":
        if callable(f):
            vals = tuple(int(f(p)) for p in region.points)
        else:
            vals = tuple(int(f.get(p, outside)) for p in region.points)
        return cls(region, vals, outside)

    @classmethod
    def constant(cls, region: Region, value: int, outside: int | None = None) -> "SpinConfig":
        return cls(region, (value,) * len(region), value if outside is None else outside)

    def as_dict(self) -> dict:
        d = self.__dict__.get("_d")
        if d is None:
            d = dict(zip(self.region.points, self.values))
            object.__setattr__(self, "_d", d)
        return d

    def __call__(self, p) -> int:
        return self.as_dict().get(tuple(p), self.outside)

    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.int8)


@lru_cache(maxsize=None)
def _cross(d):
    return ndimage.generate_binary_structure(d, 1)


def boundary(sigma: SpinConfig) -> Region:
    """Points x with sigma not constant on B_1(x)."""
    r = sigma.region
    if len(r) == 0:
        return Region.of([], r.dim)
    pts = r.array()
    lo = pts.min(axis=0) - 2
    hi = pts.max(axis=0) + 2
    grid = np.full(tuple(hi - lo + 1), sigma.outside, dtype=np.int8)
    grid[tuple((pts - lo).T)] = sigma.array()
    bad = np.zeros(grid.shape, dtype=bool)
    for ax in range(r.dim):
        diff = np.diff(grid, axis=ax) != 0
        lo_sl = [slice(None)] * r.dim
        hi_sl = [slice(None)] * r.dim
        lo_sl[ax] = slice(0, -1)
        hi_sl[ax] = slice(1, None)
        bad[tuple(lo_sl)] |= diff
        bad[tuple(hi_sl)] |= diff
    idx = np.argwhere(bad) + lo
    return Region(tuple(map(tuple, idx.tolist())), r.dim)


def _zeta_sphere_sum(d: int, alpha: float) -> float:
    """sum_{y != 0} |y|^{-alpha}, via the polynomial form of s_d(n)."""
    if alpha <= d:
        raise ValueError("need alpha > d")
    deg = d - 1
    ns = np.arange(1, deg + 2, dtype=float)
    vals = np.array([lt.sphere_count(d, int(n)) for n in ns], dtype=float)
    coef = np.polyfit(ns, vals, deg) if deg > 0 else np.array([vals[0]])
    coef = np.round(coef, 9)
    total = 0.0
    for j, c in enumerate(coef[::-1]):
        if c != 0:
            total += c * zeta(alpha - j)
    return float(total)


@dataclass(frozen=True)
class PartitionParams:
    M: float
    a: float
    r: int
    alpha: float = 3.0
    epsilon: float = 0.5
    d: int = 2
    J: float = 1.0

    def __post_init__(self):
        if self.M <= 0 or self.a < 1 or self.r < 1:
            raise ValueError("need M > 0, a >= 1, r >= 1")

    @property
    def max_family(self) -> int:
        return 2 ** self.r - 1

    @classmethod
    def defaults(cls, d: int, alpha: float, epsilon: float = 0.5, J: float = 1.0,
                 M: float | None = None) -> "PartitionParams":
        if alpha <= d or epsilon <= 0:
            raise ValueError("need alpha > d and epsilon > 0")
        a = default_a(d, alpha, epsilon)
        r = default_r(d, a)
        if M is None:
            M = default_M(d, alpha, a, r, J)
        return cls(M=M, a=a, r=r, alpha=alpha, epsilon=epsilon, d=d, J=J)


def default_a(d, alpha, epsilon):
    return max((d + 1 + epsilon) / (alpha - d), d + 1 + epsilon)


def default_r(d, a):
    return math.ceil(math.log2(a + 1)) + d + 1


def k1_const(d, alpha, a, r, J):
    kd = lt.diam_const(d)
    t1 = J * math.exp(-1) * (2 * math.e + 1) ** (d - 1) * (2 ** r - 1) / ((alpha - d) * kd ** (a * (alpha - d)))
    t2 = 3 * (2 ** r - 1) ** (d + 1) * 2 ** d * float(zeta(a - d)) / kd ** d
    return max(t1, t2)


def default_M(d, alpha, a, r, J=1.0):
    kd = lt.diam_const(d)
    k1 = k1_const(d, alpha, a, r, J)
    ca = _zeta_sphere_sum(d, alpha)
    m0 = (2 ** r - 1) ** (d + 1) / kd ** d
    m1 = (12 * (2 * d + 1) * (2 * d) ** (d / (d - 1)) * k1 * 2 ** (alpha + 1) / (J * ca)) ** (1 / (alpha - d))
    m2 = ((2 * d + 1) * k1 * 2 ** (alpha + 4)) ** (1 / min(alpha - d, 1))
    return max(m0, m1, m2)


@dataclass(frozen=True)
class EnergyConstants:
    c2: float
    c3: float
    c4: float


def energy_constants(p: PartitionParams) -> EnergyConstants:
    d, al, J, M = p.d, p.alpha, p.J, p.M
    k1 = k1_const(d, al, p.a, p.r, J)
    ca = _zeta_sphere_sum(d, al)
    c2 = J * ca / ((2 * d + 1) * 2 ** al) - 6 * (2 * d) ** (d / (d - 1)) * k1 / M ** (al - d)
    c3 = 2 * (1 / ((2 * d + 1) * 2 ** (al + 1)) - 4 * k1 / M)
    c4 = 1 / ((2 * d + 1) * 2 ** (al + 1)) - 2 * k1 / M ** min(al - d, 1)
    return EnergyConstants(c2, c3, c4)


def kappa_const(p: PartitionParams) -> float:
    d, a, r, M = p.d, p.a, p.r, p.M
    L = math.log(2 * M * d ** a) / math.log(2 ** r)
    n0 = (a + 2 + L) / (a - 1)
    s = (r - d - 1) / math.log2(a)
    k_a = n0 + 1 + 2 ** (2 * (r - d - 1)) * n0 ** s * (2 + L)
    k_b = n0 + 1 + 2 ** (r - d - 1) * n0 ** s * float(zeta(s))
    return max(k_a, k_b)


def entropy_const(p: PartitionParams) -> float:
    """c1 = 2 b kappa + 1 + 1/(d-1)."""
    d, r = p.d, p.r
    c = (2 * d + 1) * math.log(2) + d * math.log(2 ** (r + 1) - 1)
    b = d * math.log(3) + math.log(2) + c + 1
    return 2 * b * kappa_const(p) + 1 + 1 / (d - 1)


@dataclass(frozen=True)
class PartitionPart:
    support: Region
    subfamily: tuple
    birth_scale: int = 0

    def max_subdiam(self) -> int:
        return max(lt.diameter(g) for g in self.subfamily)

    def to_dict(self) -> dict:
        return {"support": [list(x) for x in self.support],
                "subfamily": [[list(x) for x in g] for g in self.subfamily],
                "birth_scale": self.birth_scale}


def build_partition(sigma: SpinConfig, p: PartitionParams) -> list[PartitionPart]:
    bd = boundary(sigma)
    return partition_of(bd, p)


def partition_of(bd: Region, p: PartitionParams) -> list[PartitionPart]:
    """Scale-by-scale peeling of a finite set into an (M,a,r)-partition."""
    if len(bd) == 0:
        return []
    dim = bd.dim
    remaining = set(bd.points)
    limit = math.ceil(math.log2(max(2, lt.diameter(bd)))) + p.r + 2
    parts = []
    n = 0
    while remaining:
        if n > limit:
            raise RuntimeError("partition builder did not terminate")
        reg = Region.of(remaining, dim)
        cubes = greedy_cover(reg, p.r * n)
        taken = set()
        for comp in cover_components(Cover(p.r * n, cubes, reg), p.M, p.a):
            if len(comp) > p.max_family:
                continue
            fam = []
            for i in comp:
                if n == 0:
                    fam.append(Region((cubes[i].center,), dim))
                else:
                    fam.append(Region.of(cube_points(cubes[i]).as_set() & remaining, dim))
            sup = set().union(*(f.as_set() for f in fam))
            taken |= sup
            parts.append(PartitionPart(Region.of(sup, dim), tuple(fam), n))
        remaining -= taken
        n += 1
    parts.sort(key=lambda q: q.support.points[0])
    return parts


@dataclass
class PartitionReport:
    disjoint: list = field(default_factory=list)
    union_ok: bool = True
    single_component: list = field(default_factory=list)
    family_size: list = field(default_factory=list)
    family_union: list = field(default_factory=list)
    distance: list = field(default_factory=list)

    @property
    def ok_A(self) -> bool:
        return self.union_ok and not self.disjoint and not self.single_component

    @property
    def ok_B(self) -> bool:
        return not self.family_size and not self.family_union and not self.distance

    @property
    def ok(self) -> bool:
        return self.ok_A and self.ok_B


def _in_one_component(g: Region, h: Region) -> bool:
    """Whether h lies in a single connected component of the complement of g."""
    both = np.vstack([g.array(), h.array()])
    lo = both.min(axis=0) - 1
    hi = both.max(axis=0) + 1
    grid = np.ones(tuple(hi - lo + 1), dtype=bool)
    grid[tuple((g.array() - lo).T)] = False
    lab, _ = ndimage.label(grid, structure=_cross(g.dim))
    ids = lab[tuple((h.array() - lo).T)]
    return bool(np.all(ids == ids[0]) and ids[0] != 0)


def check_partition(parts: list[PartitionPart], p: PartitionParams,
                    target: Region | None = None) -> PartitionReport:
    rep = PartitionReport()
    if target is not None:
        u = set()
        for q in parts:
            u |= q.support.as_set()
        rep.union_ok = u == target.as_set()
    for i, q in enumerate(parts):
        if not 1 <= len(q.subfamily) <= p.max_family:
            rep.family_size.append(i)
        fu = set().union(*(f.as_set() for f in q.subfamily)) if q.subfamily else set()
        if fu != q.support.as_set():
            rep.family_union.append(i)
    diams = [q.max_subdiam() if q.subfamily else 0 for q in parts]
    for i, j in itertools.combinations(range(len(parts)), 2):
        a, b = parts[i].support, parts[j].support
        if a.as_set() & b.as_set():
            rep.disjoint.append((i, j))
            continue
        dist = lt.set_distance(a, b)
        if not dist > p.M * min(diams[i], diams[j]) ** p.a:
            rep.distance.append((i, j))
        if not _in_one_component(a, b):
            rep.single_component.append((j, i))
        if not _in_one_component(b, a):
            rep.single_component.append((i, j))
    return rep


def intersect_partitions(g1: list[PartitionPart], g2: list[PartitionPart],
                         p: PartitionParams) -> list[PartitionPart]:
    u1 = set().union(*(q.support.as_set() for q in g1)) if g1 else set()
    u2 = set().union(*(q.support.as_set() for q in g2)) if g2 else set()
    if u1 != u2:
        raise ValueError("partitions of different sets")
    out = []
    for q1 in g1:
        for q2 in g2:
            s = q1.support.as_set() & q2.support.as_set()
            if not s:
                continue
            dim = q1.support.dim
            f1 = [Region.of(f.as_set() & q2.support.as_set(), dim) for f in q1.subfamily]
            f2 = [Region.of(f.as_set() & q1.support.as_set(), dim) for f in q2.subfamily]
            f1 = [f for f in f1 if len(f)]
            f2 = [f for f in f2 if len(f)]
            d1 = max(lt.diameter(f) for f in f1)
            d2 = max(lt.diameter(f) for f in f2)
            fam = f1 if d1 <= d2 else f2
            out.append(PartitionPart(Region.of(s, dim), tuple(fam),
                                     min(q1.birth_scale, q2.birth_scale)))
    out.sort(key=lambda q: q.support.points[0])
    return out


@dataclass(frozen=True)
class Contour:
    part: PartitionPart
    exterior_label: int
    interior_components: tuple
    interior_labels: tuple
    volume: Region

    @property
    def support(self) -> Region:
        return self.part.support

    @property
    def sign(self) -> int:
        return self.exterior_label

    def _interior(self, s):
        pts = set()
        for c, l in zip(self.interior_components, self.interior_labels):
            if l == s:
                pts |= c.as_set()
        return Region.of(pts, self.support.dim)

    @property
    def I_plus(self) -> Region:
        return self._interior(1)

    @property
    def I_minus(self) -> Region:
        return self._interior(-1)

    def __len__(self):
        return len(self.part.support)

    def to_json(self) -> str:
        d = self.part.to_dict()
        d["labels"] = {"exterior": self.exterior_label, "interior": list(self.interior_labels)}
        d["I_plus"] = [list(x) for x in self.I_plus]
        d["I_minus"] = [list(x) for x in self.I_minus]
        return json.dumps(d, sort_keys=True)


class LabelError(RuntimeError):
    pass


def _constant_on(sigma: SpinConfig, r: Region) -> int:
    vals = {sigma(x) for x in r.points}
    if len(vals) != 1:
        raise LabelError("configuration is not constant on an inner boundary")
    return vals.pop()


def label_contours(sigma: SpinConfig, parts: list[PartitionPart]) -> list[Contour]:
    out = []
    for q in parts:
        dec = lt.decompose(q.support)
        ext = _constant_on(sigma, lt.boundaries(dec.volume)[0])
        labs = []
        for h in dec.interior_components:
            hv = lt.decompose(h).volume
            labs.append(_constant_on(sigma, lt.boundaries(hv)[0]))
        out.append(Contour(q, ext, tuple(dec.interior_components), tuple(labs), dec.volume))
    return out


def contours_of(sigma: SpinConfig, p: PartitionParams) -> list[Contour]:
    return label_contours(sigma, build_partition(sigma, p))


def erase_contours(sigma: SpinConfig, chosen: list[Contour]) -> SpinConfig:
    sp, ip = set(), set()
    for g in chosen:
        sp |= g.support.as_set()
        ip |= g.I_plus.as_set()
    vals = []
    for x, v in zip(sigma.region.points, sigma.values):
        if x in sp:
            vals.append(-1)
        elif x in ip:
            vals.append(-v)
        else:
            vals.append(v)
    return SpinConfig(sigma.region, tuple(vals), sigma.outside)


def external_contours(cs: list[Contour]) -> list[Contour]:
    out = []
    for i, g in enumerate(cs):
        if not any(j != i and g.support.issubset(h.volume) for j, h in enumerate(cs)):
            out.append(g)
    return out


def enumerate_contours_at_origin(m: int, box: Region, p: PartitionParams,
                                 max_configs: int = 1 << 16) -> list[Region]:
    """Distinct supports of size-m external minus-contours with the origin in V, over all
    configurations on box with minus outside."""
    if m <= 0:
        return []
    if 2 ** len(box) > max_configs:
        raise BudgetExceeded(f"2^{len(box)} configurations exceed the budget")
    origin = (0,) * box.dim
    found = set()
    for bits in itertools.product((-1, 1), repeat=len(box)):
        sigma = SpinConfig(box, bits, -1)
        bd = boundary(sigma)
        if len(bd) < m:
            continue
        try:
            cs = contours_of(sigma, p)
        except LabelError:
            continue
        for g in external_contours(cs):
            if g.sign == -1 and len(g) == m and origin in g.volume:
                found.add(g.support.points)
    return [Region.of(s, box.dim) for s in sorted(found)]


def contour_volume_ok(g: Contour, p: PartitionParams) -> bool:
    return total_volume(g.support, p.r) <= kappa_const(p) * len(g)


def set_partitions(items: list):
    """All set partitions of items (Bell-number many)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for sub in set_partitions(rest):
        for i in range(len(sub)):
            yield sub[:i] + [[first] + sub[i]] + sub[i + 1:]
        yield [[first]] + sub


def enumerate_valid_partitions(bd: Region, p: PartitionParams, limit: int = 5000) -> list[list[PartitionPart]]:
    """Every set partition of bd that passes the checker with single-block subfamilies."""
    if len(bd) > 10:
        raise BudgetExceeded("exhaustive enumeration needs at most 10 points")
    out = []
    for blocks in set_partitions(list(bd.points)):
        parts = [PartitionPart(Region.of(b, bd.dim), (Region.of(b, bd.dim),)) for b in blocks]
        parts.sort(key=lambda q: q.support.points[0])
        if check_partition(parts, p, bd).ok:
            out.append(parts)
            if len(out) >= limit:
                break
    return out
