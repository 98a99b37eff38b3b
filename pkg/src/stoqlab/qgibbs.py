"""Quantum spin-1/2 interactions, Gibbs densities and their Poisson path representation.

An interaction is stored in the split form

    H = H0 - sum_B f_B sigma^1_B,    H0 = -sum_A J_A sigma^3_A,    f_B = sum_A c_{A,B} sigma^3_A.

Configurations on a site list are integers: site i (in list order) is bit n-1-i and
a set bit means spin -1. This matches the index order of ``groupoid.AlgebraSpec``.
Group elements for q = 2 are flip masks, so g.s is ``g ^ s``.

Path weights use jump marks (t, B) with t in (0, 1). Along a path started at s the
classical energy is integrated piecewise and each mark contributes f_B evaluated at
the configuration right after the flip.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import scipy.linalg
import scipy.special

from . import groupoid as gp
from .lattice import Region, l1_distance

TOL = 1e-12


# --------------------------------------------------------------------------- interactions


def _key(pts) -> frozenset:
    return frozenset(tuple(int(c) for c in p) for p in pts)


def _diam(pts) -> int:
    pts = list(pts)
    return max((l1_distance(a, b) for a in pts for b in pts), default=0)


@dataclass(eq=False)
class Interaction:
    """Finite-range q = 2 interaction on a finite universe of sites."""

    sites: Region
    J: Mapping = field(default_factory=dict)  # frozenset A -> real
    f: Mapping = field(default_factory=dict)  # frozenset B -> {frozenset A -> complex}
    R: int = 1
    q: int = 2

    def __post_init__(self):
        if self.q != 2:
            raise ValueError("only q = 2 is supported")
        if self.R < 0:
            raise ValueError("range must be >= 0")
        S = self.sites.as_set()
        self.J = {_key(A): float(np.real(v)) for A, v in self.J.items() if v != 0}
        self.f = {_key(B): {_key(A): complex(c) for A, c in poly.items() if c != 0} for B, poly in self.f.items()}
        self.f = {B: p for B, p in self.f.items() if p}
        for A in self.J:
            if not A or not A <= S:
                raise ValueError(f"classical term {sorted(A)} is empty or leaves the site set")
            if _diam(A) > self.R:
                raise ValueError(f"classical term {sorted(A)} exceeds the range")
        for B, poly in self.f.items():
            if not B or not B <= S:
                raise ValueError(f"jump set {sorted(B)} is empty or leaves the site set")
            for A, c in poly.items():
                if not A <= S:
                    raise ValueError("polynomial term leaves the site set")
                # self-adjointness: c = conj(c) (-1)^{|A & B|}
                if abs(c - np.conj(c) * (-1) ** len(A & B)) > 1e-12 * max(1.0, abs(c)):
                    raise ValueError(f"coefficient {c} on ({sorted(A)}, {sorted(B)}) breaks self-adjointness")
            if _diam(self.support(B)) > self.R:
                raise ValueError(f"jump set {sorted(B)} with its polynomial exceeds the range")

    def support(self, B) -> frozenset:
        """B' = B together with the sites its polynomial depends on."""
        B = _key(B)
        out = set(B)
        for A in self.f.get(B, {}):
            out |= A
        return frozenset(out)

    @property
    def is_classical(self) -> bool:
        return not self.f

    def restrict(self, lam: Region) -> "Interaction":
        """Terms living inside lam (A within lam, B' within lam)."""
        L = lam.as_set()
        return Interaction(
            lam,
            {A: v for A, v in self.J.items() if A <= L},
            {B: p for B, p in self.f.items() if self.support(B) <= L},
            self.R,
        )

    def to_json(self) -> dict:
        srt = lambda A: [list(p) for p in sorted(A)]
        return {
            "sites": [list(p) for p in self.sites],
            "J": [{"A": srt(A), "value": v} for A, v in sorted(self.J.items(), key=lambda kv: sorted(kv[0]))],
            "f": [
                {"B": srt(B), "poly": [{"A": srt(A), "re": c.real, "im": c.imag} for A, c in sorted(p.items(), key=lambda kv: sorted(kv[0]))]}
                for B, p in sorted(self.f.items(), key=lambda kv: sorted(kv[0]))
            ],
            "range": self.R,
            "q": self.q,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Interaction":
        if obj.get("q", 2) != 2:
            raise ValueError("only q = 2 is supported")
        sites = Region.of([tuple(p) for p in obj["sites"]])
        J = {_key(t["A"]): float(t["value"]) for t in obj.get("J", [])}
        f = {}
        for t in obj.get("f", []):
            f[_key(t["B"])] = {_key(m["A"]): complex(m.get("re", 0.0), m.get("im", 0.0)) for m in t["poly"]}
        return cls(sites, J, f, int(obj.get("range", 1)))


def nn_pairs(sites: Region):
    S = sites.as_set()
    out = []
    for p in sites:
        for i in range(sites.dim):
            q = p[:i] + (p[i] + 1,) + p[i + 1:]
            if q in S:
                out.append((p, q))
    return out


def tfim(sites: Region, J: float = 1.0, eps: float = 1.0, h: float = 0.0) -> Interaction:
    """-J sum_<xy> s3 s3 - h sum s3 - eps sum s1 with nearest-neighbour pairs."""
    Jd = {frozenset(e): J for e in nn_pairs(sites)}
    if h:
        for x in sites:
            Jd[frozenset([x])] = h
    fd = {frozenset([x]): {frozenset(): eps} for x in sites} if eps else {}
    return Interaction(sites, Jd, fd, 1)


def heisenberg(sites: Region, J1=1.0, J2=0.5, J3=1.0, h=0.0, eps=0.0, rho=0.0) -> Interaction:
    """Pair terms -J1 s1s1 - J2 s2s2 - J3 s3s3 and site terms -eps s1 - rho s2 - h s3, s2 = i s3 s1.

    In split form f_{xy} = J1 - J2 s3_x s3_y and f_x = eps + i rho s3_x.
    """
    Jd, fd = {}, {}
    for x, y in nn_pairs(sites):
        if J3:
            Jd[frozenset([x, y])] = J3
        fd[frozenset([x, y])] = {frozenset(): J1, frozenset([x, y]): -J2}
    for x in sites:
        if h:
            Jd[frozenset([x])] = h
        poly = {}
        if eps:
            poly[frozenset()] = eps
        if rho:
            poly[frozenset([x])] = 1j * rho
        if poly:
            fd[frozenset([x])] = poly
    return Interaction(sites, Jd, fd, 1)


# --------------------------------------------------------------------------- bit tables


def _parity(n: int) -> np.ndarray:
    i = np.arange(1 << n, dtype=np.int64)
    par = np.zeros(1 << n, dtype=np.int64)
    while np.any(i):
        par ^= i & 1
        i >>= 1
    return par


class _Index:
    def __init__(self, pts):
        self.pts = tuple(pts)
        self.n = len(self.pts)
        self.pos = {p: i for i, p in enumerate(self.pts)}
        self.par = _parity(self.n)
        self.all = np.arange(1 << self.n, dtype=np.int64)

    def mask(self, A) -> int:
        return sum(1 << (self.n - 1 - self.pos[p]) for p in A)

    def sign(self, A) -> np.ndarray:
        return 1 - 2 * self.par[self.all & self.mask(A)]

    def poly(self, poly) -> np.ndarray:
        out = np.zeros(1 << self.n, dtype=complex)
        for A, c in poly.items():
            out += c * self.sign(A)
        return out

    def embed(self, sub: Region) -> np.ndarray:
        """embed[k] = universe index with the bits of sub set as in local index k, others 0."""
        m = len(sub)
        k = np.arange(1 << m, dtype=np.int64)
        out = np.zeros(1 << m, dtype=np.int64)
        for j, p in enumerate(sub.points):
            out |= ((k >> (m - 1 - j)) & 1) << (self.n - 1 - self.pos[p])
        return out

    def extract(self, sub: Region, idx: np.ndarray) -> np.ndarray:
        """Local index on sub of universe indices idx."""
        m = len(sub)
        idx = np.asarray(idx, dtype=np.int64)
        out = np.zeros_like(idx)
        for j, p in enumerate(sub.points):
            out |= ((idx >> (self.n - 1 - self.pos[p])) & 1) << (m - 1 - j)
        return out

    def config_bits(self, omega: Mapping, skip=frozenset()) -> int:
        bits = 0
        for p, v in omega.items():
            p = tuple(p)
            if p in self.pos and p not in skip:
                if v not in (1, -1):
                    raise ValueError("spins must be +1 or -1")
                if v == -1:
                    bits |= 1 << (self.n - 1 - self.pos[p])
        return bits


def energy_table(phi: Interaction, ix: _Index, terms) -> np.ndarray:
    out = np.zeros(1 << ix.n)
    for A in terms:
        out -= phi.J[A] * ix.sign(A)
    return out


# --------------------------------------------------------------------------- algebra elements


def _spec(lam: Region) -> gp.AlgebraSpec:
    return gp.AlgebraSpec(lam, 2)


def hamiltonian_element(phi: Interaction, lam: Region | None = None) -> gp.AlgebraElement:
    """H_lam(phi) over terms inside lam as a groupoid element."""
    lam = phi.sites if lam is None else lam
    ph = phi.restrict(lam)
    ix = _Index(lam.points)
    t = np.zeros((1 << ix.n, 1 << ix.n), dtype=complex)
    t[0] = energy_table(ph, ix, ph.J)
    for B, poly in ph.f.items():
        m = ix.mask(B)
        t[m] -= ix.poly(poly)[ix.all ^ m]
    return gp.AlgebraElement(_spec(lam), t)


def split_hamiltonian(phi: Interaction, lam: Region):
    """(H0 table on lam configurations, {B: f_B table}) for terms inside lam."""
    ph = phi.restrict(lam)
    ix = _Index(lam.points)
    return energy_table(ph, ix, ph.J), {B: ix.poly(p) for B, p in ph.f.items()}


def classical_bc_hamiltonian(phi: Interaction, lam: Region, omega: Mapping) -> gp.AlgebraElement:
    """(Id x ev_omega)(H_lam + W_lam): every term touching lam, read with omega outside.

    Quantum terms whose flip set leaves lam act trivially on the evaluated
    configuration only if their group part is trivial outside, so they drop out.
    """
    ix = _Index(phi.sites.points)
    L = lam.as_set()
    if not L <= phi.sites.as_set():
        raise ValueError("lam must lie in the interaction's site set")
    emb = ix.embed(lam)
    w = ix.config_bits(omega, skip=L)
    full = emb | w
    t = np.zeros((len(emb), len(emb)), dtype=complex)
    t[0] = energy_table(phi, ix, [A for A in phi.J if A & L])[full]
    loc = _Index(lam.points)
    for B, poly in phi.f.items():
        if not B <= L:
            continue
        fb = ix.poly(poly)
        mg = ix.mask(B)
        t[loc.mask(B)] -= fb[full ^ mg]
    return gp.AlgebraElement(_spec(lam), t)


def _expm_element(H: gp.AlgebraElement, beta: float) -> gp.AlgebraElement:
    M = gp.regular_representation(H)
    return gp.from_matrix(H.spec, scipy.linalg.expm(-beta * M))


def exact_density(phi: Interaction, lam: Region, beta: float) -> gp.AlgebraElement:
    """e^{-beta H_lam} through the regular representation and a Pade scaling-and-squaring expm."""
    return _expm_element(hamiltonian_element(phi, lam), beta)


def exact_bc_density(phi: Interaction, lam: Region, beta: float, omega: Mapping) -> gp.AlgebraElement:
    return _expm_element(classical_bc_hamiltonian(phi, lam, omega), beta)


def trotter_density(phi: Interaction, lam: Region, beta: float, n: int, allow_large_step: bool = False) -> gp.AlgebraElement:
    """e^beta [e^{-b H0} ((1 - beta/n) 1 + (beta/n) V)]^n e^{-b H0}, b = beta/(n+1), V = sum f_B s1_B."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if beta / n >= 1 and not allow_large_step:
        raise ValueError("beta/n must be < 1")
    spec = _spec(lam)
    H0, fs = split_hamiltonian(phi, lam)
    ix = _Index(lam.points)
    E = gp.classical(spec, np.exp(-beta / (n + 1) * H0))
    t = np.zeros((spec.size, spec.size), dtype=complex)
    for B, fb in fs.items():
        m = ix.mask(B)
        t[m] += fb[ix.all ^ m]
    V = gp.AlgebraElement(spec, t)
    step = gp.identity(spec) * (1 - beta / n) + V * (beta / n)
    block = gp.convolve(E, step)
    return gp.convolve(gp.power(block, n), E) * math.exp(beta)


# --------------------------------------------------------------------------- paths


def _lexkey(B) -> tuple:
    return tuple(sorted(B))


def _sort_marks(marks):
    return tuple(sorted(((float(t), _key(B)) for t, B in marks), key=lambda m: (m[0], _lexkey(m[1]))))


@dataclass(frozen=True)
class JumpPath:
    """Initial configuration on ``sites`` (tuple of +-1) and time-sorted jump marks."""

    sites: Region
    initial: tuple
    marks: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "marks", _sort_marks(self.marks))
        if len(self.initial) != len(self.sites):
            raise ValueError("initial configuration has the wrong length")
        ts = [t for t, _ in self.marks]
        if any(not (0.0 < t < 1.0) for t in ts):
            raise ValueError("jump times must lie in (0, 1)")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("jump times must be strictly increasing")
        S = self.sites.as_set()
        if any(not B or not B <= S for _, B in self.marks):
            raise ValueError("jump sets must be nonempty subsets of the sites")

    def trajectory(self) -> list[tuple]:
        pos = {p: i for i, p in enumerate(self.sites)}
        cur = list(self.initial)
        out = [tuple(cur)]
        for _, B in self.marks:
            for p in B:
                cur[pos[p]] = -cur[pos[p]]
            out.append(tuple(cur))
        return out

    @property
    def final(self) -> tuple:
        return self.trajectory()[-1]

    def at(self, t: float) -> tuple:
        traj = self.trajectory()
        k = sum(1 for s, _ in self.marks if s <= t)
        return traj[k]

    def group(self) -> frozenset:
        out = set()
        for _, B in self.marks:
            out ^= set(B)
        return frozenset(out)

    def check(self) -> None:
        """Structural invariants: sorted times and a consistent trajectory."""
        traj = self.trajectory()
        for k, (_, B) in enumerate(self.marks):
            diff = {p for p, a, b in zip(self.sites, traj[k], traj[k + 1]) if a != b}
            if diff != set(B):
                raise AssertionError("trajectory inconsistent with jump sets")
        end = dict(zip(self.sites, self.initial))
        for p in self.group():
            end[p] = -end[p]
        if tuple(end[p] for p in self.sites) != traj[-1]:
            raise AssertionError("final configuration differs from g . initial")


@dataclass(frozen=True)
class BoundaryPath:
    """Jump marks seen from outside lam plus the outside configuration at time 0."""

    marks: tuple = ()
    omega: tuple = ()  # sorted ((point, spin), ...)

    def __post_init__(self):
        object.__setattr__(self, "marks", _sort_marks(self.marks))
        object.__setattr__(self, "omega", tuple(sorted((tuple(p), int(v)) for p, v in dict(self.omega).items())))
        ts = [t for t, _ in self.marks]
        if any(not (0.0 < t < 1.0) for t in ts) or any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("boundary jump times must be strictly increasing in (0, 1)")

    @classmethod
    def make(cls, phi: Interaction, lam: Region, marks=(), omega: Mapping | None = None) -> "BoundaryPath":
        """Canonical representative: keep marks whose B' meets the complement of lam."""
        L = lam.as_set()
        keep = [(t, B) for t, B in marks if phi.support(B) - L]
        return cls(tuple(keep), tuple((omega or {}).items()))

    def omega_map(self) -> dict:
        return dict(self.omega)

    def final_omega(self) -> dict:
        w = self.omega_map()
        for _, B in self.marks:
            for p in B:
                if p in w:
                    w[p] = -w[p]
        return w


def reverse_path(p):
    """t -> 1 - t with the jump order reversed; the initial state becomes the old final state."""
    if isinstance(p, JumpPath):
        return JumpPath(p.sites, p.final, tuple((1.0 - t, B) for t, B in reversed(p.marks)))
    if isinstance(p, BoundaryPath):
        return BoundaryPath(tuple((1.0 - t, B) for t, B in reversed(p.marks)), tuple(p.final_omega().items()))
    raise TypeError("expected a JumpPath or BoundaryPath")


def concat_paths(p, q, c: float):
    """p on [0, c] with times t c, then q on [c, 1] with times c + s (1 - c)."""
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    if type(p) is not type(q):
        raise TypeError("paths must have the same type")
    marks = tuple((t * c, B) for t, B in p.marks) + tuple((c + s * (1 - c), B) for s, B in q.marks)
    if isinstance(p, JumpPath):
        if p.sites != q.sites or p.final != q.initial:
            raise ValueError("endpoint mismatch: p(1) != q(0)")
        return JumpPath(p.sites, p.initial, marks)
    fo = p.final_omega()
    qo = q.omega_map()
    if any(fo.get(k, v) != v for k, v in qo.items()):
        raise ValueError("endpoint mismatch: p(1) != q(0)")
    return BoundaryPath(marks, p.omega)


def sample_marks(beta: float, jump_sets, rng: np.random.Generator) -> tuple:
    """Independent rate-beta Poisson processes on [0, 1], one per jump set, merged and sorted."""
    out = []
    for B in jump_sets:
        k = rng.poisson(beta)
        out.extend((float(t), _key(B)) for t in rng.random(k))
    return _sort_marks(out)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def sample_path(lam_R: Region, beta: float, jump_sets, rng_seed: int, initial=None) -> JumpPath:
    rng = make_rng(rng_seed)
    marks = sample_marks(beta, jump_sets, rng)
    init = tuple(initial) if initial is not None else (1,) * len(lam_R)
    return JumpPath(lam_R, init, marks)


def _d1(sites: Region, a: tuple, b: tuple) -> float:
    shells: dict[int, list] = {}
    for p, x, y in zip(sites, a, b):
        shells.setdefault(sum(abs(c) for c in p), []).append(abs(x - y))
    return sum(sum(v) / len(v) / 2 ** (n + 1) for n, v in shells.items())


def path_metric(p: JumpPath, q: JumpPath) -> float:
    """d_2 with jumps paired by order index."""
    if p.sites != q.sites:
        raise ValueError("paths live on different regions")
    jp, jq = len(p.marks), len(q.marks)
    if jp != jq:
        return 1.0
    if jp == 0:
        return _d1(p.sites, p.initial, q.initial)
    tp, tq = p.trajectory(), q.trajectory()
    tot = 0.0
    for k in range(jp):
        tot += abs(p.marks[k][0] - q.marks[k][0]) + _d1(p.sites, tp[k + 1], tq[k + 1])
    return tot / (2 * (jp + 1))


def path_weight(marks, phi: Interaction, lam: Region, arrow: tuple, beta: float,
                boundary: BoundaryPath | None = None) -> complex:
    """Unnormalised weight e^{-beta int H} prod f_B(post-jump) 1{endpoint} of one path.

    arrow = (s, g) as local indices on lam. Without ``boundary`` the Hamiltonian is
    H_lam (terms inside lam); with it, the terms touching lam read the outside
    configuration carried by the boundary marks.
    """
    geo = _Geometry(phi, lam, boundary)
    s, g = arrow
    x = int(geo.starts[s])
    allm = _sort_marks(list(marks) + list(geo.bmarks))
    logw, prod, tprev = 0.0, 1.0 + 0j, 0.0
    for t, B in allm:
        logw -= beta * (t - tprev) * geo.H[x]
        x ^= geo.ix.mask(B)
        if B in geo.ftab and geo.counts(B):
            prod *= geo.ftab[B][x]
        elif B not in geo.ftab:
            prod = 0.0
        tprev = t
    logw -= beta * (1 - tprev) * geo.H[x]
    end_loc = int(geo.ix.extract(geo.lam, np.array([x]))[0])
    if end_loc != (g ^ s):
        return 0j
    return complex(math.exp(logw) * prod)


# --------------------------------------------------------------------------- path sampling


class _Geometry:
    """Index tables for densities on lam with a (possibly empty) boundary path.

    Without boundary the universe is lam itself and only terms inside lam are kept.
    """

    def __init__(self, phi: Interaction, lam: Region, boundary: BoundaryPath | None):
        L = lam.as_set()
        if boundary is None:
            phi = phi.restrict(lam)
            boundary = BoundaryPath()
        elif not L <= phi.sites.as_set():
            raise ValueError("lam must lie in the interaction's site set")
        self.phi, self.lam, self.L = phi, lam, L
        self.ix = ix = _Index(phi.sites.points)
        self.interior = sorted((B for B in phi.f if phi.support(B) <= L), key=_lexkey)
        self.H = energy_table(phi, ix, [A for A in phi.J if A & L])
        self.ftab = {B: ix.poly(p) for B, p in phi.f.items()}
        self.bmarks = boundary.marks
        for _, B in self.bmarks:
            if not B <= phi.sites.as_set():
                raise ValueError("boundary jump leaves the site set")
        w = ix.config_bits(boundary.omega_map(), skip=L)
        self.emb = ix.embed(lam)
        self.starts = self.emb | w
        self.lam_mask = ix.mask(L)
        g = 0
        for _, B in self.bmarks:
            g ^= ix.mask(B)
        self.bgroup = g  # net flip of the boundary marks (universe mask)

    def counts(self, B) -> bool:
        return bool(self.phi.support(B) & self.L)


@dataclass
class PathSamples:
    """Per-sample weights w[s, c] for start c (local index on lam) and the end index in the universe."""

    starts: np.ndarray
    end: np.ndarray
    w: np.ndarray
    seed: int
    groups: list  # (row indices, times, jump ids) per mark count
    jumps: list  # jump sets by id

    @property
    def n(self) -> int:
        return self.w.shape[0]


def _simulate(geo: _Geometry, beta: float, n_samples: int, seed: int) -> PathSamples:
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = make_rng(seed)
    K = len(geo.interior)
    jumps = list(geo.interior) + [B for B in dict.fromkeys(B for _, B in geo.bmarks) if B not in geo.interior]
    jid = {B: i for i, B in enumerate(jumps)}
    rank = np.zeros(len(jumps), dtype=np.int64)
    for r, i in enumerate(sorted(range(len(jumps)), key=lambda i: _lexkey(jumps[i]))):
        rank[i] = r
    masks = np.array([geo.ix.mask(B) for B in jumps], dtype=np.int64)
    ones = np.ones(1 << geo.ix.n, dtype=complex)
    zeros = np.zeros(1 << geo.ix.n, dtype=complex)
    ftab = np.stack([
        (geo.ftab[B] if geo.counts(B) else ones) if B in geo.ftab else zeros for B in jumps
    ]) if jumps else np.zeros((0, 1 << geo.ix.n), dtype=complex)

    counts = rng.poisson(beta, size=(n_samples, K)) if K else np.zeros((n_samples, 0), dtype=np.int64)
    ntot = counts.sum(axis=1)
    sid = np.repeat(np.arange(n_samples), ntot)
    bid = np.repeat(np.tile(np.arange(K), n_samples), counts.ravel())
    tim = rng.random(int(ntot.sum()))
    m = len(geo.bmarks)
    if m:
        bt = np.array([t for t, _ in geo.bmarks])
        bb = np.array([jid[B] for _, B in geo.bmarks])
        sid = np.concatenate([sid, np.repeat(np.arange(n_samples), m)])
        bid = np.concatenate([bid, np.tile(bb, n_samples)])
        tim = np.concatenate([tim, np.tile(bt, n_samples)])
    order = np.lexsort((rank[bid] if len(bid) else bid, tim, sid))
    sid, bid, tim = sid[order], bid[order], tim[order]
    ncount = ntot + m
    offs = np.concatenate([[0], np.cumsum(ncount)])

    C = len(geo.starts)
    end = np.empty((n_samples, C), dtype=np.int64)
    w = np.empty((n_samples, C), dtype=complex)
    groups = []
    for nk in np.unique(ncount):
        rows = np.nonzero(ncount == nk)[0]
        nk = int(nk)
        if nk:
            idx = offs[rows][:, None] + np.arange(nk)[None, :]
            T, Bi = tim[idx], bid[idx]
        else:
            T = np.zeros((len(rows), 0))
            Bi = np.zeros((len(rows), 0), dtype=np.int64)
        x = np.broadcast_to(geo.starts, (len(rows), C)).copy()
        logw = np.zeros((len(rows), C))
        prod = np.ones((len(rows), C), dtype=complex)
        tprev = np.zeros(len(rows))
        for k in range(nk):
            logw -= beta * (T[:, k] - tprev)[:, None] * geo.H[x]
            x ^= masks[Bi[:, k]][:, None]
            prod *= ftab[Bi[:, k][:, None], x]
            tprev = T[:, k]
        logw -= beta * (1 - tprev)[:, None] * geo.H[x]
        end[rows] = x
        w[rows] = math.exp(beta * K) * np.exp(logw) * prod
        groups.append((rows, T, Bi))
    return PathSamples(geo.starts.copy(), end, w, seed, groups, jumps)


@dataclass(frozen=True)
class Estimate:
    value: complex
    stderr: float
    n_samples: int
    seed: int

    def to_json(self) -> dict:
        v = complex(self.value)
        return {"re": v.real, "im": v.imag, "stderr": self.stderr, "n_samples": self.n_samples, "seed": self.seed}


def _mean_se(x: np.ndarray) -> tuple[complex, float]:
    n = x.shape[0]
    m = x.mean(axis=0)
    if n < 2:
        return m, float("inf")
    var = x.real.var(axis=0, ddof=1) + x.imag.var(axis=0, ddof=1)
    return m, np.sqrt(var / n)


def _ratio(num: np.ndarray, den: np.ndarray) -> tuple[complex, float]:
    n = len(num)
    mn, md = num.mean(), den.mean()
    r = mn / md
    resid = (num - r * den) / md
    var = resid.real.var(ddof=1) + resid.imag.var(ddof=1)
    return complex(r), float(np.sqrt(var / n))


def _local_group(geo: _Geometry, ps: PathSamples) -> np.ndarray:
    """h[s, c] = local flip index on lam between start and end."""
    return geo.ix.extract(geo.lam, ps.end ^ ps.starts[None, :])


def density_table_mc(phi, lam, beta, n_samples, seed, boundary=None):
    """All entries D(s, g) from one sample set: (values, stderrs) as [g, s] arrays, plus the samples."""
    geo = _Geometry(phi, lam, boundary)
    ps = _simulate(geo, beta, n_samples, seed)
    h = _local_group(geo, ps)
    size = len(ps.starts)
    vals = np.zeros((size, size), dtype=complex)
    ses = np.zeros((size, size))
    for g in range(size):
        m, s = _mean_se(ps.w * (h == g))
        vals[g], ses[g] = m, s
    return vals, ses, ps


def ppp_density_mc(phi: Interaction, lam: Region, beta: float, arrow: tuple, n_samples: int, seed: int) -> Estimate:
    """Monte Carlo estimate of e^{-beta H_lam}(s, g) from the Poisson path representation."""
    s, g = arrow
    geo = _Geometry(phi, lam, None)
    ps = _simulate(geo, beta, n_samples, seed)
    h = _local_group(geo, ps)[:, s]
    m, se = _mean_se(ps.w[:, s] * (h == g))
    return Estimate(complex(m), float(se), n_samples, seed)


def boundary_density_mc(phi, lam, beta, boundary: BoundaryPath, arrow, n_samples, seed) -> Estimate:
    s, g = arrow
    geo = _Geometry(phi, lam, boundary)
    ps = _simulate(geo, beta, n_samples, seed)
    h = _local_group(geo, ps)[:, s]
    m, se = _mean_se(ps.w[:, s] * (h == g))
    return Estimate(complex(m), float(se), n_samples, seed)


def boundary_density_samples(phi, lam, beta, boundary, n_samples, seed) -> PathSamples:
    return _simulate(_Geometry(phi, lam, boundary), beta, n_samples, seed)


def _boundary_local_group(geo: _Geometry) -> int:
    return int(geo.ix.extract(geo.lam, np.array([geo.bgroup]))[0])


def path_partition_function(phi, lam, beta, boundary, n_samples, seed) -> Estimate:
    """sum_s D(s, g_p restricted to lam)."""
    geo = _Geometry(phi, lam, boundary or BoundaryPath())
    ps = _simulate(geo, beta, n_samples, seed)
    h = _local_group(geo, ps)
    z = (ps.w * (h == _boundary_local_group(geo))).sum(axis=1)
    m, se = _mean_se(z)
    return Estimate(complex(m), float(se), n_samples, seed)


class AdmissibilityError(RuntimeError):
    pass


def _gibbs_terms(geo: _Geometry, ps: PathSamples, f: gp.AlgebraElement):
    if f.spec.sites != geo.phi.sites:
        raise ValueError("observable must live on the interaction's site set")
    grp = ps.end ^ ps.starts[None, :]
    num = (ps.w * f.table[grp, ps.end]).sum(axis=1)
    h = geo.ix.extract(geo.lam, grp)
    z = (ps.w * (h == _boundary_local_group(geo))).sum(axis=1)
    return num, z


def path_gibbs(phi, lam, beta, boundary, f: gp.AlgebraElement, n_samples, seed) -> Estimate:
    """Ratio estimate of the finite-volume path Gibbs functional.

    Each sample path from s to its end e contributes w * f(e, e ^ s), i.e. f on the
    arrow from the end configuration back to the start, which is the literal
    reading of f(eta p(1), g g_p) D(s, g^{-1}).
    """
    geo = _Geometry(phi, lam, boundary or BoundaryPath())
    ps = _simulate(geo, beta, n_samples, seed)
    num, z = _gibbs_terms(geo, ps, f)
    zm, zse = _mean_se(z)
    if abs(zm) <= 5 * zse:
        raise AdmissibilityError("partition function is indistinguishable from zero")
    r, se = _ratio(num, z)
    return Estimate(r, se, n_samples, seed)


def gibbs_expectation_exact(phi, lam, beta, f: gp.AlgebraElement) -> complex:
    """Tr(f e^{-beta H}) / Tr(e^{-beta H}) on lam with the free Hamiltonian."""
    rho = gp.regular_representation(exact_density(phi, lam, beta))
    F = gp.regular_representation(f)
    return complex(np.trace(F @ rho) / np.trace(rho))


# --------------------------------------------------------------------------- exact inner stage


class _InnerExact:
    """Exact path-boundary Gibbs functional on delta for boundary marks coming from outside delta."""

    def __init__(self, phi: Interaction, delta: Region, beta: float, f: gp.AlgebraElement):
        self.phi, self.delta, self.beta, self.f = phi, delta, beta, f
        self.ix = ix = _Index(phi.sites.points)
        self.D = D = delta.as_set()
        self.emb = ix.embed(delta)
        self.dmask = ix.mask(D)
        self.loc = _Index(delta.points)
        self.H = energy_table(phi, ix, [A for A in phi.J if A & D])
        self.inner = [B for B in phi.f if phi.support(B) <= D]
        self.ftab = {B: ix.poly(p) for B, p in phi.f.items()}
        self._eig: dict[int, tuple] = {}

    def _seg(self, rho: int):
        """Eigen-decomposition of the segment Hamiltonian for outside configuration rho."""
        key = rho & ~self.dmask
        if key not in self._eig:
            full = self.emb | key
            size = len(self.emb)
            M = np.diag(self.H[full]).astype(complex)
            for B in self.inner:
                m = self.loc.mask(B)
                fb = self.ftab[B][full]
                for a in range(size):
                    M[a ^ m, a] -= fb[a ^ m]
            lam, V = np.linalg.eigh(M)
            self._eig[key] = (lam, V)
        return self._eig[key]

    def _prop(self, rho: int, tau: float) -> np.ndarray:
        lam, V = self._seg(rho)
        return (V * np.exp(-self.beta * tau * lam)) @ V.conj().T

    def functional(self, rho0: int, marks) -> complex | None:
        """mu_delta for outside configuration rho0 at time 0 and boundary marks [(t, B)]; None if Z = 0."""
        size = len(self.emb)
        rho = rho0 & ~self.dmask
        M = np.eye(size, dtype=complex)
        tprev = 0.0
        gin = 0
        for t, B in marks:
            M = self._prop(rho, t - tprev) @ M
            mB = self.ix.mask(B)
            mloc = int(self.ix.extract(self.delta, np.array([mB]))[0])
            perm = np.arange(size) ^ mloc
            M = M[perm]
            rho ^= mB & ~self.dmask
            gin ^= mloc
            if self.phi.support(B) & self.D:
                fb = self.ftab.get(B)
                fac = fb[self.emb | rho] if fb is not None else np.zeros(size)
                M = fac[:, None] * M
            tprev = t
        M = self._prop(rho, 1 - tprev) @ M
        a = np.arange(size)
        z = M[a ^ gin, a].sum()
        if abs(z) == 0:
            return None
        # numerator: sum_{a, b} M[b, a] f(b rho_end, (b ^ a) g_out)
        gout = (rho0 ^ rho) & ~self.dmask
        b = a[:, None]
        src = self.emb[b] | rho
        grp = self.emb[b ^ a[None, :]] | gout
        num = (M * self.f.table[grp, src]).sum()
        return complex(num / z)


def consistency_check_mc(phi: Interaction, lam: Region, delta: Region, beta: float,
                         f: gp.AlgebraElement, n_samples: int, seed: int,
                         omega: Mapping | None = None) -> Estimate:
    """mu_lam(mu_delta^{(.)}(f)) - mu_lam(f) from one set of lam paths (shared randomness).

    Outer stage: lam paths sampled with the Poisson representation. For each path
    and start, the marks whose B' leaves delta form delta's boundary path; the
    inner functional on delta is then evaluated exactly by time-ordered matrix
    products.
    """
    if not classify(phi)["stoquastic"]:
        raise ValueError("consistency check needs a stoquastic interaction")
    if not delta.as_set() <= lam.as_set():
        raise ValueError("delta must be a subset of lam")
    bp = BoundaryPath((), tuple((omega or {}).items()))
    geo = _Geometry(phi, lam, bp)
    ps = _simulate(geo, beta, n_samples, seed)
    num1, z = _gibbs_terms(geo, ps, f)
    inner = _InnerExact(phi, delta, beta, f)
    D = delta.as_set()
    leaves = np.array([bool(phi.support(B) - D) for B in ps.jumps], dtype=bool)
    jmask = np.array([geo.ix.mask(B) for B in ps.jumps], dtype=np.int64)
    dmask = inner.dmask
    inner_vals = np.zeros(ps.w.shape, dtype=complex)
    grp = ps.end ^ ps.starts[None, :]
    for rows, T, Bi in ps.groups:
        for r_i, row in enumerate(rows):
            sel = leaves[Bi[r_i]] if Bi.shape[1] else np.zeros(0, bool)
            bm = [(float(t), ps.jumps[b]) for t, b in zip(T[r_i][sel], Bi[r_i][sel])]
            g_bd = 0
            for _, B in bm:
                g_bd ^= geo.ix.mask(B)
            g_bd &= dmask
            cache: dict[int, complex | None] = {}
            for c in range(len(ps.starts)):
                wv = ps.w[row, c]
                if wv == 0 or (grp[row, c] & dmask) != g_bd:
                    continue
                rho = int(ps.starts[c]) & ~dmask
                if rho not in cache:
                    cache[rho] = inner.functional(rho, bm)
                val = cache[rho]
                if val is None:
                    raise AdmissibilityError("inner partition function vanished")
                inner_vals[row, c] = val
    # same reduction order as num1 so that constant observables cancel exactly
    num2 = (ps.w * inner_vals).sum(axis=1)
    zm, zse = _mean_se(z)
    if abs(zm) <= 5 * zse:
        raise AdmissibilityError("partition function is indistinguishable from zero")
    r, se = _ratio(num2 - num1, z)
    return Estimate(r, se, n_samples, seed)


# --------------------------------------------------------------------------- series


def _simplex_rule(n: int, nodes: int):
    """Points and weights on 0 < s_1 < ... < s_n < 1 via s_n = u_n, s_k = u_k s_{k+1}."""
    x, wq = np.polynomial.legendre.leggauss(nodes)
    x = 0.5 * (x + 1)
    wq = 0.5 * wq
    grids = np.meshgrid(*([x] * n), indexing="ij")
    wgrids = np.meshgrid(*([wq] * n), indexing="ij")
    u = np.stack([g.ravel() for g in grids], axis=1)
    w = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    s = np.empty_like(u)
    s[:, n - 1] = u[:, n - 1]
    for k in range(n - 2, -1, -1):
        s[:, k] = u[:, k] * s[:, k + 1]
    jac = np.prod(s[:, 1:], axis=1) if n > 1 else np.ones(len(u))
    return s, w * jac


def series_tail_bound(phi: Interaction, lam: Region, beta: float, max_order: int) -> float:
    H0, fs = split_hamiltonian(phi, lam)
    vmax = max((np.abs(f).max() for f in fs.values()), default=0.0)
    x = beta * vmax * len(fs)
    if x == 0:
        return 0.0
    return float(math.exp(x + beta * np.abs(H0).max()) * scipy.special.gammainc(max_order + 1, x))


def ppp_density_series(phi: Interaction, lam: Region, beta: float, arrow: tuple, max_order: int,
                       nodes: int | None = None) -> tuple[complex, float]:
    """Terms n <= max_order of sum_n beta^n int_{simplex} sum_{B_1..B_n} F, by Gauss-Legendre on the simplex."""
    if max_order > 4 or max_order < 0:
        raise ValueError("max_order must lie in 0..4")
    s0, g = arrow
    H0, fs = split_hamiltonian(phi, lam)
    ix = _Index(lam.points)
    jl = sorted(fs, key=_lexkey)
    masks = [ix.mask(B) for B in jl]
    total = 0j
    for n in range(max_order + 1):
        if n == 0:
            total += math.exp(-beta * H0[s0]) if g == 0 else 0.0
            continue
        s, wq = _simplex_rule(n, nodes or (32 if n <= 3 else 16))
        dt = np.diff(np.concatenate([np.zeros((len(s), 1)), s, np.ones((len(s), 1))], axis=1), axis=1)
        acc = 0j
        for seq in np.ndindex(*([len(jl)] * n)):
            x = s0
            hs = [H0[x]]
            prod = 1.0 + 0j
            for b in seq:
                x ^= masks[b]
                prod *= fs[jl[b]][x]
                hs.append(H0[x])
            if x != (g ^ s0) or prod == 0:
                continue
            acc += prod * np.sum(wq * np.exp(-beta * dt @ np.array(hs)))
        total += beta ** n * acc
    return complex(total), series_tail_bound(phi, lam, beta, max_order)


# --------------------------------------------------------------------------- classification


def classify(phi: Interaction) -> dict:
    """Stoquastic iff every f_B is real and nonnegative on all configurations."""
    stoq = True
    for B, poly in phi.f.items():
        sites = sorted(set().union(*poly.keys()) if poly else set())
        ix = _Index(sites)
        vals = ix.poly(poly)
        if np.any(np.abs(vals.imag) > TOL) or np.any(vals.real < -TOL):
            stoq = False
            break
    return {"stoquastic": stoq, "admissible": "yes_by_stoquastic" if stoq else "unknown"}
