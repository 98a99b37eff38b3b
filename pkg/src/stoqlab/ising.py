"""Long-range Ising energetics, exact finite-volume Gibbs tables, DLR and Peierls checks."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, zeta

from . import contours as ct
from . import lattice as lt
from .lattice import Region
from .multiscale import BudgetExceeded

ENUM_LIMIT = 22


@dataclass(frozen=True)
class CouplingSpec:
    J: float = 1.0
    alpha: float = 3.0
    nn: bool = False

    def __post_init__(self):
        if self.J <= 0:
            raise ValueError("J must be positive")

    def of_distance(self, dist: np.ndarray) -> np.ndarray:
        dist = np.asarray(dist, dtype=float)
        out = np.zeros_like(dist)
        nz = dist > 0
        if self.nn:
            out[dist == 1] = self.J
        else:
            out[nz] = self.J / dist[nz] ** self.alpha
        return out


@dataclass(frozen=True)
class FieldSpec:
    h_star: float = 0.0
    delta: float = 1.0
    R: float = 0.0

    def at(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        n = np.abs(pts).sum(axis=1).astype(float)
        h = np.full(len(pts), self.h_star, dtype=float)
        nz = n > 0
        h[nz] = self.h_star / n[nz] ** self.delta
        if self.R > 0:
            h[n < self.R] = 0.0
        return h


@dataclass(frozen=True)
class EnergyBracket:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper + 1e-12:
            raise ValueError("lower > upper")


def _sphere_poly(d: int) -> np.ndarray:
    """Coefficients c_j with s_d(n) = sum_j c_j n^j for n >= 1 (index j)."""
    deg = d - 1
    ns = np.arange(1, deg + 2, dtype=float)
    vals = np.array([lt.sphere_count(d, int(n)) for n in ns], dtype=float)
    if deg == 0:
        return np.array([vals[0]])
    return np.round(np.polyfit(ns, vals, deg)[::-1], 9)


def sphere_tail_exact(d: int, alpha: float, cutoff: int) -> float:
    """sum_{n > cutoff} s_d(n)/n^alpha via Hurwitz zeta."""
    return float(sum(c * zeta(alpha - j, cutoff + 1) for j, c in enumerate(_sphere_poly(d)) if c))


def sphere_tail_bound(d: int, alpha: float, cutoff: int) -> float:
    """Upper bound for sum_{n > cutoff} s_d(n)/n^alpha from the upper sphere bound."""
    if cutoff < 1:
        return math.inf
    return lt.sphere_upper_const(d) * cutoff ** (d - alpha) / (alpha - d)


def tail_per_site(cs: CouplingSpec, d: int, cutoff: int | None) -> float:
    if cs.nn or cutoff is None:
        return 0.0
    return cs.J * sphere_tail_bound(d, cs.alpha, cutoff)


def _dist_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.abs(a[:, None, :] - b[None, :, :]).sum(-1)


def outside_coupling(r: Region, cs: CouplingSpec, cutoff: int | None) -> np.ndarray:
    """sum_{y outside r, |x-y| <= cutoff} J_xy per x in r; cutoff None sums to infinity."""
    pts = r.array()
    d = r.dim
    D = _dist_matrix(pts, pts)
    if cs.nn:
        return cs.J * (2 * d - (D == 1).sum(axis=1)).astype(float)
    if cutoff is None:
        full = cs.J * sphere_tail_exact(d, cs.alpha, 0)
        inside = cs.of_distance(D).sum(axis=1)
    else:
        full = cs.J * sum(lt.sphere_count(d, n) / n ** cs.alpha for n in range(1, cutoff + 1))
        inside = cs.of_distance(np.where(D <= cutoff, D, 0)).sum(axis=1)
    return full - inside


@dataclass
class IsingModel:
    """H(s) = -sum_{x<y} J s_x s_y - omega sum_x ext_x s_x - sum_x h_x s_x on region."""

    region: Region
    cs: CouplingSpec
    fs: FieldSpec
    cutoff: int | None = None

    def __post_init__(self):
        pts = self.region.array()
        self.Jmat = self.cs.of_distance(_dist_matrix(pts, pts))
        self.ext = outside_coupling(self.region, self.cs, self.cutoff)
        self.h = self.fs.at(pts) if len(pts) else np.zeros(0)
        self.tail = tail_per_site(self.cs, self.region.dim, self.cutoff)

    @property
    def n(self):
        return len(self.region)

    def energy(self, S: np.ndarray, omega: int) -> np.ndarray:
        S = np.atleast_2d(np.asarray(S, dtype=float))
        pair = -0.5 * np.einsum("ki,ij,kj->k", S, self.Jmat, S)
        return pair - S @ (omega * self.ext + self.h)

    def energy_of(self, sigma: ct.SpinConfig) -> float:
        if sigma.region != self.region:
            raise ValueError("configuration lives on a different region")
        return float(self.energy(sigma.array()[None, :], sigma.outside)[0])


def hamiltonian(sigma: ct.SpinConfig, cs: CouplingSpec, fs: FieldSpec, cutoff: int | None = None) -> float:
    return IsingModel(sigma.region, cs, fs, cutoff).energy_of(sigma)


def surface_energy(r: Region, cs: CouplingSpec, cutoff: int | None = 64) -> EnergyBracket:
    if len(r) == 0:
        return EnergyBracket(0.0, 0.0)
    if not cs.nn and cs.alpha <= r.dim:
        raise ValueError("need alpha > d")
    if cs.nn:
        f = float(outside_coupling(r, cs, None).sum())
        return EnergyBracket(f, f)
    low = float(outside_coupling(r, cs, cutoff).sum())
    return EnergyBracket(low, low + len(r) * tail_per_site(cs, r.dim, cutoff))


def surface_const(cs: CouplingSpec, d: int) -> float:
    """K_alpha = J max{1, c_d^{1+alpha-d}/((alpha-d) d^{alpha-d})}."""
    a = cs.alpha
    cd = lt.sphere_lower_const(d)
    return cs.J * max(1.0, cd ** (1 + a - d) / ((a - d) * d ** (a - d)))


def field_sum(r: Region, fs: FieldSpec) -> float:
    if len(r) == 0:
        return 0.0
    return float(fs.at(r.array()).sum())


def field_const(fs: FieldSpec, d: int) -> float:
    """c_5 = h* e^{-1}(2e+1)^d (d-delta)^{-1} ((d/c_d)^{1/d} + 2)^{d-delta}."""
    if fs.delta >= d:
        raise ValueError("need delta < d")
    cd = lt.sphere_lower_const(d)
    return (fs.h_star * lt.sphere_upper_const(d) / (d - fs.delta)
            * ((d / cd) ** (1 / d) + 2) ** (d - fs.delta))


def field_bound_check(r: Region, fs: FieldSpec) -> bool:
    d = r.dim
    return field_sum(r, fs) <= field_const(fs, d) * len(r) ** (1 - fs.delta / d) + 1e-12


def all_configs(n: int) -> np.ndarray:
    if n > ENUM_LIMIT:
        raise BudgetExceeded(f"2^{n} configurations exceed the enumeration budget")
    idx = np.arange(2 ** n, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n)[None, :]) & 1
    return (2 * bits - 1).astype(np.int8)


@dataclass
class GibbsTable:
    region: Region
    configs: np.ndarray
    probs: np.ndarray
    log_z: float

    def expect(self, values: np.ndarray) -> float:
        return float(self.probs @ values)


def gibbs_exact(box: Region, omega: int, beta: float, cs: CouplingSpec, fs: FieldSpec,
                cutoff: int | None = None) -> GibbsTable:
    m = IsingModel(box, cs, fs, cutoff)
    S = all_configs(m.n)
    lw = -beta * m.energy(S, omega)
    lz = float(logsumexp(lw))
    return GibbsTable(box, S, np.exp(lw - lz), lz)


def dlr_residual(box: Region, sub: Region, omega: int, beta: float, cs: CouplingSpec,
                 fs: FieldSpec, f, cutoff: int | None = None) -> float:
    """|mu_box(mu_sub(f)) - mu_box(f)| with f a function of the (K, |box|) spin matrix."""
    if not sub.issubset(box):
        raise ValueError("sub must lie inside box")
    outer = gibbs_exact(box, omega, beta, cs, fs, cutoff)
    m = IsingModel(box, cs, fs, cutoff)
    pos = {p: i for i, p in enumerate(box.points)}
    si = np.array([pos[p] for p in sub.points], dtype=int)
    oi = np.array([i for i in range(len(box)) if i not in set(si.tolist())], dtype=int)
    fv = np.asarray(f(outer.configs), dtype=float)
    direct = outer.expect(fv)
    # conditional kernel on sub: pair terms inside sub, couplings to eta on box\sub, omega beyond box
    Jss = m.Jmat[np.ix_(si, si)]
    Jso = m.Jmat[np.ix_(si, oi)]
    lin0 = omega * m.ext[si] + m.h[si]
    X = all_configs(len(si)).astype(float)
    pair = -0.5 * np.einsum("ki,ij,kj->k", X, Jss, X)
    eta = outer.configs[:, oi].astype(float)
    nested = 0.0
    codes = np.zeros(len(outer.configs), dtype=np.int64)
    for j, c in enumerate(oi):
        codes |= ((outer.configs[:, c] > 0).astype(np.int64) << j)
    sub_codes = np.zeros(len(X), dtype=np.int64)
    for j, c in enumerate(si):
        sub_codes |= ((X[:, j] > 0).astype(np.int64) << c)
    full_codes = np.zeros(len(outer.configs), dtype=np.int64)
    for c in range(len(box)):
        full_codes |= ((outer.configs[:, c] > 0).astype(np.int64) << c)
    index_of = np.empty(len(outer.configs), dtype=np.int64)
    index_of[full_codes] = np.arange(len(outer.configs))
    seen = {}
    for k in range(len(outer.configs)):
        code = int(codes[k])
        if code not in seen:
            e = eta[k]
            lw = -beta * (pair - X @ (Jso @ e + lin0))
            w = np.exp(lw - logsumexp(lw))
            base = full_codes[k] & ~int(sum(1 << int(c) for c in si))
            rows = index_of[base | sub_codes]
            seen[code] = float(w @ fv[rows])
        nested += outer.probs[k] * seen[code]
    return abs(nested - direct)


def random_local_observable(box: Region, rng: np.random.Generator, max_sites: int = 3, terms: int = 3):
    """Random polynomial in a few spins of box, evaluated on spin matrices."""
    n = len(box)
    spec = []
    for _ in range(terms):
        k = int(rng.integers(1, max_sites + 1))
        sites = tuple(sorted(rng.choice(n, size=min(k, n), replace=False).tolist()))
        spec.append((float(rng.normal()), sites))

    def f(S):
        S = np.asarray(S, dtype=float)
        return sum(c * np.prod(S[:, list(s)], axis=1) for c, s in spec)

    f.spec = spec
    return f


def contour_energy_gap(sigma: ct.SpinConfig, gamma: ct.Contour, cs: CouplingSpec,
                       cutoff: int | None = None) -> float:
    """H^-(sigma) - H^-(tau_gamma(sigma)) with zero field."""
    m = IsingModel(sigma.region, cs, FieldSpec(0.0), cutoff)
    tau = ct.erase_contours(sigma, [gamma])
    return float(m.energy(sigma.array()[None], sigma.outside)[0] - m.energy(tau.array()[None], tau.outside)[0])


def contour_gap_bound(gamma: ct.Contour, p: ct.PartitionParams, cs: CouplingSpec,
                      cutoff: int | None = 64) -> float | None:
    """c2|gamma| + c3 F_{I+} + c4 F_sp on the conservative side; None if a constant is not positive."""
    k = ct.energy_constants(p)
    if min(k.c2, k.c3, k.c4) <= 0:
        return None
    fi = surface_energy(gamma.I_plus, cs, cutoff).lower if len(gamma.I_plus) else 0.0
    fs_ = surface_energy(gamma.support, cs, cutoff).lower
    return k.c2 * len(gamma) + k.c3 * fi + k.c4 * fs_


def contour_gap_check(sigma, gamma, p, cs, cutoff: int | None = 64):
    """True/False, or None when M is below the threshold."""
    b = contour_gap_bound(gamma, p, cs, cutoff)
    if b is None:
        return None
    return contour_energy_gap(sigma, gamma, cs, None) >= b - 1e-9


def forced_minus_sites(box: Region) -> Region:
    """Sites forced to -1 by Theta_x = -1 on the inner boundary (minus outside)."""
    inner, _ = lt.boundaries(box)
    s = box.as_set()
    forced = {q for x in inner for q in lt.ball(x, 1).points if q in s}
    return Region.of(forced, box.dim)


@dataclass
class PeierlsEnsemble:
    """nu^- on box: minus outside, minus-correct inner boundary, free sites enumerated."""

    box: Region
    free: Region
    configs: np.ndarray  # full-box spins, one row per free assignment
    energies: np.ndarray
    origin_plus: np.ndarray

    def probability(self, beta: float) -> float:
        lw = -beta * self.energies
        w = np.exp(lw - logsumexp(lw))
        return float(w @ self.origin_plus)


def peierls_ensemble(box: Region, cs: CouplingSpec, fs: FieldSpec, cutoff: int | None = None) -> PeierlsEnsemble:
    origin = (0,) * box.dim
    if origin not in box:
        raise ValueError("box must contain the origin")
    forced = forced_minus_sites(box)
    free = box.minus(forced)
    F = all_configs(len(free))
    pos = {p: i for i, p in enumerate(box.points)}
    S = -np.ones((len(F), len(box)), dtype=np.int8)
    fi = np.array([pos[p] for p in free.points], dtype=int)
    if len(fi):
        S[:, fi] = F
    m = IsingModel(box, cs, fs, cutoff)
    E = m.energy(S, -1)
    return PeierlsEnsemble(box, free, S, E, (S[:, pos[origin]] > 0).astype(float))


def peierls_probability(box: Region, beta: float, cs: CouplingSpec, fs: FieldSpec,
                        cutoff: int | None = None) -> float:
    return peierls_ensemble(box, cs, fs, cutoff).probability(beta)


@dataclass
class ContourTerm:
    support: tuple
    labels: tuple
    size: int
    members: np.ndarray  # ensemble rows carrying this external contour
    gap_min: float
    free_mask: int  # free sites of the support, as bits of the row index


def _subset_sums(w: np.ndarray, nbits: int) -> np.ndarray:
    """F[m] = sum of w[k] over k whose bits are a subset of m."""
    F = w.copy()
    for b in range(nbits):
        F = F.reshape(-1, 2, 1 << b)
        F[:, 1, :] += F[:, 0, :]
        F = F.reshape(-1)
    return F


@dataclass
class ContourBoundData:
    ensemble: PeierlsEnsemble
    terms: list
    covered: bool  # every sigma_0 = +1 row has an external contour with 0 in V

    def bound(self, beta: float) -> float:
        """sum over external contours with 0 in V of 2^|g| e^{-beta gap_min} W(g)/Z, where W sums
        e^{-beta H} over configurations equal to -1 on the support."""
        lw = -beta * self.ensemble.energies
        top = lw.max()
        w = np.exp(lw - top)
        nb = len(self.ensemble.free)
        full = (1 << nb) - 1
        F = _subset_sums(w, nb)
        z = F[full]
        tot = 0.0
        for t in self.terms:
            W = F[full & ~t.free_mask]
            if W > 0:
                tot += math.exp(t.size * math.log(2) - beta * t.gap_min + math.log(W / z))
        return tot

    def union(self, beta: float) -> float:
        lw = -beta * self.ensemble.energies
        lz = logsumexp(lw)
        return float(sum(math.exp(logsumexp(lw[t.members]) - lz) for t in self.terms))


def contour_bound_data(box: Region, cs: CouplingSpec, fs: FieldSpec, p: ct.PartitionParams,
                       cutoff: int | None = None) -> ContourBoundData:
    ens = peierls_ensemble(box, cs, fs, cutoff)
    origin = (0,) * box.dim
    oi = box.points.index(origin)
    groups: dict = {}
    covered = True
    for k, row in enumerate(ens.configs):
        sigma = ct.SpinConfig(box, tuple(row.tolist()), -1)
        hit = False
        for g in ct.external_contours(ct.contours_of(sigma, p)):
            if origin in g.volume:
                hit = True
                key = (g.support.points, g.exterior_label, g.interior_labels)
                groups.setdefault(key, []).append((k, g))
        if row[oi] > 0 and not hit:
            covered = False
    pos = {q: i for i, q in enumerate(box.points)}
    fbit = {q: j for j, q in enumerate(ens.free.points)}
    m = IsingModel(box, cs, fs, cutoff)
    terms = []
    for key in sorted(groups):
        rows = groups[key]
        g = rows[0][1]
        idx = np.array([k for k, _ in rows])
        taus = ens.configs[idx].copy()
        ipi = [pos[q] for q in g.I_plus.points]
        if ipi:
            taus[:, ipi] *= -1
        taus[:, [pos[q] for q in g.support.points]] = -1
        gaps = ens.energies[idx] - m.energy(taus, -1)
        mask = sum(1 << fbit[q] for q in g.support.points if q in fbit)
        terms.append(ContourTerm(key[0], key[1:], len(g), idx, float(gaps.min()), mask))
    return ContourBoundData(ens, terms, covered)


def contour_bound(box: Region, beta: float, cs: CouplingSpec, fs: FieldSpec,
                  p: ct.PartitionParams, cutoff: int | None = None) -> float:
    return contour_bound_data(box, cs, fs, p, cutoff).bound(beta)


def metropolis_sample(box: Region, omega: int, beta: float, cs: CouplingSpec, fs: FieldSpec,
                      steps: int, seed: int, thin: int | None = None, init=None,
                      cutoff: int | None = None):
    """Single-site Metropolis; yields a SpinConfig every `thin` steps (default one sweep)."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    rng = np.random.default_rng(seed)
    m = IsingModel(box, cs, fs, cutoff)
    n = m.n
    s = np.full(n, omega, dtype=float) if init is None else np.asarray(init, dtype=float).copy()
    lin = omega * m.ext + m.h
    loc = m.Jmat @ s + lin
    thin = n if thin is None else thin
    if steps == 0:
        yield ct.SpinConfig(box, tuple(int(v) for v in s), omega)
        return
    sites = rng.integers(0, n, size=steps)
    us = rng.random(steps)
    for t in range(steps):
        x = sites[t]
        dE = 2.0 * s[x] * loc[x]
        if dE <= 0 or us[t] < math.exp(-beta * dE):
            s[x] = -s[x]
            loc += 2.0 * s[x] * m.Jmat[:, x]
        if (t + 1) % thin == 0:
            yield ct.SpinConfig(box, tuple(int(v) for v in s), omega)


def metropolis_acceptance(dE: float, beta: float) -> float:
    return min(1.0, math.exp(-beta * dE))
