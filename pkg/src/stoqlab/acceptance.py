"""Acceptance criteria AC1..AC18 as callable checks.

Each check takes a ``Scale`` and returns a ``Criterion`` with a pass flag and a
JSON-ready detail dict. The ``full`` scale uses the stated sizes; ``fast`` shrinks
the few expensive workloads (noted in ``Criterion.scale``).
"""
from __future__ import annotations

import inspect
import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import networkx as nx
import numpy as np

from . import contours as ct
from . import groupoid as gp
from . import ising as ig
from . import lattice as lt
from . import multiscale as ms
from . import pointproc as pp
from . import qgibbs as qg
from .lattice import Region


@dataclass(frozen=True)
class Scale:
    name: str = "full"

    @property
    def full(self) -> bool:
        return self.name == "full"


@dataclass
class Criterion:
    id: str
    title: str
    passed: bool
    details: dict = field(default_factory=dict)
    seed: int | None = None
    scale: str = "full"
    known_defect: str | None = None
    seconds: float = 0.0

    def to_json(self) -> dict:
        # timing is kept out so the report is byte-stable
        out = {"id": self.id, "title": self.title, "status": "pass" if self.passed else "fail",
               "scale": self.scale, "seed": self.seed, "details": self.details}
        if self.known_defect:
            out["known_defect"] = self.known_defect
        return out


def _f(x) -> float:
    return float(f"{float(x):.12g}")


# ---------------------------------------------------------------- AC1


def ac1(sc: Scale) -> Criterion:
    t = time.perf_counter()
    eq_ok, upper_ok, lower_fail = True, True, []
    for d in (1, 2, 3):
        for n in range(13):
            if lt.sphere_count(d, n) != lt.sphere_count_brute(d, n):
                eq_ok = False
            if n == 0:
                continue  # n^{d-1} vanishes at n = 0 for d >= 2
            s = lt.sphere_count(d, n)
            if s > lt.sphere_upper_const(d) * n ** (d - 1):
                upper_ok = False
            if lt.sphere_lower_const(d) * n ** (d - 1) > s:
                lower_fail.append([d, n])
    dt = time.perf_counter() - t
    ok = eq_ok and upper_ok and not lower_fail and dt < 1.0
    return Criterion("AC1", "sphere formula and two-sided bounds", ok, {
        "formula_equals_brute_force": eq_ok,
        "upper_bound_holds": upper_ok,
        "lower_bound_failures": lower_fail,
        "under_1s": dt < 1.0,
    }, known_defect=("c_d = 2(d-1)^(d-1) exceeds s_d(n)/n^(d-1) for d = 3 (8 n^2 > 4 n^2 + 2)"
                     if lower_fail else None))


# ---------------------------------------------------------------- AC2, AC3


def ac2(sc: Scale, seed: int = 2) -> Criterion:
    t = time.perf_counter()
    rng = np.random.default_rng(seed)
    hom, adj, gen = 0.0, 0.0, 0.0
    for n in (1, 2, 3):
        for q in (2, 3):
            spec = gp.AlgebraSpec(Region.box((n,)), q)
            R = gp.regular_representation
            for _ in range(100):
                a, b = gp.random_element(spec, rng), gp.random_element(spec, rng)
                hom = max(hom, np.abs(R(gp.convolve(a, b)) - R(a) @ R(b)).max())
                adj = max(adj, np.abs(R(gp.adjoint(a)) - R(a).conj().T).max())
            one = gp.identity(spec)
            for x in spec.sites:
                u, v = gp.generators(spec, x)
                gen = max(gen, gp.max_abs(gp.power(u, q) - one), gp.max_abs(gp.power(v, q) - one),
                          gp.max_abs(gp.convolve(u, v) - spec.zq * gp.convolve(v, u)))
    dt = time.perf_counter() - t
    # z_q is irrational for q = 3, so "exact" relations are checked at rounding level
    ok = hom <= 1e-12 and adj <= 1e-12 and gen <= 1e-14 and dt < 10
    return Criterion("AC2", "algebra homomorphism (AC-ALG)", bool(ok), {
        "hom_max_err": _f(hom), "adjoint_max_err": _f(adj), "generator_max_err": _f(gen), "under_10s": dt < 10,
    }, seed=seed)


def ac3(sc: Scale) -> Criterion:
    worst = 0.0
    for n in (1, 2, 3, 4):
        spec = gp.AlgebraSpec(Region.box((n,)))
        R = gp.regular_representation
        ops = gp.jordan_wigner(spec)
        I = np.eye(spec.size)
        for i, (ai, adi) in enumerate(ops):
            for j, (aj, adj) in enumerate(ops):
                A, Ad, B, Bd = R(ai), R(adi), R(aj), R(adj)
                worst = max(worst, np.abs(A @ Bd + Bd @ A - (I if i == j else 0)).max(),
                            np.abs(A @ B + B @ A).max())
    return Criterion("AC3", "Jordan-Wigner CAR", bool(worst <= 1e-12), {"max_err": _f(worst)})


# ---------------------------------------------------------------- AC4..AC10


def _chain(n, start=0):
    return Region.of([(i,) for i in range(start, start + n)])


def ac4(sc: Scale, seed: int = 4) -> Criterion:
    t = time.perf_counter()
    one = _chain(1)
    est = qg.ppp_density_mc(qg.tfim(one, J=1.0, eps=1.0), one, 1.0, (0, 1), 100_000, seed)
    z1 = (est.value.real - math.sinh(1.0)) / est.stderr
    two = _chain(2)
    phi = qg.tfim(two, J=1.0, eps=0.7)
    vals, ses, _ = qg.density_table_mc(phi, two, 0.8, 100_000, seed + 1)
    ex = qg.exact_density(phi, two, 0.8).table
    z = np.abs(vals - ex) / ses
    dt = time.perf_counter() - t
    ok = abs(z1) <= 3 and z.max() <= 3 and dt < 60
    return Criterion("AC4", "Poisson path density equals the exact density", bool(ok), {
        "single_site": {"estimate": _f(est.value.real), "stderr": _f(est.stderr), "oracle": _f(math.sinh(1.0)), "z": _f(z1)},
        "two_site_max_z": _f(z.max()), "entries": int(z.size), "under_60s": dt < 60,
    }, seed=seed)


def ac5(sc: Scale) -> Criterion:
    two = _chain(2)
    phi = qg.tfim(two, J=1.0, eps=0.7)
    ex = qg.exact_density(phi, two, 0.8).table
    errs = {n: float(np.abs(qg.trotter_density(phi, two, 0.8, n).table - ex).max()) for n in (8, 16, 32, 64)}
    rate_ok = all(errs[2 * n] <= 0.75 * errs[n] for n in (8, 16, 32))
    one = _chain(1)
    v, tail = qg.ppp_density_series(qg.tfim(one, J=1.0, eps=1.0), one, 1.0, (0, 1), 3)
    series_ok = abs(v.real - math.sinh(1.0)) <= tail
    return Criterion("AC5", "Trotter rate and truncated series", rate_ok and series_ok, {
        "trotter_errors": {str(n): _f(e) for n, e in errs.items()},
        "series": {"value": _f(v.real), "tail_bound": _f(tail), "oracle": _f(math.sinh(1.0))},
    })


def ac6(sc: Scale, seed: int = 6) -> Criterion:
    lam = _chain(3)
    phi = qg.Interaction(lam, {frozenset([(0,), (1,)]): 1.0, frozenset([(1,), (2,)]): -0.4,
                               frozenset([(0,)]): 0.3}, {}, 1)
    vals, ses, _ = qg.density_table_mc(phi, lam, 0.9, 2000, seed)
    # oracle by direct evaluation; bit n-1-i set means site i carries spin -1
    spins = [[1 - 2 * ((k >> (len(lam) - 1 - i)) & 1) for i in range(len(lam))] for k in range(1 << len(lam))]
    pos = {p: i for i, p in enumerate(lam)}
    H0 = np.array([-sum(v * math.prod(sp[pos[x]] for x in A) for A, v in phi.J.items()) for sp in spins])
    off = float(np.abs(vals[1:]).max())
    diag = float(np.abs(vals[0] - np.exp(-0.9 * H0)).max())
    return Criterion("AC6", "classical interactions give a trivial random representation",
                     off == 0.0 and diag <= 1e-12, {"offdiag_max": off, "diag_max_err": _f(diag)}, seed=seed)


def ac7(sc: Scale, seed: int = 7) -> Criterion:
    lam = _chain(3)
    phi = qg.tfim(lam, J=1.0, eps=0.6, h=0.25)
    a, b = qg.exact_density(phi, lam, 0.5), qg.exact_density(phi, lam, 0.7)
    semi = gp.max_abs(gp.convolve(a, b) - qg.exact_density(phi, lam, 1.2))
    sa = gp.max_abs(gp.adjoint(a) - a)
    rng = qg.make_rng(seed)
    jump = sorted(phi.f, key=qg._lexkey)
    bad = 0
    for _ in range(1000):
        s = tuple(int(v) for v in rng.choice([-1, 1], size=len(lam)))
        p = qg.sample_path(lam, 1.3, jump, int(rng.integers(0, 2**62)), initial=s)
        if qg.reverse_path(qg.reverse_path(p)) != p:
            bad += 1
    ok = semi <= 1e-10 and sa <= 1e-12 and bad == 0
    return Criterion("AC7", "semigroup, self-adjointness, path reversal", ok, {
        "semigroup_err": _f(semi), "selfadjoint_err": _f(sa), "reversal_mismatches": bad}, seed=seed)


def ac8(sc: Scale, seed: int = 8) -> Criterion:
    U = _chain(4, -1)
    lam = _chain(2)
    phi = qg.tfim(U, J=1.0, eps=0.7, h=0.3)
    omega = {(-1,): -1, (2,): 1}
    bp = qg.BoundaryPath.make(phi, lam, (), omega)
    vals, ses, ps = qg.density_table_mc(phi, lam, 0.8, 100_000, seed, boundary=bp)
    ex = qg.exact_bc_density(phi, lam, 0.8, omega).table
    nz = ses > 0
    zmax = float((np.abs(vals - ex)[nz] / ses[nz]).max())
    exact_zero = bool(np.all(np.abs(vals - ex)[~nz] <= 1e-12))
    w_ok = bool(np.all(ps.w.imag == 0) and np.all(ps.w.real >= 0))
    return Criterion("AC8", "boundary densities and termwise positivity", zmax <= 3 and exact_zero and w_ok, {
        "max_z": _f(zmax), "zero_variance_entries_exact": exact_zero, "weights_nonnegative": w_ok,
        "n_weights": int(ps.w.size)}, seed=seed)


def ac9(sc: Scale, seed: int = 9) -> Criterion:
    U = _chain(6, -2)
    lam = _chain(2)
    phi = qg.tfim(U, J=1.0, eps=0.7)
    far = Region.of([(3,)])
    fsub = gp.pauli(gp.AlgebraSpec(far), (3,))[3] + 0.25 * gp.identity(gp.AlgebraSpec(far))
    bp = qg.BoundaryPath.make(phi, lam, (), {(3,): -1})
    prop = qg.path_gibbs(phi, lam, 0.8, bp, gp.lift(fsub, U), 2000, seed)
    proper_ok = abs(prop.value + 0.75) <= 1e-12 and prop.stderr <= 1e-12  # termwise exact; sums round
    phi2 = qg.tfim(lam, J=1.0, eps=0.7, h=0.3)
    s30 = gp.pauli(gp.AlgebraSpec(lam), (0,))[3]
    est = qg.path_gibbs(phi2, lam, 0.8, None, s30, 100_000, seed + 1)
    oracle = qg.gibbs_expectation_exact(phi2, lam, 0.8, s30).real
    z = (est.value.real - oracle) / est.stderr
    return Criterion("AC9", "path Gibbs functional", bool(proper_ok and abs(z) <= 3), {
        "proper": {"value": _f(prop.value.real), "expected": -0.75, "stderr": _f(prop.stderr)},
        "thermal": {"estimate": _f(est.value.real), "stderr": _f(est.stderr), "oracle": _f(oracle), "z": _f(z)},
    }, seed=seed)


def ac10(sc: Scale, seed: int = 10) -> Criterion:
    n = 100_000 if sc.full else 20_000
    L = _chain(4)
    phi = qg.tfim(L, J=1.0, eps=0.7, h=0.2)
    D = _chain(2, 1)
    f = gp.lift(gp.pauli(gp.AlgebraSpec(Region.of([(1,)])), (1,))[3], L)
    est = qg.consistency_check_mc(phi, L, D, 0.8, f, n, seed)
    ok = abs(est.value) <= 3 * est.stderr
    return Criterion("AC10", "quantum consistency", bool(ok), {
        "residual": _f(np.real(est.value)), "pooled_stderr": _f(est.stderr), "samples_per_stage": n,
    }, seed=seed, scale=sc.name)


# ---------------------------------------------------------------- AC11, AC12


def ac11(sc: Scale, seed: int = 11) -> Criterion:
    box = Region.box((3, 3), (-1, -1))
    sub = Region.of([(0, 0)])
    cs, fs = ig.CouplingSpec(1.0, 3.0), ig.FieldSpec(0.1, 2.0)
    rng = np.random.default_rng(seed)
    res = [ig.dlr_residual(box, sub, -1, 0.7, cs, fs, ig.random_local_observable(box, rng)) for _ in range(20)]
    return Criterion("AC11", "classical DLR", max(res) <= 1e-12, {"max_residual": _f(max(res))}, seed=seed)


def peierls_sweep(box: Region, betas=(0.5, 1.0, 2.0, 4.0)):
    cs, fs = ig.CouplingSpec(1.0, 3.0), ig.FieldSpec(0.1, 2.0)
    p = ct.PartitionParams.defaults(2, 3.0)
    data = ig.contour_bound_data(box, cs, fs, p)
    return [(b, data.ensemble.probability(b), data.bound(b)) for b in betas], data.covered


def ac12(sc: Scale) -> Criterion:
    t = time.perf_counter()
    # the 4x4 free block sits inside an 8x8 box whose outer ring is forced to -1
    box = Region.box((8, 8), (-3, -3)) if sc.full else Region.box((7, 7), (-3, -3))
    rows, covered = peierls_sweep(box)
    dt = time.perf_counter() - t
    ex = [r[1] for r in rows]
    mono = all(b <= a + 1e-15 for a, b in zip(ex, ex[1:]))
    bound_ok = all(r[2] >= r[1] for r in rows)
    ok = mono and bound_ok and ex[-1] < 0.5 and covered and dt < 120
    return Criterion("AC12", "Peierls at desk scale", ok, {
        "sweep": [{"beta": b, "exact": _f(e), "bound": _f(u)} for b, e, u in rows],
        "nonincreasing": mono, "bound_dominates": bound_ok, "every_plus_origin_has_contour": covered,
        "under_120s": dt < 120, "free_sites": 16 if sc.full else 9,
    }, scale=sc.name)


# ---------------------------------------------------------------- AC13


def droplet_configs(n: int, seed: int, side: int = 24):
    """Metropolis snapshots at minus boundary, started from plus squares of random size."""
    box = Region.box((side, side), (-side // 2, -side // 2))
    cs, fs = ig.CouplingSpec(1.0, 3.0), ig.FieldSpec(0.0, 2.0)
    rng = np.random.default_rng(seed)
    pts = box.array()
    out = []
    while len(out) < n:
        w = int(rng.integers(2, 9))
        c = rng.integers(-side // 2 + 2, side // 2 - 2 - w, size=2)
        init = np.where(np.all((pts >= c) & (pts < c + w), axis=1), 1, -1)
        chain = ig.metropolis_sample(box, -1, 0.6, cs, fs, steps=5 * len(box), seed=int(rng.integers(2**31)),
                                     thin=len(box), init=init, cutoff=8)
        for s in chain:
            out.append(s)
            if len(out) == n:
                break
    return out


def _small_boundaries(k: int, seed: int):
    """Boundaries of sparse plus configurations in a 6x6 window with at most 10 points."""
    rng = np.random.default_rng(seed)
    win = Region.box((6, 6))
    out = []
    while len(out) < k:
        m = int(rng.integers(1, 3))
        plus = {tuple(int(v) for v in rng.integers(0, 6, size=2)) for _ in range(m)}
        sig = ct.SpinConfig.from_map(win, {p: 1 for p in plus}, -1)
        bd = ct.boundary(sig)
        if 0 < len(bd) <= 10 and bd.issubset(Region.box((8, 8), (-1, -1))):
            out.append(bd)
    return out


def ac13(sc: Scale, seed: int = 13) -> Criterion:
    n = 200 if sc.full else 40
    p = ct.PartitionParams.defaults(2, 3.0)
    kappa = ct.kappa_const(p)
    part_ok, vol_ok, n_contours, label_err = 0, True, 0, 0
    worst_ratio = 0.0
    for s in droplet_configs(n, seed):
        parts = ct.build_partition(s, p)
        if ct.check_partition(parts, p, ct.boundary(s)).ok:
            part_ok += 1
        try:
            cs_ = ct.label_contours(s, parts)
        except ct.LabelError:
            label_err += 1
            continue
        for g in cs_:
            n_contours += 1
            tv = ms.total_volume(g.support, p.r)
            worst_ratio = max(worst_ratio, tv / len(g))
            vol_ok &= tv <= kappa * len(g)
    # intersections of exhaustively enumerated valid partitions with a small M
    q = ct.PartitionParams(M=1.0, a=1.0, r=2)
    pairs, inter_ok = 0, 0
    for bd in _small_boundaries(12 if sc.full else 4, seed + 1):
        valid = ct.enumerate_valid_partitions(bd, q, limit=60)
        for g1 in valid:
            for g2 in valid:
                pairs += 1
                if ct.check_partition(ct.intersect_partitions(g1, g2, q), q, bd).ok:
                    inter_ok += 1
    ok = part_ok == n and vol_ok and label_err == 0 and inter_ok == pairs and pairs > 0
    return Criterion("AC13", "contour machinery", ok, {
        "configs": n, "partitions_pass": part_ok, "label_errors": label_err, "contours": n_contours,
        "kappa": _f(kappa), "max_volume_ratio": _f(worst_ratio), "volume_bound_holds": vol_ok,
        "intersection_pairs": pairs, "intersections_pass": inter_ok,
    }, seed=seed, scale=sc.name)


# ---------------------------------------------------------------- AC14, AC15


def random_connected_graph(rng: np.random.Generator, max_n: int = 200) -> nx.Graph:
    n = int(rng.integers(1, max_n + 1))
    g = nx.Graph()
    g.add_nodes_from(range(n))
    for v in range(1, n):  # random tree plus extra edges
        g.add_edge(v, int(rng.integers(0, v)))
    for _ in range(int(rng.integers(0, n + 1))):
        a, b = rng.integers(0, n, size=2)
        if a != b:
            g.add_edge(int(a), int(b))
    return g


def ac14(sc: Scale, seed: int = 14) -> Criterion:
    rng = np.random.default_rng(seed)
    total, good = 0, 0
    for _ in range(100):
        g = random_connected_graph(rng)
        for k in (2, 4, 8):
            total += 1
            rep = ms.check_graph_cover(g, ms.cover_connected_graph(g, k), k)
            good += all(rep.values())
    return Criterion("AC14", "connected graph covering", good == total, {"cases": total, "passed": good}, seed=seed)


def random_region(rng: np.random.Generator, d: int) -> Region:
    kind = int(rng.integers(0, 3))
    if kind == 0:  # box
        shape = rng.integers(1, 7 if d == 2 else 4, size=d)
        return Region.box(tuple(int(s) for s in shape), tuple(int(o) for o in rng.integers(-5, 5, size=d)))
    if kind == 1:  # lattice animal by random growth
        pts = {tuple(int(v) for v in rng.integers(-4, 5, size=d))}
        for _ in range(int(rng.integers(0, 40))):
            p = list(list(pts)[int(rng.integers(len(pts)))])
            p[int(rng.integers(d))] += int(rng.choice([-1, 1]))
            pts.add(tuple(p))
        return Region.of(pts, d)
    m = int(rng.integers(1, 25))  # scattered points
    return Region.of([tuple(int(v) for v in rng.integers(-8, 9, size=d)) for _ in range(m)], d)


def inequality_audit(r: Region, cs: ig.CouplingSpec, fs: ig.FieldSpec) -> dict:
    """Pass flags per inequality; ``diameter`` is None on singletons (diam 0, no k_d > 0 works)."""
    d, n = r.dim, len(r)
    inner, edges = lt.boundaries(r)
    F = ig.surface_energy(r, cs, 32).lower
    K = ig.surface_const(cs, d)
    K_min = min(cs.J, K)  # diagnostic: the same bound with min in place of max
    scale = max(n ** (2 - cs.alpha / d), edges)
    return {
        "isoperimetric": n ** (1 - 1 / d) <= len(inner) + 1e-9 and len(inner) <= edges <= 2 * d * len(inner),
        "diameter": None if n == 1 else lt.diameter(r) >= lt.diam_const(d) * n ** (1 / d) - 1e-9,
        "field_sum": ig.field_bound_check(r, fs),
        "surface_energy": F >= K * scale - 1e-9,
        "surface_energy_min_form": F >= K_min * scale - 1e-9,
    }


def ac15(sc: Scale, seed: int = 15) -> Criterion:
    rng = np.random.default_rng(seed)
    n = 500 if sc.full else 100
    keys = ("isoperimetric", "diameter", "field_sum", "surface_energy")
    counts = {k: 0 for k in keys}
    checked = {k: 0 for k in keys}
    min_form = 0
    examples = {}
    for i in range(n):
        d = 2 if i % 2 == 0 else 3
        r = random_region(rng, d)
        res = inequality_audit(r, ig.CouplingSpec(1.0, d + 1.0), ig.FieldSpec(0.5, d - 0.5))
        min_form += res["surface_energy_min_form"]
        for k in keys:
            if res[k] is None:
                continue
            checked[k] += 1
            counts[k] += bool(res[k])
            if not res[k] and k not in examples:
                examples[k] = {"d": d, "size": len(r), "first_point": list(r.points[0])}
    ok = all(counts[k] == checked[k] for k in keys)
    return Criterion("AC15", "inequality audits", ok, {
        "regions": n, "checked": checked, "passed": counts, "first_failures": examples,
        "surface_energy_min_form_passed": min_form,
    }, seed=seed, scale=sc.name,
        known_defect=("the surface-energy constant K = J max{1, ...} times max{|L|^(2-a/d), |dL|} "
                      "overshoots F for small regions; the same bound with min in place of max holds")
        if counts["surface_energy"] < checked["surface_energy"] else None)


def ac16(sc: Scale, seed: int = 16) -> Criterion:
    det = {}
    ok = True
    for i, lam in enumerate((0.5, 3.0)):
        c = pp.sample_counts(lam, 100_000, seed + i)
        _, pval = pp.poisson_pmf_chisquare(c, lam)
        p0 = float(np.mean(c == 0))
        se0 = math.sqrt(math.exp(-lam) * (1 - math.exp(-lam)) / c.size)
        e_ok = abs(p0 - math.exp(-lam)) <= 3 * se0
        det[f"lambda={lam}"] = {"chi2_p": _f(pval), "empty_freq": _f(p0), "empty_oracle": _f(math.exp(-lam)), "empty_ok": e_ok}
        ok &= pval >= 0.01 and e_ok
    rep = pp.superposition_test(1.0, 2.0, 20_000, seed + 5)
    det["superposition"] = {"mean": _f(rep.mean), "expected": rep.mean_expected, "stderr": _f(rep.mean_se), "ok": rep.mean_ok}
    ok &= rep.mean_ok
    phi = lambda t: np.exp(-t)
    P = pp.poisson_integral_product(phi, 1.0)
    errs = [abs(pp.bernoulli_integral_product(phi, n, 1.0) - P) for n in (10, 100, 1000)]
    dec = errs[0] > errs[1] > errs[2]
    det["bernoulli_errors"] = [_f(e) for e in errs]
    ok &= dec
    return Criterion("AC16", "point-process suite", bool(ok), det, seed=seed)


def ac17(sc: Scale) -> Criterion:
    two = _chain(2)
    t = qg.classify(qg.tfim(two, J=1.0, eps=0.7))
    h = qg.classify(qg.heisenberg(two, J1=1.0, J2=0.5, J3=-0.3, h=0.2, eps=0.5, rho=0.0))
    neg = qg.classify(qg.heisenberg(two, J1=-1.0, J2=0.0, J3=0.3, eps=0.5))
    ok = (t["stoquastic"] and h["stoquastic"] and not neg["stoquastic"]
          and t["admissible"] == h["admissible"] == "yes_by_stoquastic")
    return Criterion("AC17", "classification", bool(ok), {"tfim": t, "heisenberg": h, "negative_J1": neg})


REPRO_CONFIGS = [
    ("qgibbs", "ppp", {"model": {"type": "tfim", "sites": [[0], [1]], "J": 1.0, "eps": 0.7}, "beta": 0.8,
                       "n_samples": 20000}),
    ("pp", "sample", {"intensity": 2.0, "labels": ["a", "b"], "draws": 5}),
    ("ising", "mc", {"shape": [10, 10], "beta": 0.6, "steps": 2000}),
]


def ac18(sc: Scale, seed: int = 18) -> Criterion:
    from .cli import run_command

    same = {}
    with tempfile.TemporaryDirectory() as tmp:
        for mod, sub, cfg in REPRO_CONFIGS:
            outs = []
            for k in range(2):
                out = Path(tmp) / f"{mod}-{sub}-{k}"
                run_command(mod, sub, cfg, seed, out)
                outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
            same[f"{mod} {sub}"] = outs[0] == outs[1] and bool(outs[0])
    return Criterion("AC18", "reproducibility", all(same.values()), {"byte_identical": same}, seed=seed)


CRITERIA = [ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9, ac10, ac11, ac12, ac13, ac14, ac15, ac16, ac17, ac18]


def run_one(i: int, scale: str = "full", seed: int | None = None) -> Criterion:
    """Run criterion i; ``seed`` overrides the default seed of stochastic criteria."""
    fn = CRITERIA[i]
    kw = {"seed": seed} if seed is not None and "seed" in inspect.signature(fn).parameters else {}
    t = time.perf_counter()
    c = fn(Scale(scale), **kw)
    c.seconds = time.perf_counter() - t
    return c
