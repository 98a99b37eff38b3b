"""Poisson and Bernoulli point processes on [0, 1] with labels."""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Callable, Sequence

import numpy as np
import scipy.integrate
import scipy.special
import scipy.stats

MAX_SERIES_ORDER = 3
GL_NODES = 32


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True)
class MarkedPointSet:
    marks: tuple = ()  # ((t, label), ...) sorted by t

    def __post_init__(self):
        ts = [t for t, _ in self.marks]
        if any(b < a for a, b in zip(ts, ts[1:])):
            raise ValueError("marks must be sorted by time")
        if any(not 0.0 <= t <= 1.0 for t in ts):
            raise ValueError("times must lie in [0, 1]")

    @classmethod
    def of(cls, marks) -> "MarkedPointSet":
        return cls(tuple(sorted(((float(t), l) for t, l in marks), key=lambda m: (m[0], repr(m[1])))))

    def __len__(self):
        return len(self.marks)

    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.marks])

    def count_in(self, a: float, b: float) -> int:
        return sum(1 for t, _ in self.marks if a <= t < b)


def sample_poisson(intensity: float, labels: Sequence, seed: int | np.random.Generator) -> MarkedPointSet:
    """Per label: Poisson(intensity) many i.i.d. uniform times."""
    if intensity < 0:
        raise ValueError("intensity must be >= 0")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    out = []
    for lab in labels:
        k = rng.poisson(intensity)
        out.extend((float(t), lab) for t in rng.random(k))
    return MarkedPointSet.of(out)


def sample_counts(intensity: float, n_draws: int, seed: int) -> np.ndarray:
    """Point counts of n_draws independent single-label draws (the count is the Poisson variable)."""
    return make_rng(seed).poisson(intensity, size=n_draws)


def superpose(a: MarkedPointSet, b: MarkedPointSet) -> MarkedPointSet:
    return MarkedPointSet.of(a.marks + b.marks)


def _gl(nodes: int):
    x, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * (x + 1), 0.5 * w


def poisson_integral_series(f: Callable, lam: float, max_n: int, f_bound: float,
                            label=None, nodes: int = GL_NODES) -> tuple[float, float]:
    """E f(N) for a rate-lam process on [0, 1], truncated at max_n points, plus the tail bound.

    Terms: f(empty) e^{-lam} + e^{-lam} sum_n lam^n/n! int_{[0,1]^n} f(t_1..t_n) dt on a
    tensor Gauss-Legendre grid.
    """
    if max_n > MAX_SERIES_ORDER or max_n < 0:
        raise ValueError(f"max_n must lie in 0..{MAX_SERIES_ORDER}")
    if lam < 0:
        raise ValueError("intensity must be >= 0")
    x, w = _gl(nodes)
    total = f(MarkedPointSet()) * math.exp(-lam)
    for n in range(1, max_n + 1):
        acc = 0.0
        for idx in product(range(nodes), repeat=n):
            pts = MarkedPointSet.of((x[i], label) for i in idx)
            acc += np.prod(w[list(idx)]) * f(pts)
        total += math.exp(-lam) * lam ** n / math.factorial(n) * acc
    tail = f_bound * float(scipy.special.gammainc(max_n + 1, lam)) if lam > 0 else 0.0
    # gammainc(k+1, lam) = e^{-lam} sum_{n > k} lam^n/n!, the missing Poisson mass
    return float(total), tail


def poisson_pmf_chisquare(counts: np.ndarray, lam: float, min_expected: float = 5.0) -> tuple[float, float]:
    """Chi-square goodness of fit of integer counts against Poisson(lam); returns (statistic, p-value)."""
    n = len(counts)
    kmax = int(counts.max()) if n else 0
    pmf = scipy.stats.poisson.pmf(np.arange(kmax + 1), lam)
    obs = np.bincount(counts, minlength=kmax + 1).astype(float)
    exp = pmf * n
    exp[-1] += n * scipy.stats.poisson.sf(kmax, lam)
    # merge tail bins until each expected count is large enough
    o_b, e_b, o_acc, e_acc = [], [], 0.0, 0.0
    for o, e in zip(obs, exp):
        o_acc += o
        e_acc += e
        if e_acc >= min_expected:
            o_b.append(o_acc)
            e_b.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0:
        if e_b:
            o_b[-1] += o_acc
            e_b[-1] += e_acc
        else:
            o_b.append(o_acc)
            e_b.append(e_acc)
    if len(e_b) < 2:
        return 0.0, 1.0
    res = scipy.stats.chisquare(o_b, e_b)
    return float(res.statistic), float(res.pvalue)


def independence_test(intensity: float, n_draws: int, seed: int, split: float = 0.5) -> float:
    """Chi-square independence p-value for counts on [0, split) and [split, 1]."""
    rng = make_rng(seed)
    a = np.empty(n_draws, dtype=np.int64)
    b = np.empty(n_draws, dtype=np.int64)
    for i in range(n_draws):
        k = rng.poisson(intensity)
        t = rng.random(k)
        a[i] = np.count_nonzero(t < split)
        b[i] = k - a[i]
    ca = np.minimum(a, np.searchsorted(np.cumsum(np.bincount(a)) / n_draws, 0.95))
    cb = np.minimum(b, np.searchsorted(np.cumsum(np.bincount(b)) / n_draws, 0.95))
    table = np.zeros((ca.max() + 1, cb.max() + 1))
    np.add.at(table, (ca, cb), 1)
    table = table[table.sum(1) > 0][:, table.sum(0) > 0]
    return float(scipy.stats.chi2_contingency(table)[1])


@dataclass(frozen=True)
class SuperpositionReport:
    mean: float
    mean_expected: float
    mean_se: float
    chi2_pvalue: float
    decomp_lhs: float
    decomp_rhs: float
    decomp_se: float

    @property
    def mean_ok(self) -> bool:
        return abs(self.mean - self.mean_expected) <= 3 * self.mean_se

    @property
    def chi2_ok(self) -> bool:
        return self.chi2_pvalue >= 0.01

    @property
    def decomp_ok(self) -> bool:
        return abs(self.decomp_lhs - self.decomp_rhs) <= 3 * self.decomp_se

    @property
    def ok(self) -> bool:
        return self.mean_ok and self.chi2_ok and self.decomp_ok


def superposition_test(lam1: float, lam2: float, n_draws: int, seed: int,
                       f: Callable[[MarkedPointSet], float] = len) -> SuperpositionReport:
    """Merged draws against Poisson(lam1 + lam2), and E f(N) = E E f(N1 + N2) by two independent MC runs."""
    rng = make_rng(seed)
    merged = np.empty(n_draws, dtype=np.int64)
    lhs_f = np.empty(n_draws)
    for i in range(n_draws):
        s = superpose(sample_poisson(lam1, ["a"], rng), sample_poisson(lam2, ["b"], rng))
        merged[i] = len(s)
        lhs_f[i] = f(s)
    rhs_f = np.empty(n_draws)
    for i in range(n_draws):
        rhs_f[i] = f(sample_poisson(lam1 + lam2, ["c"], rng))
    _, p = poisson_pmf_chisquare(merged, lam1 + lam2)
    m = merged.mean()
    se = merged.std(ddof=1) / math.sqrt(n_draws)
    dse = math.sqrt(lhs_f.var(ddof=1) / n_draws + rhs_f.var(ddof=1) / n_draws)
    return SuperpositionReport(float(m), lam1 + lam2, float(se), p, float(lhs_f.mean()), float(rhs_f.mean()), dse)


def bernoulli_process(n: int, r: float, seed: int, label=None) -> MarkedPointSet:
    """Marks at j/n, j = 1..n, each present independently with probability r/n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= r / n < 1:
        raise ValueError("need 0 <= r/n < 1")
    keep = make_rng(seed).random(n) < r / n
    return MarkedPointSet.of((j / n, label) for j in np.nonzero(keep)[0] + 1)


def bernoulli_integral_exact(f: Callable, n: int, r: float, label=None, max_support: int | None = None) -> float:
    """E f over all supports of the Bernoulli process, or over supports of size <= max_support.

    With max_support set, f must depend on the point set only through sizes up to that
    bound being relevant; the default enumerates all 2^n supports (small n only).
    """
    if not 0 <= r / n < 1:
        raise ValueError("need 0 <= r/n < 1")
    p = r / n
    kmax = n if max_support is None else min(n, max_support)
    if max_support is None and n > 20:
        raise ValueError("full enumeration needs n <= 20; pass max_support")
    total = 0.0
    for k in range(kmax + 1):
        wk = p ** k * (1 - p) ** (n - k)
        for sup in combinations(range(1, n + 1), k):
            total += wk * f(MarkedPointSet.of((j / n, label) for j in sup))
    return total


def bernoulli_integral_product(phi: Callable[[np.ndarray], np.ndarray], n: int, r: float) -> float:
    """Exact E prod_{t in nu} phi(t) for the Bernoulli process: the support sum factorises per site."""
    if not 0 <= r / n < 1:
        raise ValueError("need 0 <= r/n < 1")
    p = r / n
    t = np.arange(1, n + 1) / n
    return float(np.exp(np.sum(np.log1p(p * (phi(t) - 1)))))


def poisson_integral_product(phi: Callable[[np.ndarray], np.ndarray], lam: float) -> float:
    """E prod_{t in N} phi(t) = exp(lam int_0^1 (phi - 1)) for a rate-lam process."""
    val, _ = scipy.integrate.quad(lambda t: float(phi(np.array([t]))[0]) - 1.0, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    return float(math.exp(lam * val))
