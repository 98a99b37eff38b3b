"""Convolution algebra of the transformation groupoid Omega_L x G_L for q-state spins.

Configurations and group elements are both indexed by base-q digit vectors in
lexicographic order (first site most significant). Config digit k stands for the
spin z_q^k; for q = 2 that is +1 (k=0) and -1 (k=1). A group element with digits
g acts by k_x -> k_x + g_x mod q.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .lattice import Region

DIM_BUDGET = 4096
TOL = 1e-12


@dataclass(frozen=True)
class AlgebraSpec:
    sites: Region
    q: int = 2

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("q must be >= 2")
        if self.q ** len(self.sites) > DIM_BUDGET:
            raise ValueError(f"q^|L| = {self.q ** len(self.sites)} exceeds the dimension budget")

    @property
    def n(self) -> int:
        return len(self.sites)

    @property
    def size(self) -> int:
        return self.q ** self.n

    @property
    def zq(self) -> complex:
        return np.exp(2j * np.pi / self.q)

    def site_index(self, x) -> int:
        try:
            return self.sites.points.index(tuple(x))
        except ValueError:
            raise ValueError(f"site {x} not in the region") from None

    @cached_property
    def digits(self) -> np.ndarray:
        """(size, n) digit table; row i is the base-q expansion of i."""
        i = np.arange(self.size)
        pw = self.q ** np.arange(self.n - 1, -1, -1)
        return (i[:, None] // pw[None, :]) % self.q

    @cached_property
    def powers(self) -> np.ndarray:
        return self.q ** np.arange(self.n - 1, -1, -1)

    def encode(self, dig: np.ndarray) -> np.ndarray:
        return (np.asarray(dig) % self.q) @ self.powers

    @cached_property
    def act(self) -> np.ndarray:
        """act[g, s] = index of g.s."""
        return self.encode(self.digits[:, None, :] + self.digits[None, :, :])

    @cached_property
    def compose(self) -> np.ndarray:
        """compose[g, h] = index of g h."""
        return self.act  # the action and the product are both digit addition

    @cached_property
    def inverse(self) -> np.ndarray:
        return self.encode(-self.digits)

    def spins(self) -> np.ndarray:
        """(size, n) complex spin values z_q^k per configuration."""
        return self.zq ** self.digits


class SpecMismatch(ValueError):
    pass


@dataclass
class AlgebraElement:
    """table[g, s] = f(s, g), the value on the arrow from s to g.s."""

    spec: AlgebraSpec
    table: np.ndarray

    def __post_init__(self):
        self.table = np.asarray(self.table, dtype=complex)
        if self.table.shape != (self.spec.size, self.spec.size):
            raise ValueError("table shape does not match the spec")

    def _check(self, other: "AlgebraElement"):
        if other.spec != self.spec:
            raise SpecMismatch("elements belong to different algebras")

    def __add__(self, other):
        self._check(other)
        return AlgebraElement(self.spec, self.table + other.table)

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(self.spec, self.table - other.table)

    def __mul__(self, c):
        return AlgebraElement(self.spec, self.table * c)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return convolve(self, other)

    def __call__(self, s: int, g: int) -> complex:
        return complex(self.table[g, s])

    def to_json(self, tol: float = 0.0) -> str:
        sp = self.spec
        entries = []
        for g, s in zip(*np.nonzero(np.abs(self.table) > tol)):
            v = self.table[g, s]
            entries.append([sp.digits[g].tolist(), int(s), float(v.real), float(v.imag)])
        return json.dumps({"q": sp.q, "sites": [list(p) for p in sp.sites], "entries": entries})


def zero(spec: AlgebraSpec) -> AlgebraElement:
    return AlgebraElement(spec, np.zeros((spec.size, spec.size), dtype=complex))


def identity(spec: AlgebraSpec) -> AlgebraElement:
    t = np.zeros((spec.size, spec.size), dtype=complex)
    t[0, :] = 1.0
    return AlgebraElement(spec, t)


def classical(spec: AlgebraSpec, values) -> AlgebraElement:
    """Function on configurations, supported on unit arrows."""
    t = np.zeros((spec.size, spec.size), dtype=complex)
    t[0, :] = np.asarray(values, dtype=complex)
    return AlgebraElement(spec, t)


def delta(spec: AlgebraSpec, s: int, g: int) -> AlgebraElement:
    t = np.zeros((spec.size, spec.size), dtype=complex)
    t[g, s] = 1.0
    return AlgebraElement(spec, t)


def random_element(spec: AlgebraSpec, rng: np.random.Generator) -> AlgebraElement:
    t = rng.normal(size=(spec.size, spec.size)) + 1j * rng.normal(size=(spec.size, spec.size))
    return AlgebraElement(spec, t)


def convolve(f1: AlgebraElement, f2: AlgebraElement) -> AlgebraElement:
    """(f1 f2)(s, g) = sum_h f1(h^{-1} g s, h) f2(s, h^{-1} g)."""
    f1._check(f2)
    sp = f1.spec
    act, inv, comp = sp.act, sp.inverse, sp.compose
    out = np.zeros_like(f1.table)
    s_idx = np.arange(sp.size)[None, :]
    for h in range(sp.size):
        k = comp[inv[h]]  # k[g] = h^{-1} g
        src = act[k]  # src[g, s] = (h^{-1} g) s
        out += f1.table[h][src] * f2.table[k[:, None], s_idx]
    return AlgebraElement(sp, out)


def adjoint(f: AlgebraElement) -> AlgebraElement:
    """f*(s, g) = conj f(g s, g^{-1})."""
    sp = f.spec
    g = np.arange(sp.size)[:, None]
    return AlgebraElement(sp, np.conj(f.table[sp.inverse[g], sp.act]))


def trace(f: AlgebraElement) -> complex:
    return complex(f.table[0].sum())


def conditional_expectation(f: AlgebraElement) -> np.ndarray:
    return f.table[0].copy()


def regular_representation(f: AlgebraElement) -> np.ndarray:
    """Left regular representation on one source fiber, indexed by range configurations.

    The action is free and transitive, so every fiber gives the same matrix
    M[g s, s] = f(s, g) up to relabeling.
    """
    sp = f.spec
    M = np.zeros((sp.size, sp.size), dtype=complex)
    s = np.arange(sp.size)[None, :].repeat(sp.size, axis=0)
    M[sp.act, s] = f.table
    return M


def fiber_representation(f: AlgebraElement, sigma: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """The regular representation on the fiber of arrows leaving sigma, basis indexed by g.

    Returns (matrix, index_map) with index_map[g] = g.sigma, the configuration that
    labels the basis vector delta_(sigma, g) in ``regular_representation``.
    """
    idx = f.spec.act[:, sigma].copy()
    M = regular_representation(f)
    return M[np.ix_(idx, idx)], idx


def from_matrix(spec: AlgebraSpec, M: np.ndarray) -> AlgebraElement:
    g = np.arange(spec.size)[:, None]
    s = np.arange(spec.size)[None, :]
    return AlgebraElement(spec, np.asarray(M)[spec.act[g, s], s])


def generators(spec: AlgebraSpec, x) -> tuple[AlgebraElement, AlgebraElement]:
    i = spec.site_index(x)
    u = classical(spec, spec.spins()[:, i])
    g = np.zeros(spec.n, dtype=int)
    g[i] = 1
    t = np.zeros((spec.size, spec.size), dtype=complex)
    t[int(spec.encode(g)), :] = 1.0
    return u, AlgebraElement(spec, t)


def power(f: AlgebraElement, k: int) -> AlgebraElement:
    """k-fold convolution power by repeated squaring."""
    if k < 0:
        raise ValueError("k must be >= 0")
    out, base = identity(f.spec), f
    while k:
        if k & 1:
            out = convolve(out, base)
        k >>= 1
        if k:
            base = convolve(base, base)
    return out


def lift(f: AlgebraElement, universe: Region) -> AlgebraElement:
    """Embed an element on a subregion: f(s, g) = f_sub(s|sub, g|sub) when g is trivial off sub, else 0."""
    sub = f.spec
    big = AlgebraSpec(universe, sub.q)
    pos = [big.site_index(x) for x in sub.sites]
    rest = [i for i in range(big.n) if i not in set(pos)]
    d = big.digits
    s_loc = sub.encode(d[:, pos])
    outside_trivial = np.all(d[:, rest] == 0, axis=1) if rest else np.ones(big.size, bool)
    t = np.zeros((big.size, big.size), dtype=complex)
    gi = np.nonzero(outside_trivial)[0]
    t[gi, :] = f.table[s_loc[gi][:, None], s_loc[None, :]]
    return AlgebraElement(big, t)


def pauli(spec: AlgebraSpec, x) -> dict:
    """sigma^1, sigma^2, sigma^3 at x for q = 2, with sigma^2 = i sigma^3 sigma^1."""
    if spec.q != 2:
        raise ValueError("Pauli operators need q = 2")
    u, v = generators(spec, x)
    return {1: v, 2: 1j * convolve(u, v), 3: u}


def jw_weight_default(spec: AlgebraSpec):
    return lambda i, j: 1 if j < i else 0


def validate_jw_weight(spec: AlgebraSpec, w) -> None:
    n = spec.n
    for i in range(n):
        if w(i, i) != 0:
            raise ValueError("w(x, x) must vanish")
        for j in range(i + 1, n):
            a, b = w(i, j), w(j, i)
            if (a + b) % 2 != 1 or (a - b) % 2 != 1:
                raise ValueError(f"parity rule fails for sites {i}, {j}")


def jordan_wigner(spec: AlgebraSpec, w=None) -> list[tuple[AlgebraElement, AlgebraElement]]:
    """a_x = e^{i pi f_x} sigma^-_x, a_x^dag = e^{-i pi f_x} sigma^+_x, f_x = sum_z w(x,z) n_z,
    with sigma^- = 1_{s_x=+1} sigma^1, sigma^+ = 1_{s_x=-1} sigma^1, n_z = 1_{s_z=+1}."""
    if spec.q != 2:
        raise ValueError("Jordan-Wigner needs q = 2")
    w = jw_weight_default(spec) if w is None else w
    validate_jw_weight(spec, w)
    sp = spec.spins().real
    nz = (sp > 0).astype(float)
    out = []
    for i, x in enumerate(spec.sites.points):
        _, v = generators(spec, x)
        fx = nz @ np.array([w(i, j) for j in range(spec.n)], dtype=float)
        phase = classical(spec, np.exp(1j * np.pi * fx))
        minus = convolve(classical(spec, (sp[:, i] > 0).astype(float)), v)
        plus = convolve(classical(spec, (sp[:, i] < 0).astype(float)), v)
        a = convolve(phase, minus)
        ad = convolve(adjoint(phase), plus)
        out.append((a, ad))
    return out


def anticommutator(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return convolve(a, b) + convolve(b, a)


def is_perron_positive(f: AlgebraElement, tol: float = TOL) -> bool:
    t = f.table
    return bool(np.all(np.abs(t.imag) <= tol) and np.all(t.real >= -tol))


def is_positive_operator(f: AlgebraElement, tol: float = 1e-10) -> bool:
    M = regular_representation(f)
    if not np.allclose(M, M.conj().T, atol=1e-12):
        return False
    return bool(np.linalg.eigvalsh(M).min() >= -tol)


def max_abs(f: AlgebraElement) -> float:
    return float(np.abs(f.table).max())
