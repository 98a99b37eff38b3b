import numpy as np
import pytest
from hypothesis import given, strategies as st

from stoqlab import groupoid as gp
from stoqlab.lattice import Region

TOL = 1e-12


def spec(n=2, q=2):
    return gp.AlgebraSpec(Region.box((n,)), q)


def close(a, b, tol=TOL):
    return np.abs(a.table - b.table).max() <= tol


specs = st.sampled_from([(1, 2), (2, 2), (3, 2), (1, 3), (2, 3)])


@given(specs, st.integers(0, 2**32 - 1))
def test_identity_is_neutral(sq, seed):
    sp = spec(*sq)
    f = gp.random_element(sp, np.random.default_rng(seed))
    one = gp.identity(sp)
    assert close(gp.convolve(one, f), f) and close(gp.convolve(f, one), f)


def test_identity_is_sum_of_unit_deltas():
    sp = spec(2, 3)
    tot = gp.zero(sp)
    for s in range(sp.size):
        tot = tot + gp.delta(sp, s, 0)
    assert close(tot, gp.identity(sp), 0)


@given(specs, st.integers(0, 2**32 - 1))
def test_classical_left_product(sq, seed):
    sp = spec(*sq)
    rng = np.random.default_rng(seed)
    c = rng.normal(size=sp.size)
    f = gp.random_element(sp, rng)
    prod = gp.convolve(gp.classical(sp, c), f)
    # (c f)(s, g) = c(g s) f(s, g)
    assert np.abs(prod.table - c[sp.act] * f.table).max() <= TOL


def test_delta_matrix_elements():
    sp = spec(2, 3)
    rng = np.random.default_rng(0)
    f = gp.random_element(sp, rng)
    w, h, e, k = 4, 5, 2, 7
    out = gp.convolve(gp.convolve(gp.delta(sp, w, h), f), gp.delta(sp, e, k))
    target = sp.act[h, w]  # h.w must equal gt.e
    gt = next(g for g in range(sp.size) if sp.act[g, e] == target)
    expect = gp.zero(sp)
    expect.table[gt, e] = f(sp.act[k, e], sp.compose[sp.compose[sp.inverse[h], gt], sp.inverse[k]])
    assert close(out, expect)


@given(specs, st.integers(0, 2**32 - 1))
def test_adjoint_involution_and_reality(sq, seed):
    sp = spec(*sq)
    rng = np.random.default_rng(seed)
    f = gp.random_element(sp, rng)
    assert close(gp.adjoint(gp.adjoint(f)), f, 0)
    c = gp.classical(sp, rng.normal(size=sp.size))
    assert close(gp.adjoint(c), c, 0)


def test_adjoint_of_generators():
    for q in (2, 3, 4):
        sp = spec(2, q)
        u, v = gp.generators(sp, (1,))
        assert close(gp.adjoint(u), gp.power(u, q - 1))
        assert close(gp.adjoint(v), gp.power(v, q - 1))
    sp = spec(2, 2)
    u, v = gp.generators(sp, (0,))
    assert close(gp.adjoint(u), u) and close(gp.adjoint(v), v)


def test_trace_values():
    for q in (2, 3):
        sp = spec(2, q)
        assert gp.trace(gp.identity(sp)) == pytest.approx(q**2)
        u, _ = gp.generators(sp, (0,))
        assert abs(gp.trace(u)) <= TOL


@given(specs, st.integers(0, 2**32 - 1))
def test_trace_cyclic(sq, seed):
    sp = spec(*sq)
    rng = np.random.default_rng(seed)
    a, b = gp.random_element(sp, rng), gp.random_element(sp, rng)
    t1, t2 = gp.trace(a @ b), gp.trace(b @ a)
    assert abs(t1 - t2) <= TOL * max(1.0, abs(t1))


@pytest.mark.parametrize("q", [2, 3, 5])
def test_generator_relations(q):
    sp = spec(2, q)
    one = gp.identity(sp)
    for x in sp.sites:
        u, v = gp.generators(sp, x)
        assert close(gp.power(u, q), one, 1e-14)
        assert close(gp.power(v, q), one, 1e-14)
        assert close(u @ v, sp.zq * (v @ u), 1e-14)


def test_pauli_anticommute_same_site_commute_across():
    sp = spec(2, 2)
    u0, v0 = gp.generators(sp, (0,))
    u1, v1 = gp.generators(sp, (1,))
    assert close(u0 @ v0, -1 * (v0 @ u0))
    assert close(u0 @ v1, v1 @ u0)


@given(specs, st.integers(0, 2**32 - 1))
def test_representation_is_star_homomorphism(sq, seed):
    sp = spec(*sq)
    rng = np.random.default_rng(seed)
    a, b = gp.random_element(sp, rng), gp.random_element(sp, rng)
    pa, pb = gp.regular_representation(a), gp.regular_representation(b)
    assert np.abs(gp.regular_representation(a @ b) - pa @ pb).max() <= 1e-12 * max(1, np.abs(pa).max() * np.abs(pb).max() * sp.size)
    assert np.array_equal(gp.regular_representation(gp.adjoint(a)), pa.conj().T)


def test_representation_of_generators_is_clock_and_shift():
    q = 3
    sp = spec(1, q)
    u, v = gp.generators(sp, (0,))
    U = np.diag(sp.zq ** np.arange(q))
    V = np.roll(np.eye(q), 1, axis=0)
    assert np.abs(gp.regular_representation(u) - U).max() <= 1e-15
    assert np.array_equal(gp.regular_representation(v), V)


def test_from_matrix_roundtrip():
    sp = spec(2, 3)
    f = gp.random_element(sp, np.random.default_rng(4))
    assert close(gp.from_matrix(sp, gp.regular_representation(f)), f, 0)


def test_conditional_expectation():
    sp = spec(2, 2)
    rng = np.random.default_rng(1)
    c = rng.normal(size=sp.size)
    assert np.array_equal(gp.conditional_expectation(gp.classical(sp, c)), c)
    g = gp.random_element(sp, rng)
    lhs = gp.conditional_expectation(gp.classical(sp, c) @ g)
    assert np.abs(lhs - c * gp.conditional_expectation(g)).max() <= TOL
    _, v = gp.generators(sp, (0,))
    assert np.all(gp.conditional_expectation(v) == 0)


def test_jordan_wigner_car():
    sp = spec(3, 2)
    ops = gp.jordan_wigner(sp)
    one, zero = gp.identity(sp), gp.zero(sp)
    spins = sp.spins().real
    for i, (a, ad) in enumerate(ops):
        assert close(gp.anticommutator(a, ad), one)
        assert close(ad, gp.adjoint(a))
        # with sigma^+ = 1_{s=-1} sigma^1 the product a^dag a is 1_{s=-1} (decision ledger)
        assert close(ad @ a, gp.classical(sp, (spins[:, i] < 0).astype(float)))
        assert close(a @ ad, gp.classical(sp, (spins[:, i] > 0).astype(float)))
        for j, (b, bd) in enumerate(ops):
            if i != j:
                assert close(gp.anticommutator(a, b), zero)
                assert close(gp.anticommutator(a, bd), zero)


def test_jordan_wigner_rejects_bad_weight():
    with pytest.raises(ValueError):
        gp.jordan_wigner(spec(2, 2), lambda i, j: 0)


def test_positivity_predicates():
    sp = spec(1, 2)
    one = gp.identity(sp)
    assert gp.is_perron_positive(one) and gp.is_positive_operator(one)
    _, v = gp.generators(sp, (0,))
    x = v + gp.adjoint(v)
    assert gp.is_perron_positive(x) and not gp.is_positive_operator(x)
    c = gp.classical(sp, [0.0, 2.0])
    assert gp.is_perron_positive(c) and gp.is_positive_operator(c)


@given(specs, st.integers(0, 2**32 - 1))
def test_convolution_associative(sq, seed):
    sp = spec(*sq)
    rng = np.random.default_rng(seed)
    a, b, c = (gp.random_element(sp, rng) for _ in range(3))
    lhs, rhs = (a @ b) @ c, a @ (b @ c)
    assert np.abs(lhs.table - rhs.table).max() <= TOL * max(1.0, np.abs(lhs.table).max())


@pytest.mark.parametrize("n,q", [(1, 2), (2, 2), (1, 3), (2, 3)])
def test_monomials_span_algebra(n, q):
    sp = spec(n, q)
    us, vs = zip(*(gp.generators(sp, x) for x in sp.sites))
    rows = []
    for ks in np.ndindex(*([q] * (2 * n))):
        m = gp.identity(sp)
        for i in range(n):
            m = m @ gp.power(us[i], ks[i])
        for i in range(n):
            m = m @ gp.power(vs[i], ks[n + i])
        rows.append(m.table.ravel())
    assert np.linalg.matrix_rank(np.array(rows)) == q ** (2 * n)


@given(specs, st.integers(0, 2**32 - 1))
def test_trace_faithful(sq, seed):
    sp = spec(*sq)
    f = gp.random_element(sp, np.random.default_rng(seed))
    assert gp.trace(gp.adjoint(f) @ f).real > 0


def test_groupoid_inverse_of_product():
    sp = spec(2, 3)
    for g in range(sp.size):
        for h in range(sp.size):
            assert sp.inverse[sp.compose[g, h]] == sp.compose[sp.inverse[h], sp.inverse[g]]


def test_spec_mismatch_and_budget():
    with pytest.raises(gp.SpecMismatch):
        gp.identity(spec(1, 2)) @ gp.identity(spec(2, 2))
    with pytest.raises(ValueError):
        gp.AlgebraSpec(Region.box((13,)), 2)
