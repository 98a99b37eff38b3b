import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stoqlab import groupoid as gp
from stoqlab import qgibbs as qg
from stoqlab.lattice import Region

ONE = Region.box((1,))
TWO = Region.box((2,))
FOUR = Region.box((4,))


def test_split_classical_and_transverse():
    H0, fs = qg.split_hamiltonian(qg.tfim(TWO, J=1.0, eps=0.0), TWO)
    assert fs == {}
    assert np.allclose(H0, [-1, 1, 1, -1])
    H0, fs = qg.split_hamiltonian(qg.tfim(ONE, eps=0.4), ONE)
    assert np.all(H0 == 0)
    assert np.allclose(fs[frozenset([(0,)])], 0.4)


def test_split_tfim_chain():
    eps = 0.3
    H0, fs = qg.split_hamiltonian(qg.tfim(FOUR, J=1.0, eps=eps), FOUR)
    assert len(fs) == 4 and all(np.allclose(v, eps) for v in fs.values())
    spins = gp.AlgebraSpec(FOUR).spins().real
    ising = -(spins[:, :-1] * spins[:, 1:]).sum(axis=1)
    assert np.allclose(H0, ising)


def test_exact_density_zero_hamiltonian():
    phi = qg.Interaction(TWO)
    rho = qg.exact_density(phi, TWO, 2.0)
    assert gp.max_abs(rho - gp.identity(rho.spec)) <= 1e-14


def test_exact_density_single_site():
    beta, eps = 0.8, 1.3
    rho = qg.exact_density(qg.tfim(ONE, eps=eps), ONE, beta)
    for s in range(2):
        assert rho(s, 0) == pytest.approx(math.cosh(beta * eps), abs=1e-12)
        assert rho(s, 1) == pytest.approx(math.sinh(beta * eps), abs=1e-12)


@settings(max_examples=20)
@given(st.floats(0.0, 2.0), st.floats(-1.0, 1.0), st.floats(0.0, 1.0))
def test_exact_density_self_adjoint_positive(beta, J, eps):
    rho = qg.exact_density(qg.tfim(TWO, J=J, eps=eps), TWO, beta)
    assert gp.max_abs(gp.adjoint(rho) - rho) <= 1e-10 * max(1.0, gp.max_abs(rho))
    assert gp.is_positive_operator(rho, tol=1e-9 * max(1.0, gp.max_abs(rho)))


def test_exact_density_semigroup():
    phi = qg.tfim(TWO, J=0.7, eps=0.9, h=0.2)
    a, b = qg.exact_density(phi, TWO, 0.4), qg.exact_density(phi, TWO, 0.9)
    assert gp.max_abs(a @ b - qg.exact_density(phi, TWO, 1.3)) <= 1e-10


def test_trotter_classical_has_no_offdiagonal():
    phi = qg.tfim(TWO, eps=0.0)
    rho = qg.trotter_density(phi, TWO, 1.0, 8)
    assert np.all(rho.table[1:] == 0)


def test_trotter_converges():
    phi = qg.tfim(TWO, J=1.0, eps=1.0)
    exact = qg.exact_density(phi, TWO, 1.0)
    errs = [gp.max_abs(qg.trotter_density(phi, TWO, 1.0, n) - exact) for n in (8, 16, 32, 64)]
    assert all(b <= 0.75 * a for a, b in zip(errs, errs[1:]))


def test_trotter_single_site_limit():
    phi = qg.tfim(ONE, eps=1.0)
    err = gp.max_abs(qg.trotter_density(phi, ONE, 1.0, 4096) - qg.exact_density(phi, ONE, 1.0))
    assert err <= 1e-3  # first-order scheme: error ~ beta^2/n


def test_trotter_rejects_large_step():
    with pytest.raises(ValueError):
        qg.trotter_density(qg.tfim(ONE), ONE, 2.0, 2)


def test_sample_path_counts():
    assert qg.sample_path(TWO, 3.0, [], 1).marks == ()
    B = [frozenset([(0,)])]
    n = 100_000
    rng = qg.make_rng(5)
    counts = np.array([len(qg.sample_marks(3.0, B, rng)) for _ in range(n)])
    assert abs(counts.mean() - 3.0) <= 3 * math.sqrt(3.0 / n)
    p0 = math.exp(-3.0)
    assert abs((counts == 0).mean() - p0) <= 3 * math.sqrt(p0 * (1 - p0) / n)


@given(st.integers(0, 2**31 - 1))
def test_sampled_paths_are_consistent(seed):
    jumps = [frozenset([(0,)]), frozenset([(1,)]), frozenset([(0,), (1,)])]
    p = qg.sample_path(TWO, 2.0, jumps, seed, initial=(1, -1))
    p.check()
    ts = [t for t, _ in p.marks]
    assert ts == sorted(ts)


def test_path_weight_examples():
    phi = qg.tfim(TWO, J=1.0, eps=0.5)
    H0, _ = qg.split_hamiltonian(phi, TWO)
    assert qg.path_weight((), phi, TWO, (2, 0), 1.5) == pytest.approx(math.exp(-1.5 * H0[2]))
    assert qg.path_weight((), phi, TWO, (2, 1), 1.5) == 0
    one = qg.tfim(ONE, eps=0.6)
    assert qg.path_weight(((0.3, frozenset([(0,)])),), one, ONE, (0, 1), 1.0) == pytest.approx(0.6)


def test_ppp_classical_offdiagonal_zero():
    est = qg.ppp_density_mc(qg.tfim(TWO, eps=0.0), TWO, 1.0, (0, 1), 1000, 3)
    assert est.value == 0


def test_ppp_single_site_sinh():
    est = qg.ppp_density_mc(qg.tfim(ONE, eps=1.0), ONE, 1.0, (0, 1), 100_000, 11)
    assert abs(est.value - math.sinh(1.0)) <= 3 * est.stderr


def test_ppp_two_site_all_entries():
    phi = qg.tfim(TWO, J=1.0, eps=0.8)
    exact = qg.exact_density(phi, TWO, 1.0)
    vals, ses, _ = qg.density_table_mc(phi, TWO, 1.0, 40_000, 21)
    # 16 entries at 3 sigma: allow for the multiple comparisons with a Bonferroni-free count
    bad = np.abs(vals - exact.table) > 3 * ses + 1e-12
    assert bad.sum() <= 1


def test_series_examples():
    phi = qg.tfim(ONE, eps=1.0)
    v0, _ = qg.ppp_density_series(phi, ONE, 1.0, (0, 0), 0)
    assert v0 == pytest.approx(1.0)
    v3, tail3 = qg.ppp_density_series(phi, ONE, 1.0, (0, 1), 3)
    assert abs(v3 - math.sinh(1.0)) <= tail3
    tails = [qg.ppp_density_series(phi, ONE, 1.0, (0, 0), k)[1] for k in range(4)]
    assert tails == sorted(tails, reverse=True)
    cl = qg.tfim(TWO, J=1.0, eps=0.0)
    H0, _ = qg.split_hamiltonian(cl, TWO)
    assert qg.ppp_density_series(cl, TWO, 0.7, (1, 0), 0)[0] == pytest.approx(math.exp(-0.7 * H0[1]))


def test_boundary_empty_matches_classical_bc():
    univ = Region.box((3,))
    lam = TWO
    phi = qg.tfim(univ, J=1.0, eps=0.7)
    omega = {(2,): -1}
    bp = qg.BoundaryPath.make(phi, lam, (), omega)
    exact = qg.exact_bc_density(phi, lam, 1.0, omega)
    est = qg.boundary_density_mc(phi, lam, 1.0, bp, (1, 0), 40_000, 4)
    assert abs(est.value - exact(1, 0)) <= 3 * est.stderr


def test_boundary_stoquastic_weights_nonnegative():
    univ = Region.box((3,))
    phi = qg.tfim(univ, J=1.0, eps=0.7)
    bp = qg.BoundaryPath.make(phi, TWO, ((0.4, frozenset([(2,)])),), {(2,): 1})
    ps = qg.boundary_density_samples(phi, TWO, 1.0, bp, 2000, 9)
    assert np.all(np.real(ps.w) >= 0) and np.all(np.imag(ps.w) == 0)


def test_boundary_classical_flip_is_zero():
    univ = Region.box((3,))
    phi = qg.tfim(univ, J=1.0, eps=0.0)
    bp = qg.BoundaryPath(((0.5, frozenset([(2,)])),), (((2,), 1),))
    assert qg.boundary_density_mc(phi, TWO, 1.0, bp, (0, 0), 500, 1).value == 0


@given(st.integers(0, 2**31 - 1), st.floats(0.05, 0.95))
def test_reverse_and_concat(seed, c):
    jumps = [frozenset([(0,)]), frozenset([(1,)])]
    p = qg.sample_path(TWO, 2.0, jumps, seed)
    assert qg.reverse_path(qg.reverse_path(p)) == p
    empty = qg.JumpPath(TWO, p.final)
    pc = qg.concat_paths(p, empty, c)
    assert len(pc.marks) == len(p.marks)
    q = qg.sample_path(TWO, 2.0, jumps, seed + 1, initial=p.final)
    pq = qg.concat_paths(p, q, c)
    ts = [t for t, _ in pq.marks]
    assert ts == sorted(ts) and all(t != c and 0 < t < 1 for t in ts)
    pq.check()


def test_partition_function_examples():
    phi = qg.tfim(TWO, J=1.0, eps=0.6)
    z = qg.path_partition_function(phi, TWO, 1.0, None, 40_000, 2)
    exact = qg.exact_density(phi, TWO, 1.0).table[0].sum().real
    assert z.value.real > 0 and abs(z.value - exact) <= 3 * z.stderr
    z0 = qg.path_partition_function(phi, TWO, 0.0, None, 100, 2)
    assert z0.value == pytest.approx(4.0)


def test_path_gibbs_examples():
    phi = qg.tfim(TWO, J=1.0, eps=0.6)
    one = gp.identity(gp.AlgebraSpec(TWO))
    assert qg.path_gibbs(phi, TWO, 1.0, None, one, 5000, 3).value == pytest.approx(1.0, abs=1e-12)
    u, _ = gp.generators(gp.AlgebraSpec(TWO), (0,))
    est = qg.path_gibbs(phi, TWO, 1.0, None, u, 40_000, 8)
    exact = qg.gibbs_expectation_exact(phi, TWO, 1.0, u)
    assert abs(est.value - exact) <= 3 * est.stderr + 1e-12


def test_consistency_examples():
    phi = qg.tfim(FOUR, J=1.0, eps=0.5)
    sp = gp.AlgebraSpec(FOUR)
    const = gp.identity(sp) * 2.0
    delta = Region.of([(1,), (2,)])
    # both stages return 2 per path; only the ratio divisions round
    assert abs(qg.consistency_check_mc(phi, FOUR, delta, 1.0, const, 2000, 1).value) <= 1e-12
    u, _ = gp.generators(sp, (1,))
    res = qg.consistency_check_mc(phi, FOUR, delta, 1.0, u, 5000, 2)
    assert abs(res.value) <= 3 * res.stderr + 1e-12
    same = qg.consistency_check_mc(phi, FOUR, FOUR, 1.0, u, 2000, 3)
    assert abs(same.value) <= 3 * same.stderr + 1e-12


def test_classify():
    assert qg.classify(qg.tfim(TWO, eps=0.5))["stoquastic"]
    h = qg.heisenberg(TWO, J1=1.0, J2=0.5, J3=1.0, eps=0.3)
    assert qg.classify(h) == {"stoquastic": True, "admissible": "yes_by_stoquastic"}
    xy = qg.heisenberg(TWO, J1=-1.0, J2=0.5, J3=0.0)
    assert qg.classify(xy) == {"stoquastic": False, "admissible": "unknown"}


def test_classical_bc_hamiltonian():
    univ = Region.box((3,))
    omega = {(2,): -1}
    cl = qg.tfim(univ, J=1.0, eps=0.0)
    H = qg.classical_bc_hamiltonian(cl, TWO, omega)
    spins = gp.AlgebraSpec(TWO).spins().real
    expect = -(spins[:, 0] * spins[:, 1]) - spins[:, 1] * (-1)
    assert np.allclose(H.table[0], expect) and np.all(H.table[1:] == 0)
    onsite = qg.tfim(univ, J=0.0, eps=0.5, h=0.3)
    assert gp.max_abs(qg.classical_bc_hamiltonian(onsite, TWO, omega) - qg.hamiltonian_element(onsite, TWO)) <= 1e-15
    q = qg.tfim(univ, J=1.0, eps=0.4)
    Hq = qg.classical_bc_hamiltonian(q, TWO, omega)
    assert gp.max_abs(gp.adjoint(Hq) - Hq) <= 1e-14


def test_path_metric():
    jumps = [frozenset([(0,)]), frozenset([(1,)])]
    p = qg.sample_path(TWO, 3.0, jumps, 4)
    assert qg.path_metric(p, p) == 0
    longer = qg.JumpPath(TWO, p.initial, p.marks + ((0.9999999, frozenset([(0,)])),)) if not p.marks or p.marks[-1][0] < 0.9999999 else None
    if longer is not None:
        assert qg.path_metric(p, longer) == 1.0
    q = qg.JumpPath(TWO, p.initial, tuple((t * 0.5, B) for t, B in p.marks))
    assert qg.path_metric(p, q) == qg.path_metric(q, p)


def test_interaction_validation():
    with pytest.raises(ValueError):
        qg.Interaction(TWO, {frozenset([(0,), (1,)]): 1.0}, R=0)
    with pytest.raises(ValueError):
        qg.Interaction(TWO, f={frozenset([(0,)]): {frozenset(): 1j}})
