import math

import numpy as np
import pytest
import scipy.special
from hypothesis import given, strategies as st

from stoqlab import pointproc as pp


def test_zero_intensity_is_empty():
    assert len(pp.sample_poisson(0.0, ["a", "b"], 1)) == 0


def test_poisson_mean_count():
    counts = pp.sample_counts(3.0, 100_000, 2)
    assert abs(counts.mean() - 3.0) <= 3 * math.sqrt(3.0 / len(counts))


def test_sample_poisson_counts_match_pmf():
    rng = pp.make_rng(4)
    counts = np.array([len(pp.sample_poisson(3.0, ["x"], rng)) for _ in range(20_000)])
    assert pp.poisson_pmf_chisquare(counts, 3.0)[1] >= 0.01


@pytest.mark.parametrize("lam", [0.5, 3.0])
def test_pmf_goodness_of_fit(lam):
    _, p = pp.poisson_pmf_chisquare(pp.sample_counts(lam, 50_000, 10), lam)
    assert p >= 0.01


def test_disjoint_intervals_independent():
    assert pp.independence_test(3.0, 20_000, 5) >= 0.01


def test_series_examples():
    lam = 1.7
    v, tail = pp.poisson_integral_series(lambda nu: 1.0, lam, 3, 1.0)
    assert abs(v - 1.0) <= tail + 1e-12
    v, tail = pp.poisson_integral_series(lambda nu: 1.0 if len(nu) == 0 else 0.0, lam, 3, 1.0)
    assert abs(v - math.exp(-lam)) <= tail + 1e-12
    # f(nu) = #nu is unbounded; the omitted terms sum to lam * P(N >= max_n)
    v, _ = pp.poisson_integral_series(len, lam, 3, 1.0)
    assert abs(v - lam) <= lam * scipy.special.gammainc(3, lam) + 1e-12


def test_series_order_limit():
    with pytest.raises(ValueError):
        pp.poisson_integral_series(len, 1.0, 4, 1.0)


def test_superpose_with_empty():
    x = pp.sample_poisson(2.0, ["a"], 3)
    assert pp.superpose(x, pp.MarkedPointSet()) == x


def test_superposition_report():
    rep = pp.superposition_test(1.0, 2.0, 20_000, 6)
    assert rep.mean_ok and rep.chi2_ok and rep.decomp_ok


@pytest.mark.parametrize("n,r", [(5, 1.0), (12, 2.5)])
def test_bernoulli_exact_moments(n, r):
    assert pp.bernoulli_integral_exact(lambda nu: 1.0, n, r) == pytest.approx(1.0, abs=1e-12)
    assert pp.bernoulli_integral_exact(len, n, r) == pytest.approx(r, abs=1e-12)


def test_bernoulli_converges_to_poisson():
    phi = lambda t: np.exp(-t)
    r = 1.5
    target = pp.poisson_integral_product(phi, r)
    errs = [abs(pp.bernoulli_integral_product(phi, n, r) - target) for n in (10, 100, 1000)]
    assert errs[0] > errs[1] > errs[2]


def test_product_formula_matches_enumeration():
    phi = lambda t: np.cos(t)
    f = lambda nu: float(np.prod(np.cos(nu.times()))) if len(nu) else 1.0
    assert pp.bernoulli_integral_product(phi, 10, 2.0) == pytest.approx(pp.bernoulli_integral_exact(f, 10, 2.0), abs=1e-12)


@given(st.integers(1, 50), st.floats(0.0, 0.99), st.integers(0, 2**31 - 1))
def test_bernoulli_marks_on_grid(n, frac, seed):
    nu = pp.bernoulli_process(n, frac * n, seed)
    assert all(abs(t * n - round(t * n)) < 1e-9 and 0 < t <= 1 for t in nu.times())


@given(st.floats(0.0, 5.0), st.integers(0, 2**31 - 1))
def test_samples_sorted_and_reproducible(lam, seed):
    a = pp.sample_poisson(lam, ["a", "b"], seed)
    assert a == pp.sample_poisson(lam, ["a", "b"], seed)
    ts = list(a.times())
    assert ts == sorted(ts)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        pp.sample_poisson(-1.0, ["a"], 0)
    with pytest.raises(ValueError):
        pp.bernoulli_process(4, 4.0, 0)
    with pytest.raises(ValueError):
        pp.MarkedPointSet(((0.5, None), (0.2, None)))
