import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_channel
from nkic.errors import ConfigError
from nkic.exporders import (
    LAWS,
    AnalyticLaw,
    EigenOrders,
    analytic_tail_exponent,
    beta_set,
    dmt_exponent,
    eigen_orders,
    exp_order,
    order_sample,
    partition_limit,
    theorem_bounds,
    x_of_set,
    z_mimo,
    z_siso,
)
from nkic.netmodel import ActiveSet, NetworkConfig, sample_network
from nkic.rates import rate_sd_siso


def test_exp_order_examples():
    assert exp_order(0.01, 100.0) == pytest.approx(1.0, abs=1e-15)
    assert exp_order(1.0, 1e5) == 0.0
    assert exp_order(10.0, 100.0) == pytest.approx(-0.5, abs=1e-15)
    assert exp_order(0.0, 10.0) == math.inf
    assert exp_order(-1.0, 10.0) == math.inf
    with pytest.raises(ConfigError):
        exp_order(0.5, 1.0)
    assert np.allclose(exp_order(np.array([1e-2, 1e-4]), 100.0), [1.0, 2.0])


def test_beta_set_examples():
    alpha = {(1, 2): 0.5, (1, 3): 1.3}
    assert beta_set(1, (1, 2, 3), alpha) == 0.5
    assert beta_set(1, (1, 2, 3), {(1, 2): 1.0, (1, 3): 2.5}) == 1.0
    assert beta_set(1, (1,), {}) == 1.0
    A = np.array([[0.0, 0.7], [0.2, 0.1]])
    assert beta_set(2, (1, 2), A) == 0.2
    with pytest.raises(ConfigError):
        beta_set(4, (1, 2), A)


def test_z_and_x_examples():
    assert z_siso(0.2, 0.5) == pytest.approx(0.3)
    assert z_siso(0.5, 0.2) == 0.0
    assert z_siso(0.0, 1.0) == 1.0
    assert x_of_set([0.3, 0.5, 0.2]) == 1.0
    assert x_of_set([0, 0]) == 0.0
    assert x_of_set([1, 1, 1]) == 3.0


def test_z_mimo_examples():
    e = EigenOrders(np.array([0.2]), np.array([0.5]))
    assert z_mimo(e, 1) == pytest.approx(0.3) == pytest.approx(z_siso(0.2, 0.5))
    e = EigenOrders(np.zeros(3), np.array([1.0, 1.5, np.inf]))
    assert z_mimo(e, 3) == 3.0
    with pytest.raises(ConfigError):
        z_mimo(EigenOrders(np.zeros(2), np.zeros(3)), 2)


def test_z_mimo_random_recomputation():
    rng = np.random.default_rng(5)
    for _ in range(100):
        a, b = rng.uniform(-0.5, 2.0, 2), rng.uniform(-0.5, 2.0, 2)
        ref = max(0.0, (1 - a[0]) + (1 - a[1]) - max(0.0, 1 - b[0]) - max(0.0, 1 - b[1]))
        assert z_mimo(EigenOrders(a, b), 2) == pytest.approx(ref, abs=1e-15)


def test_analytic_examples():
    assert analytic_tail_exponent(AnalyticLaw("Z_siso", K=3), 0.5) == 1.0
    assert analytic_tail_exponent(AnalyticLaw("Z_mimo", K=3, N=2), 1.0) == 3.0
    assert analytic_tail_exponent(AnalyticLaw("wishart", p=2, q=2), 1.0) == 1.0
    assert analytic_tail_exponent(AnalyticLaw("beta_alpha"), -0.5) == 0.0
    assert analytic_tail_exponent(AnalyticLaw("beta_alpha"), 1.2) == math.inf
    assert analytic_tail_exponent(AnalyticLaw("Z_siso", K=3), 1.2) == math.inf
    assert analytic_tail_exponent(AnalyticLaw("X_siso", K=2), 0.3) == pytest.approx(0.3)
    assert analytic_tail_exponent(AnalyticLaw("X_mimo", K=3, N=1), 2.5) == pytest.approx(2.5 * 3.5)


def test_law_validation():
    with pytest.raises(ConfigError):
        AnalyticLaw("Y_siso")
    with pytest.raises(ConfigError):
        AnalyticLaw("wishart", p=3, q=2)
    with pytest.raises(ConfigError):
        AnalyticLaw("Z_mimo", K=1)


@pytest.mark.parametrize("law", [l for l in LAWS if l != "wishart"])
def test_exceedance_exponents_nondecreasing(law):
    L = AnalyticLaw(law, K=3, N=2)
    pts = np.linspace(-0.5, L.upper + 0.5, 301)
    vals = [analytic_tail_exponent(L, x) for x in pts]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_wishart_lower_tail_exponent_nonincreasing():
    # lower-tail event {stat < r}: larger r means a likelier event
    L = AnalyticLaw("wishart", p=2, q=3)
    vals = [analytic_tail_exponent(L, r) for r in np.linspace(-0.5, 2.5, 301)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    assert vals[-1] == 0.0


def test_dmt_exponent_interpolates_integer_points():
    for p, q in [(1, 1), (2, 2), (2, 3), (3, 4)]:
        for k in range(p + 1):
            assert dmt_exponent(p, q, k) == (p - k) * (q - k)
    assert dmt_exponent(1, 1, 0.5) == 0.5
    assert dmt_exponent(2, 2, 0.5) == pytest.approx(2.5)


def test_theorem_bound_examples():
    b = theorem_bounds(2.0, 3)
    assert (b.lb_siso, b.ub_siso) == (1.0, 3.0)
    b = theorem_bounds(0.0, 3)
    assert (b.lb_siso, b.ub_siso) == (0.0, 0.0)
    b = theorem_bounds(1.0, 2, 2)
    assert b.zeta == pytest.approx(1.0) and b.lb_mimo == pytest.approx(1.0)
    assert theorem_bounds(5.0, 1).lb_siso == 1.0
    assert b.xi_sufficient(2) == 2 and b.xi_necessary(2) == 0.5
    assert b.xi_sufficient_mimo(3) == 9 and b.xi_sufficient_mimo(4) == 12
    assert theorem_bounds(4.0, 3).lb_siso == 2.0
    with pytest.raises(ConfigError):
        theorem_bounds(-1.0, 2)


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 50), st.integers(2, 10))
def test_bound_ordering(xi, K):
    b = theorem_bounds(xi, K)
    assert b.lb_siso <= b.ub_siso + 1e-12
    assert theorem_bounds(xi, K, 1).lb_mimo >= b.lb_siso - 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 50), st.integers(2, 6), st.integers(1, 4))
def test_zeta_solves_quadratic(xi, K, N):
    z = theorem_bounds(xi, K, N).zeta
    assert z * (z + (K - 2) * N) == pytest.approx(xi, abs=1e-9 * max(1, xi))
    assert partition_limit(xi, K, N) <= N * K


def test_order_sample_siso():
    P = np.array([[0.1, 0.01, 1.0], [1e-3, 1.0, 0.5], [1.0, 1.0, 1e-2]])
    ch = make_channel(np.sqrt(P))
    s = order_sample(ch, (1, 2, 3), 100.0)
    assert np.allclose(s.alpha, [[0.5, 1.0, 0.0], [1.5, 0.0, 0.15051499783199057], [0.0, 0.0, 1.0]])
    assert np.allclose(s.beta_set, [0.0, 0.15051499783199057, 0.0])
    assert np.allclose(s.z, [0.0, 0.15051499783199057, 0.0])
    assert s.x == pytest.approx(0.15051499783199057)


def test_order_sample_member_order():
    ch = sample_network(NetworkConfig(5, 2, seed=1), 0)
    a = order_sample(ch, (2, 4), 1e3)
    b = order_sample(ch, (4, 2), 1e3)
    assert a.x == pytest.approx(b.x)
    assert np.allclose(a.z, b.z[::-1])


def test_eigen_orders_shapes_and_pathloss_option():
    ch = sample_network(NetworkConfig(3, 3, 2, seed=3), 0)
    e = eigen_orders(ch, 1, (1, 2, 3), 100.0)
    assert e.direct.shape == (2,) and e.interf.shape == (2,)
    assert np.all(np.diff(e.direct) <= 0) and np.all(np.diff(e.interf) <= 0)
    e1 = eigen_orders(make_channel(np.ones((1, 1))), 1, (1,), 100.0)
    assert np.all(np.isinf(e1.interf))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 5), st.integers(1, 3), st.integers(0, 2**32), st.floats(1.5, 1e8))
def test_range_invariants(K, N, seed, snr):
    if N > 1 and K < 2:
        K = 2
    ch = sample_network(NetworkConfig(K, K, N, seed=seed), 0)
    s = order_sample(ch, tuple(range(1, K + 1)), snr)
    assert np.all(s.z >= 0) and np.all(s.z <= N + 1e-12)
    assert 0 <= s.x <= N * K + 1e-12
    if N == 1:
        assert np.all(s.beta_set <= 1.0)


def test_rate_over_log_snr_approaches_z():
    # fixed gains, so orders drift with snr; compare rate/log2(snr) against the
    # order statistic taken at the same snr
    ch = make_channel([[1e-1, 1e-4], [1e-5, 1.0]])
    errs = []
    for snr in (1e3, 1e6):
        s = order_sample(ch, (1, 2), snr)
        errs.append(max(abs(rate_sd_siso(u, (1, 2), ch, snr) / math.log2(snr) - s.z[u - 1]) for u in (1, 2)))
    assert errs[1] < errs[0]
